#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "rtfim/config.hpp"

namespace rtfim {

inline constexpr int kSchemaVersion = 1;

/// Identifier of the source tree the binary was built from.
const char* build_id();

/// "%.17g"; non-finite values are written as nan, inf, -inf.
std::string format_double(double x);

using TableValue = std::variant<double, long long, std::string>;

/// A rectangular result table with named columns.
class Table {
public:
    Table(std::string name, std::vector<std::string> columns);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<TableValue>>& rows() const { return rows_; }

    /// Throws InvalidArgument when the row width differs from the header.
    void add_row(std::vector<TableValue> row);

private:
    std::string name_;
    std::vector<std::string> columns_;
    std::vector<std::vector<TableValue>> rows_;
};

/// Metadata written at the top of every table.
struct TableMeta {
    std::string command;
    std::string config_hash;
    std::uint64_t base_seed = 0;
    std::string build;
    /// The only field allowed to differ between reruns of one config.
    std::string timestamp;

    static TableMeta from(const RunConfig& config, std::string timestamp);
};

/// CSV: '#'-prefixed metadata lines, one header row, one line per row.
std::string render_csv(const Table& table, const TableMeta& meta);
/// JSON: {"meta": {...}, "columns": [...], "rows": [[...], ...]}.
std::string render_json(const Table& table, const TableMeta& meta);

/// Writes <dir>/<name>.csv or .json and returns the path.
std::filesystem::path write_table(const Table& table, const TableMeta& meta, const std::filesystem::path& dir,
                                  OutputFormat format);

/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace rtfim
