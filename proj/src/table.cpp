#include "rtfim/table.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "rtfim/errors.hpp"
#include "rtfim/rng.hpp"

#ifndef RTFIM_BUILD_ID
#define RTFIM_BUILD_ID "unknown"
#endif

namespace rtfim {

const char* build_id() { return RTFIM_BUILD_ID; }

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Table::Table(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void Table::add_row(std::vector<TableValue> row) {
    if (row.size() != columns_.size()) {
        throw InvalidArgument("table " + name_ + ": row has " + std::to_string(row.size()) + " values, expected " +
                              std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(row));
}

TableMeta TableMeta::from(const RunConfig& config, std::string timestamp) {
    return {config.command(), config.hash_hex(), config.base_seed(), build_id(), std::move(timestamp)};
}

namespace {

std::string csv_field(const TableValue& v) {
    if (const auto* d = std::get_if<double>(&v)) {
        return format_double(*d);
    }
    if (const auto* i = std::get_if<long long>(&v)) {
        return std::to_string(*i);
    }
    const auto& s = std::get<std::string>(v);
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') {
            quoted += '"';
        }
        quoted += c;
    }
    return quoted + "\"";
}

nlohmann::ordered_json meta_json(const Table& table, const TableMeta& meta) {
    nlohmann::ordered_json m;
    m["schema_version"] = kSchemaVersion;
    m["table"] = table.name();
    m["command"] = meta.command;
    m["config_hash"] = meta.config_hash;
    m["base_seed"] = meta.base_seed;
    m["build"] = meta.build;
    m["rng"] = std::string(kRngName) + "/v" + std::to_string(kRngVersion);
    m["timestamp"] = meta.timestamp;
    return m;
}

}  // namespace

std::string render_csv(const Table& table, const TableMeta& meta) {
    std::string out;
    out += "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
    out += "# table: " + table.name() + "\n";
    out += "# command: " + meta.command + "\n";
    out += "# config_hash: " + meta.config_hash + "\n";
    out += "# base_seed: " + std::to_string(meta.base_seed) + "\n";
    out += "# build: " + meta.build + "\n";
    out += "# rng: " + std::string(kRngName) + "/v" + std::to_string(kRngVersion) + "\n";
    out += "# timestamp: " + meta.timestamp + "\n";
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        out += (i ? "," : "") + table.columns()[i];
    }
    out += "\n";
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ",";
            }
            out += csv_field(row[i]);
        }
        out += "\n";
    }
    return out;
}

std::string render_json(const Table& table, const TableMeta& meta) {
    // One row per line keeps large tables readable and diffable.
    std::string out = "{\n \"meta\": " + meta_json(table, meta).dump() + ",\n";
    out += " \"columns\": " + nlohmann::ordered_json(table.columns()).dump() + ",\n";
    out += " \"rows\": [";
    for (std::size_t i = 0; i < table.rows().size(); ++i) {
        auto r = nlohmann::ordered_json::array();
        for (const auto& v : table.rows()[i]) {
            if (const auto* d = std::get_if<double>(&v)) {
                // JSON has no non-finite numbers; they become strings.
                if (std::isfinite(*d)) {
                    r.push_back(*d);
                } else {
                    r.push_back(format_double(*d));
                }
            } else if (const auto* n = std::get_if<long long>(&v)) {
                r.push_back(*n);
            } else {
                r.push_back(std::get<std::string>(v));
            }
        }
        out += (i ? ",\n  " : "\n  ") + r.dump();
    }
    out += table.rows().empty() ? "]\n}\n" : "\n ]\n}\n";
    return out;
}

std::filesystem::path write_table(const Table& table, const TableMeta& meta, const std::filesystem::path& dir,
                                  OutputFormat format) {
    std::filesystem::create_directories(dir);
    const bool csv = format == OutputFormat::Csv;
    const auto path = dir / (table.name() + (csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write " + path.string());
    }
    out << (csv ? render_csv(table, meta) : render_json(table, meta));
    return path;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace rtfim
