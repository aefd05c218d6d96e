#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rtfim/ensemble.hpp"
#include "rtfim/quench.hpp"

namespace rtfim {

enum class OutputFormat { Csv, Json };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "RTFIM_OUTPUT_DIR";

/// One documented configuration key.
struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
    /// Subcommands that read the key ("*" for all).
    std::vector<std::string> commands;
    /// Keys that cannot change the numbers (output location, thread count)
    /// are left out of the config hash.
    bool hashed = true;
};

/// Every key understood by the tool, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Flat key = value configuration of one subcommand. Files hold one
/// assignment per line; '#' starts a comment; later assignments (and
/// command-line overrides) replace earlier ones.
class RunConfig {
public:
    /// Defaults for the subcommand (static-scan, quench, ensemble, verify).
    explicit RunConfig(std::string command);

    const std::string& command() const { return command_; }

    /// Throws ConfigError for keys the subcommand does not read.
    void set(const std::string& key, const std::string& value);
    /// Parses "key=value".
    void set_assignment(const std::string& assignment);
    void load_file(const std::filesystem::path& path);
    void load_text(std::string_view text);

    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_uint64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// Comma-separated items; an item "a:b:h" expands to a, a+h, ... up to b.
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;

    OutputFormat format() const;
    std::filesystem::path output_dir() const;
    std::uint64_t base_seed() const { return get_uint64("base_seed"); }
    int threads() const { return get_int("threads"); }

    QuenchProtocol protocol() const;
    EnsemblePlan ensemble_plan() const;
    StaticPlan static_plan() const;

    /// Sorted "key = value" lines of every key the subcommand reads.
    std::string canonical_text() const;
    /// FNV-1a 64 of the hashed lines of canonical_text(), prefixed by the
    /// subcommand name.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

/// Subcommands with a configuration.
const std::vector<std::string>& subcommands();

/// Parses a comma-separated list with "a:b:h" ranges.
std::vector<double> parse_double_list(std::string_view text);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace rtfim
