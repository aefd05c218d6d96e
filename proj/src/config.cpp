#include "rtfim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rtfim/errors.hpp"

namespace rtfim {

namespace {

const std::vector<std::string> kAll = {"*"};

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return std::string(s.substr(a, b - a));
}

bool applies(const ConfigKey& key, const std::string& command) {
    return std::any_of(key.commands.begin(), key.commands.end(),
                       [&](const std::string& c) { return c == "*" || c == command; });
}

const ConfigKey* find_key(const std::string& name) {
    for (const ConfigKey& k : config_keys()) {
        if (k.name == name) {
            return &k;
        }
    }
    return nullptr;
}

double to_double(std::string_view text, const std::string& what) {
    const std::string s = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
        throw ConfigError(what + ": expected a number, got '" + s + "'");
    }
    return value;
}

long long to_integer(std::string_view text, const std::string& what) {
    const std::string s = trim(text);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(what + ": expected an integer, got '" + s + "'");
    }
    return value;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"static-scan", "quench", "ensemble", "verify"};
    return names;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"output_dir", "", "output directory (default: $RTFIM_OUTPUT_DIR, else ./rtfim-out)", kAll, false},
        {"format", "csv", "table format: csv or json", kAll, true},
        {"base_seed", "1", "base seed of every disorder stream", kAll, true},
        {"threads", "1", "worker threads", kAll, false},

        {"sigma", "0,0.4,0.8", "disorder strengths", {"static-scan", "ensemble"}, true},
        {"n", "64,128,256,512", "chain lengths (even)", {"static-scan", "ensemble"}, true},
        {"realization_budget", "2048", "realizations per cell are max(min, ceil(budget / N))",
         {"static-scan", "ensemble"}, true},
        {"min_realizations", "4", "lower bound on realizations per cell", {"static-scan", "ensemble"}, true},
        {"f_threshold", "0.1", "coefficient fit uses points with F below this", {"static-scan", "ensemble"}, true},
        {"nd_threshold", "3", "coefficient fit uses points with N d at least this",
         {"static-scan", "ensemble"}, true},

        {"g", "0.05:2:0.05", "uniform fields of the static scan", {"static-scan"}, true},
        {"gc_sigma", "0:1.8:0.05", "disorder strengths of the critical-field table", {"static-scan"}, true},
        {"bundle_g", "0.5", "fields at which C_r, P_n and PP_r are tabulated (largest N)", {"static-scan"},
         true},

        {"tau_q", "16,32,64,128,256", "quench times", {"ensemble"}, true},
        {"compute_bundles", "false", "tabulate the averaged C_r, P_n and PP_r of every cell", {"ensemble"},
         true},
        {"kzm_alpha", "1", "alpha of the logarithmic length estimate", {"ensemble"}, true},

        {"quench_sigma", "0.1", "disorder strength of the single realization", {"quench"}, true},
        {"quench_tau_q", "16", "quench time of the single realization", {"quench"}, true},
        {"quench_n", "256", "chain length of the single realization", {"quench"}, true},
        {"realization", "0", "realization index k (seed stream of (N, k))", {"quench"}, true},
        {"n_snapshots", "200", "trajectory points from g_init to g_final", {"quench"}, true},
        {"zz_max_r", "0", "tabulate <sz_0 sz_R> for R = 1..zz_max_r (0: none)", {"quench"}, true},

        {"g_init", "10", "initial field of the ramp", {"quench", "ensemble"}, true},
        {"g_final", "0", "final field of the ramp", {"quench", "ensemble"}, true},
        {"dt", "0", "time step (0: min(0.02, 0.1 / g_init))", {"quench", "ensemble"}, true},
        {"order", "4", "splitting order: 2 or 4", {"quench", "ensemble"}, true},

        {"verify_n", "4,6,8", "chain lengths of the static oracle comparison", {"verify"}, true},
        {"verify_draws", "20", "random draws per chain length", {"verify"}, true},
        {"verify_g_max", "2", "uniform field drawn from [0, verify_g_max]", {"verify"}, true},
        {"verify_sigma", "0,0.5", "disorder strengths drawn from", {"verify"}, true},
        {"verify_dynamic_n", "8", "chain length of the dynamic comparison", {"verify"}, true},
        {"verify_dynamic_tau_q", "4", "quench time of the dynamic comparison", {"verify"}, true},
        {"verify_ed_dt", "0.001", "exact-evolution time step", {"verify"}, true},
    };
    return keys;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), command_) == names.end()) {
        throw ConfigError("unknown subcommand '" + command_ + "'");
    }
    for (const ConfigKey& k : config_keys()) {
        if (applies(k, command_)) {
            values_[k.name] = k.default_value;
        }
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const ConfigKey* k = find_key(key);
    if (k == nullptr) {
        throw ConfigError("unknown key '" + key + "'");
    }
    if (!applies(*k, command_)) {
        throw ConfigError("key '" + key + "' is not used by " + command_);
    }
    values_[key] = trim(value);
}

void RunConfig::set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("expected key=value, got '" + assignment + "'");
    }
    set(trim(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            set_assignment(line);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        load_text(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& RunConfig::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("key '" + key + "' is not used by " + command_);
    }
    return it->second;
}

std::string RunConfig::get_string(const std::string& key) const { return raw(key); }

double RunConfig::get_double(const std::string& key) const { return to_double(raw(key), key); }

int RunConfig::get_int(const std::string& key) const {
    const long long v = to_integer(raw(key), key);
    if (v < -2147483647LL || v > 2147483647LL) {
        throw ConfigError(key + ": integer out of range");
    }
    return static_cast<int>(v);
}

std::uint64_t RunConfig::get_uint64(const std::string& key) const {
    const std::string s = trim(raw(key));
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return value;
}

bool RunConfig::get_bool(const std::string& key) const {
    std::string s = raw(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        return false;
    }
    throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) {
            comma = text.size();
        }
        const std::string item = trim(text.substr(start, comma - start));
        start = comma + 1;
        if (item.empty()) {
            if (comma == text.size()) {
                break;
            }
            continue;
        }
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(to_double(item, "list item"));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw ConfigError("range '" + item + "' must read start:stop:step");
        }
        const double a = to_double(item.substr(0, c1), "range start");
        const double b = to_double(item.substr(c1 + 1, c2 - c1 - 1), "range stop");
        const double h = to_double(item.substr(c2 + 1), "range step");
        if (!(h > 0.0) || b < a) {
            throw ConfigError("range '" + item + "' needs step > 0 and stop >= start");
        }
        const auto count = static_cast<long long>(std::floor((b - a) / h + 1e-9));
        if (count > 1000000) {
            throw ConfigError("range '" + item + "' has too many points");
        }
        for (long long i = 0; i <= count; ++i) {
            out.push_back(a + static_cast<double>(i) * h);
        }
    }
    return out;
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
    try {
        return parse_double_list(raw(key));
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::vector<int> RunConfig::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (double x : get_doubles(key)) {
        if (x != std::round(x) || std::abs(x) > 1e9) {
            throw ConfigError(key + ": expected integers");
        }
        out.push_back(static_cast<int>(x));
    }
    return out;
}

OutputFormat RunConfig::format() const {
    const std::string f = raw("format");
    if (f == "csv") {
        return OutputFormat::Csv;
    }
    if (f == "json") {
        return OutputFormat::Json;
    }
    throw ConfigError("format must be csv or json, got '" + f + "'");
}

std::filesystem::path RunConfig::output_dir() const {
    const std::string& dir = raw("output_dir");
    if (!dir.empty()) {
        return dir;
    }
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return "rtfim-out";
}

QuenchProtocol RunConfig::protocol() const {
    QuenchProtocol p;
    p.g_init = get_double("g_init");
    p.g_final = get_double("g_final");
    p.dt = get_double("dt");
    p.order = get_int("order");
    if (command_ == "quench") {
        p.tau_q = get_double("quench_tau_q");
        p.n_snapshots = get_int("n_snapshots");
    }
    return p;
}

EnsemblePlan RunConfig::ensemble_plan() const {
    EnsemblePlan plan;
    plan.sigma_grid = get_doubles("sigma");
    plan.tau_q_grid = get_doubles("tau_q");
    plan.n_grid = get_ints("n");
    plan.base_seed = base_seed();
    plan.realization_budget = get_int("realization_budget");
    plan.min_realizations = get_int("min_realizations");
    plan.protocol = protocol();
    plan.compute_bundles = get_bool("compute_bundles");
    plan.threads = threads();
    return plan;
}

StaticPlan RunConfig::static_plan() const {
    StaticPlan plan;
    plan.sigma_grid = get_doubles("sigma");
    plan.g_grid = get_doubles("g");
    plan.n_grid = get_ints("n");
    plan.base_seed = base_seed();
    plan.realization_budget = get_int("realization_budget");
    plan.min_realizations = get_int("min_realizations");
    plan.threads = threads();
    return plan;
}

std::string RunConfig::canonical_text() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key + " = " + value + "\n";
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t RunConfig::hash() const {
    std::string text = "command = " + command_ + "\n";
    for (const auto& [key, value] : values_) {
        const ConfigKey* k = find_key(key);
        if (k != nullptr && k->hashed) {
            text += key + " = " + value + "\n";
        }
    }
    return fnv1a64(text);
}

std::string RunConfig::hash_hex() const {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

}  // namespace rtfim
