// Command-line driver: static-scan, quench, ensemble, verify.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "rtfim/commands.hpp"
#include "rtfim/config.hpp"
#include "rtfim/errors.hpp"

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> assignments;
    std::string output_dir;
    std::string format;
    std::string seed;
    int threads = 0;
    bool print_config = false;
    bool quiet = false;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("-c,--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", o.assignments, "override one key (key=value), repeatable");
    sub->add_option("-o,--output-dir", o.output_dir, "output directory (default: $RTFIM_OUTPUT_DIR or ./rtfim-out)");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("-j,--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", o.print_config, "print the resolved configuration and exit");
    sub->add_flag("-q,--quiet", o.quiet, "only log errors");
}

void print_keys(const std::string& command) {
    for (const rtfim::ConfigKey& k : rtfim::config_keys()) {
        bool used = false;
        for (const auto& c : k.commands) {
            used = used || c == "*" || c == command;
        }
        if (used) {
            std::cout << "  " << k.name << " = " << k.default_value << "\n      " << k.help << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quenches of the random-field quantum Ising chain by free-fermion mode evolution"};
    app.require_subcommand(0, 1);
    bool list_keys = false;
    app.add_flag("--list-keys", list_keys, "describe every configuration key");

    Options opts;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& name : rtfim::subcommands()) {
        const char* help = name == "static-scan" ? "ground-state tables: g_c, d, c, C_r, P_n"
                           : name == "quench"    ? "single-realization trajectory and final correlators"
                           : name == "ensemble"  ? "disorder-averaged quench grid with c and w fits"
                                                 : "free-fermion versus exact-diagonalization checks";
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, opts);
        subs.emplace_back(name, sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rtfim::kExitConfigError;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) {
            command = name;
        }
    }
    if (list_keys) {
        for (const auto& name : rtfim::subcommands()) {
            std::cout << name << ":\n";
            print_keys(name);
        }
        return 0;
    }
    if (command.empty()) {
        std::cerr << app.help();
        return rtfim::kExitConfigError;
    }
    spdlog::set_level(opts.quiet ? spdlog::level::err : spdlog::level::info);

    rtfim::RunConfig config(command);
    try {
        if (!opts.config_file.empty()) {
            config.load_file(opts.config_file);
        }
        for (const auto& a : opts.assignments) {
            config.set_assignment(a);
        }
        if (!opts.output_dir.empty()) {
            config.set("output_dir", opts.output_dir);
        }
        if (!opts.format.empty()) {
            config.set("format", opts.format);
        }
        if (!opts.seed.empty()) {
            config.set("base_seed", opts.seed);
        }
        if (opts.threads > 0) {
            config.set("threads", std::to_string(opts.threads));
        }
    } catch (const rtfim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rtfim::kExitConfigError;
    }
    if (opts.print_config) {
        std::cout << "# " << command << ", config hash " << config.hash_hex() << "\n" << config.canonical_text();
        return 0;
    }
    return rtfim::run_command(config, std::cout, std::cerr);
}
