#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "rtfim/config.hpp"

namespace rtfim {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 2,
    kExitNumericalFailure = 3,
    kExitVerificationFailure = 4,
};

/// One invariant of the oracle comparison.
struct CheckResult {
    std::string name;
    bool pass = false;
    /// Worst observed deviation and the tolerance it is held to.
    double worst = 0.0;
    double tolerance = 0.0;
    int samples = 0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    bool all_pass() const;
};

/// Free-fermion versus exact-diagonalization comparison. Throws
/// SizeExceeded when a requested chain is too long for the oracle.
VerifyReport run_verification(const RunConfig& config);

/// Each command writes its tables into config.output_dir() and returns the
/// paths written. `timestamp` is stamped into every file.
std::vector<std::filesystem::path> cmd_static_scan(const RunConfig& config, const std::string& timestamp);
std::vector<std::filesystem::path> cmd_quench(const RunConfig& config, const std::string& timestamp);
std::vector<std::filesystem::path> cmd_ensemble(const RunConfig& config, const std::string& timestamp);
/// Prints one PASS/FAIL line per check to `out`, writes verify.json and
/// returns the report.
VerifyReport cmd_verify(const RunConfig& config, const std::string& timestamp, std::ostream& out,
                        std::vector<std::filesystem::path>& written);

/// Runs the configured subcommand, writes run_meta.json next to the tables
/// and maps failures to exit codes: 0 success, 2 configuration error,
/// 3 numerical failure, 4 verification failure.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace rtfim
