#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rtfim/observables.hpp"
#include "rtfim/quench.hpp"

namespace rtfim {

/// Number of disorder realizations for a chain of n sites:
/// max(min_realizations, ceil(budget / n)), so that N_R * N >= budget.
int realizations_for(int n_sites, int budget = 2048, int min_realizations = 4);

/// Seed of realization k for chains of n sites. The disorder of a given
/// (N, k) is shared by every sigma and tau_q cell (common random numbers):
/// Gamma_n = sigma * z_n with the same standard normal z_n.
std::uint64_t realization_seed(std::uint64_t base_seed, int n_sites, int k);

/// Runs fn(i) for i in [0, count) on `threads` workers. Each index is
/// handled exactly once; exceptions escaping fn are rethrown after all
/// workers finish (the first by index wins).
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

// ---------------------------------------------------------------- quenches

struct EnsemblePlan {
    std::vector<double> sigma_grid;
    std::vector<double> tau_q_grid;
    std::vector<int> n_grid;
    std::uint64_t base_seed = 1;
    int realization_budget = 2048;
    int min_realizations = 4;
    /// Template protocol; tau_q is overridden per cell.
    QuenchProtocol protocol;
    /// Also compute the pair correlator bundle of every final state.
    bool compute_bundles = false;
    /// Keep the final modes of every realization (memory heavy).
    bool keep_final_modes = false;
    int threads = 1;

    void validate() const;
};

struct RealizationRecord {
    double sigma = 0.0;
    double tau_q = 0.0;
    int n_sites = 0;
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    /// Set when the realization was re-run at dt/2 after a norm-drift abort.
    bool retried = false;
    double dt_used = 0.0;
    double d_final = 0.0;
    double d_ground = 0.0;
    double delta_d = 0.0;
    double log_fidelity = 0.0;
    double norm_drift = 0.0;
    CorrelationBundle bundle;
    BogoliubovModes final_modes;
};

/// Mean of exponentially small fidelities, evaluated with a max-shifted
/// sum so that no value underflows.
struct FidelityAverage {
    double log_mean = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    int count = 0;
};

struct MeanError {
    double mean = 0.0;
    double std_error = 0.0;
};

struct CellResult {
    double sigma = 0.0;
    double tau_q = 0.0;
    int n_sites = 0;
    int n_realizations = 0;
    int n_failed = 0;
    /// More than 1% of the realizations failed.
    bool flagged = false;
    MeanError d;
    MeanError d_ground;
    MeanError delta_d;
    FidelityAverage fidelity;
    CorrelationBundle bundle;
};

struct EnsembleResult {
    std::vector<CellResult> cells;
    /// Ordered by (cell, realization index); cells ordered by (sigma, tau_q, N).
    std::vector<RealizationRecord> realizations;
};

EnsembleResult run_ensemble(const EnsemblePlan& plan);

// ------------------------------------------------------------ static scans

struct StaticPlan {
    std::vector<double> sigma_grid;
    std::vector<double> g_grid;
    std::vector<int> n_grid;
    std::uint64_t base_seed = 1;
    int realization_budget = 2048;
    int min_realizations = 4;
    bool compute_bundles = false;
    int threads = 1;

    void validate() const;
};

struct StaticRecord {
    double sigma = 0.0;
    double g = 0.0;
    int n_sites = 0;
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double d = 0.0;
    double log_fidelity = 0.0;
    CorrelationBundle bundle;
};

struct StaticCell {
    double sigma = 0.0;
    double g = 0.0;
    int n_sites = 0;
    int n_realizations = 0;
    int n_failed = 0;
    bool flagged = false;
    MeanError d;
    FidelityAverage fidelity;
    CorrelationBundle bundle;
};

struct StaticResult {
    std::vector<StaticCell> cells;
    std::vector<StaticRecord> realizations;
};

StaticResult run_static_ensemble(const StaticPlan& plan);

// -------------------------------------------------------------- reductions

MeanError mean_stderr(const std::vector<double>& x);

/// Linear-space mean of F_i = exp(log_f_i). Needs at least two values.
FidelityAverage average_fidelity(const std::vector<double>& log_fidelities);

/// Element-wise mean of correlation bundles.
CorrelationBundle average_bundles(const std::vector<const CorrelationBundle*>& bundles);

struct FitPoint {
    double n_sites = 0.0;
    double log_fidelity = 0.0;
};

struct CoefficientFit {
    double c = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of ln F about the fitted line.
    double residual = 0.0;
    int n_points = 0;
    double d = 0.0;
    double f_threshold = 0.1;
    double nd_threshold = 3.0;
    /// Largest |c' - c| when the thresholds are moved to F < {0.05, 0.2}
    /// and N d >= {2, 4} (fits with fewer than 3 points are skipped).
    double threshold_sensitivity = 0.0;
};

/// Least-squares slope m of ln F versus N over the tail (F < f_threshold and
/// N d >= nd_threshold); c = (1 - e^m) / d. Throws InsufficientTail when
/// fewer than three points qualify.
CoefficientFit fit_correlation_coefficient(const std::vector<FitPoint>& series, double d,
                                           double f_threshold = 0.1, double nd_threshold = 3.0);

struct SlopePoint {
    double tau_q = 0.0;
    double delta_d = 0.0;
    double std_error = 0.0;
};

struct LocalSlope {
    double tau_lo = 0.0;
    double tau_hi = 0.0;
    double w = 0.0;
    double error = 0.0;
};

/// w_i = d ln(delta d) / d ln(tau_q) for consecutive points, with errors
/// propagated from the standard errors. Throws NonPositiveValue.
std::vector<LocalSlope> fit_local_slopes(const std::vector<SlopePoint>& series);

/// ln^2(alpha tau) / ln^2(ln(alpha tau)); requires alpha tau > e.
double kzm_length_estimate(double tau_q, double alpha = 1.0);

}  // namespace rtfim
