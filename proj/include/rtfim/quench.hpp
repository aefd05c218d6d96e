#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rtfim/bdg.hpp"
#include "rtfim/lattice.hpp"

namespace rtfim {

/// Uniform field that is linear in time: g(t) = g0 + slope (t - t0).
struct LinearField {
    double t0 = 0.0;
    double g0 = 0.0;
    double slope = 0.0;

    double at(double t) const { return g0 + slope * (t - t0); }
    /// Exact integral of g over [a, b].
    double integral(double a, double b) const { return (b - a) * (g0 + slope * (0.5 * (a + b) - t0)); }

    static LinearField frozen(double g) { return {0.0, g, 0.0}; }
};

/// Integration settings for evolve().
struct StepPolicy {
    double dt = 0.01;
    int order = 4;
};

/// Linear ramp g(t) = -t / tau_q from g_init down to g_final.
struct QuenchProtocol {
    double tau_q = 1.0;
    double g_init = 10.0;
    double g_final = 0.0;
    /// Base time step; 0 selects min(0.02, 0.1 / g_init).
    double dt = 0.0;
    /// Splitting order: 2 (Strang) or 4 (Yoshida composition of Strang).
    int order = 4;
    /// Fields at which snapshots are recorded, in the order traversed.
    /// Empty selects n_snapshots evenly spaced values from g_init to g_final.
    std::vector<double> snapshot_fields;
    int n_snapshots = 200;

    void validate() const;
    StepPolicy policy() const { return {step(), order}; }
    double step() const;
    double t_start() const { return -g_init * tau_q; }
    double t_end() const { return -g_final * tau_q; }
    double time_at(double g) const { return -g * tau_q; }
    LinearField field() const { return {0.0, 0.0, -1.0 / tau_q}; }
    std::vector<double> snapshots() const;
};

/// Modes evolved in the Heisenberg picture (no frequencies).
struct EvolvedModes {
    BogoliubovModes modes;
    double t_current = 0.0;
    /// Largest |(|u+|^2 + |u-|^2)/2 - 1| over modes seen so far.
    double norm_drift = 0.0;
    /// Warnings raised while preparing or integrating the state.
    std::vector<std::string> warnings;
};


/// Largest tolerated norm drift before NormDriftExceeded is thrown.
inline constexpr double kMaxNormDrift = 1e-6;

/// Ground modes at g_init; warns (in the returned state and via the log)
/// when the smallest gap is below 10 / tau_q.
EvolvedModes init_state(const DisorderRealization& r, const QuenchProtocol& p);

/// Advances the state from t_current to t_end under fields Gamma_n + g(t)
/// with a split-step integrator: exact on-site rotations of (u+_n, u-_n)
/// and exact hopping rotations of (u+_{n+1}, u-_n), composed symmetrically.
/// The interval is split into equal steps no longer than policy.dt.
/// Throws NormDriftExceeded when the norm drift exceeds kMaxNormDrift.
void evolve(EvolvedModes& state, const std::vector<double>& gamma, const LinearField& field,
            double t_end, const StepPolicy& policy);

/// Advances by one base step dt of the protocol (clamped at the end time).
EvolvedModes step(const EvolvedModes& state, const DisorderRealization& r, const QuenchProtocol& p);

/// Max deviation from unitarity of the 2N x 2N Bogoliubov matrix, measured
/// as max(|u+^dagger u+ + u-^dagger u- - 2|, |u+^T u+ - u-^T u-|) / 2.
double unitarity_error(const BogoliubovModes& modes);

struct SnapshotRecord {
    double g = 0.0;
    double t = 0.0;
    double kink_density = 0.0;
    double norm_drift = 0.0;
};

/// Called at each snapshot with the field value and the current state.
using QuenchObserver = std::function<void(double g, const EvolvedModes& state)>;

struct QuenchResult {
    EvolvedModes final_state;
    std::vector<SnapshotRecord> trajectory;
};

/// Full quench from g_init to g_final recording the kink density at every
/// snapshot field and invoking the optional observer.
QuenchResult run_quench(const DisorderRealization& r, const QuenchProtocol& p,
                        const QuenchObserver& observer = {});

}  // namespace rtfim
