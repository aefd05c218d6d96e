#include "rtfim/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "rtfim/ed.hpp"
#include "rtfim/ensemble.hpp"
#include "rtfim/errors.hpp"
#include "rtfim/lattice.hpp"
#include "rtfim/observables.hpp"
#include "rtfim/quench.hpp"
#include "rtfim/rng.hpp"
#include "rtfim/table.hpp"

namespace rtfim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long long ll(int x) { return static_cast<long long>(x); }

std::string seed_text(std::uint64_t seed) { return std::to_string(seed); }

/// Uniform double in [0, 1) from a 64-bit key.
double unit_uniform(std::uint64_t key) { return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53; }

class Writer {
public:
    Writer(const RunConfig& config, const std::string& timestamp)
        : dir_(config.output_dir()), format_(config.format()), meta_(TableMeta::from(config, timestamp)) {}

    void operator()(const Table& t) { written_.push_back(write_table(t, meta_, dir_, format_)); }

    std::vector<std::filesystem::path> files() const { return written_; }

private:
    std::filesystem::path dir_;
    OutputFormat format_;
    TableMeta meta_;
    std::vector<std::filesystem::path> written_;
};

std::vector<double> sorted_unique(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

/// Fit row values: c, slope, intercept, residual, n_points, sensitivity, status.
std::vector<TableValue> coefficient_columns(const std::vector<FitPoint>& points, double d, double f_threshold,
                                            double nd_threshold) {
    try {
        const CoefficientFit fit = fit_correlation_coefficient(points, d, f_threshold, nd_threshold);
        return {fit.c, fit.slope, fit.intercept, fit.residual, ll(fit.n_points), fit.threshold_sensitivity,
                std::string("ok")};
    } catch (const InsufficientTail&) {
        return {kNaN, kNaN, kNaN, kNaN, 0LL, kNaN, std::string("insufficient_tail")};
    } catch (const NonPositiveValue&) {
        return {kNaN, kNaN, kNaN, kNaN, 0LL, kNaN, std::string("nonpositive_d")};
    }
}

const std::vector<std::string> kCoefficientColumns = {"c",        "slope",    "intercept",
                                                      "residual", "n_points", "threshold_sensitivity",
                                                      "status"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

// ------------------------------------------------------------- static-scan

std::vector<std::filesystem::path> cmd_static_scan(const RunConfig& config, const std::string& timestamp) {
    Writer write(config, timestamp);
    const StaticPlan plan = config.static_plan();
    plan.validate();
    const double f_threshold = config.get_double("f_threshold");
    const double nd_threshold = config.get_double("nd_threshold");
    const std::vector<double> gc_sigma = config.get_doubles("gc_sigma");
    const std::vector<double> bundle_g = config.get_doubles("bundle_g");

    Table gc("critical_field", {"sigma", "g_c", "has_root"});
    for (double s : gc_sigma) {
        const auto root = critical_field(s);
        gc.add_row({s, root ? *root : kNaN, ll(root.has_value())});
    }
    write(gc);

    const StaticResult scan = run_static_ensemble(plan);
    Table density("kink_density", {"sigma", "g", "n_sites", "n_realizations", "n_failed", "flagged", "d_mean",
                                   "d_stderr", "log_f_mean", "f_mean", "f_stderr"});
    for (const StaticCell& c : scan.cells) {
        density.add_row({c.sigma, c.g, ll(c.n_sites), ll(c.n_realizations), ll(c.n_failed), ll(c.flagged),
                         c.d.mean, c.d.std_error, c.fidelity.log_mean, c.fidelity.mean, c.fidelity.std_error});
    }
    write(density);

    // c(g, sigma): ln F against N, with d taken from the longest chain.
    const int n_max = *std::max_element(plan.n_grid.begin(), plan.n_grid.end());
    Table coeff("coefficient", concat({"sigma", "g", "d"}, kCoefficientColumns));
    for (double s : plan.sigma_grid) {
        for (double g : plan.g_grid) {
            std::vector<FitPoint> points;
            double d = kNaN;
            for (const StaticCell& c : scan.cells) {
                if (c.sigma == s && c.g == g && c.fidelity.count > 0) {
                    points.push_back({static_cast<double>(c.n_sites), c.fidelity.log_mean});
                    if (c.n_sites == n_max) {
                        d = c.d.mean;
                    }
                }
            }
            std::vector<TableValue> row = {s, g, d};
            const auto fit = coefficient_columns(points, std::isnan(d) ? 0.0 : d, f_threshold, nd_threshold);
            row.insert(row.end(), fit.begin(), fit.end());
            coeff.add_row(std::move(row));
        }
    }
    write(coeff);

    // Pair correlators on the longest chain: C_r and PP_r averaged over
    // realizations, P_n of the first realization (a single localization
    // pattern; the average is featureless).
    StaticPlan bundle_plan = plan;
    bundle_plan.g_grid = bundle_g;
    bundle_plan.n_grid = {n_max};
    bundle_plan.compute_bundles = true;
    const StaticResult bundles = run_static_ensemble(bundle_plan);
    Table corr("correlator", {"sigma", "g", "n_sites", "r", "C_r", "PP_r"});
    Table prob("kink_probability", {"sigma", "g", "n_sites", "realization", "site", "P_n"});
    for (const StaticCell& c : bundles.cells) {
        for (std::size_t r = 0; r < c.bundle.C_r.size(); ++r) {
            corr.add_row({c.sigma, c.g, ll(c.n_sites), static_cast<long long>(r), c.bundle.C_r[r], c.bundle.PP_r[r]});
        }
    }
    for (const StaticRecord& rec : bundles.realizations) {
        if (rec.index != 0 || !rec.ok) {
            continue;
        }
        for (std::size_t n = 0; n < rec.bundle.P_n.size(); ++n) {
            prob.add_row({rec.sigma, rec.g, ll(rec.n_sites), 0LL, static_cast<long long>(n), rec.bundle.P_n[n]});
        }
    }
    write(corr);
    write(prob);
    return write.files();
}

// ------------------------------------------------------------------ quench

std::vector<std::filesystem::path> cmd_quench(const RunConfig& config, const std::string& timestamp) {
    Writer write(config, timestamp);
    const double sigma = config.get_double("quench_sigma");
    const int n = config.get_int("quench_n");
    const int k = config.get_int("realization");
    const int zz_max = config.get_int("zz_max_r");
    if (k < 0) {
        throw ConfigError("realization must be >= 0");
    }
    if (zz_max < 0 || zz_max >= n) {
        throw ConfigError("zz_max_r must lie in [0, quench_n)");
    }
    const QuenchProtocol p = config.protocol();
    p.validate();
    const std::uint64_t seed = realization_seed(config.base_seed(), n, k);
    const DisorderRealization r = sample_disorder(ChainSpec{n, sigma, seed});

    const QuenchResult q = run_quench(r, p);
    Table traj("trajectory", {"g", "t", "kink_density", "norm_drift"});
    for (const SnapshotRecord& s : q.trajectory) {
        traj.add_row({s.g, s.t, s.kink_density, s.norm_drift});
    }
    write(traj);

    const BogoliubovModes ground = solve_ground_modes(effective_fields(r, p.g_final));
    const double d_ground = kink_density(kink_overlap(ground));
    const OverlapPair ov = kink_overlap(q.final_state.modes);
    const double d_final = kink_density(ov);
    const PairWavefunction z = pair_wavefunction(ov);
    const CorrelationBundle bundle = correlation_bundle(z);

    Table summary("summary", {"sigma", "tau_q", "n_sites", "realization", "seed", "dt", "order", "d_final",
                              "d_ground", "delta_d", "log_fidelity", "norm_drift", "unitarity_error"});
    summary.add_row({sigma, p.tau_q, ll(n), ll(k), seed_text(seed), p.step(), ll(p.order), d_final, d_ground,
                     excess_kink_density(d_final, d_ground), log_fidelity_to_kink_vacuum(z),
                     q.final_state.norm_drift, unitarity_error(q.final_state.modes)});
    write(summary);

    Table corr("correlator", {"r", "C_r", "PP_r"});
    for (std::size_t i = 0; i < bundle.C_r.size(); ++i) {
        corr.add_row({static_cast<long long>(i), bundle.C_r[i], bundle.PP_r[i]});
    }
    write(corr);
    Table prob("kink_probability", {"site", "P_n"});
    for (std::size_t i = 0; i < bundle.P_n.size(); ++i) {
        prob.add_row({static_cast<long long>(i), bundle.P_n[i]});
    }
    write(prob);

    if (zz_max > 0) {
        Table zz("zz_correlator", {"R", "zz"});
        for (int R = 1; R <= zz_max; ++R) {
            zz.add_row({ll(R), zz_correlator(q.final_state.modes, 0, R)});
        }
        write(zz);
    }
    return write.files();
}

// ---------------------------------------------------------------- ensemble

std::vector<std::filesystem::path> cmd_ensemble(const RunConfig& config, const std::string& timestamp) {
    Writer write(config, timestamp);
    const EnsemblePlan plan = config.ensemble_plan();
    plan.validate();
    const double f_threshold = config.get_double("f_threshold");
    const double nd_threshold = config.get_double("nd_threshold");
    const double alpha = config.get_double("kzm_alpha");

    const EnsembleResult res = run_ensemble(plan);

    Table cells("cells", {"sigma", "tau_q", "n_sites", "n_realizations", "n_failed", "flagged", "d_mean",
                          "d_stderr", "d_ground_mean", "d_ground_stderr", "delta_d_mean", "delta_d_stderr",
                          "log_f_mean", "f_mean", "f_stderr"});
    for (const CellResult& c : res.cells) {
        cells.add_row({c.sigma, c.tau_q, ll(c.n_sites), ll(c.n_realizations), ll(c.n_failed), ll(c.flagged),
                       c.d.mean, c.d.std_error, c.d_ground.mean, c.d_ground.std_error, c.delta_d.mean,
                       c.delta_d.std_error, c.fidelity.log_mean, c.fidelity.mean, c.fidelity.std_error});
    }
    write(cells);

    Table reals("realizations", {"sigma", "tau_q", "n_sites", "index", "seed", "ok", "retried", "dt", "d_final",
                                 "d_ground", "delta_d", "log_fidelity", "norm_drift", "error"});
    for (const RealizationRecord& r : res.realizations) {
        reals.add_row({r.sigma, r.tau_q, ll(r.n_sites), ll(r.index), seed_text(r.seed), ll(r.ok), ll(r.retried),
                       r.dt_used, r.d_final, r.d_ground, r.delta_d, r.log_fidelity, r.norm_drift, r.error});
    }
    write(reals);

    const std::vector<double> sigmas = sorted_unique(plan.sigma_grid);
    const std::vector<double> taus = sorted_unique(plan.tau_q_grid);
    std::vector<int> ns = plan.n_grid;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    auto cell_at = [&](double s, double tau, int n) -> const CellResult* {
        for (const CellResult& c : res.cells) {
            if (c.sigma == s && c.tau_q == tau && c.n_sites == n) {
                return &c;
            }
        }
        return nullptr;
    };

    Table coeff("coefficient", concat({"sigma", "tau_q", "d"}, kCoefficientColumns));
    for (double s : sigmas) {
        for (double tau : taus) {
            std::vector<FitPoint> points;
            for (int n : ns) {
                const CellResult* c = cell_at(s, tau, n);
                if (c != nullptr && c->fidelity.count > 0) {
                    points.push_back({static_cast<double>(n), c->fidelity.log_mean});
                }
            }
            const CellResult* longest = cell_at(s, tau, ns.back());
            const double d = longest != nullptr ? longest->d.mean : kNaN;
            std::vector<TableValue> row = {s, tau, d};
            const auto fit = coefficient_columns(points, std::isnan(d) ? 0.0 : d, f_threshold, nd_threshold);
            row.insert(row.end(), fit.begin(), fit.end());
            coeff.add_row(std::move(row));
        }
    }
    write(coeff);

    Table slopes("local_slopes", {"sigma", "n_sites", "tau_lo", "tau_hi", "w", "w_error", "status"});
    Table kzm("kzm_length", {"sigma", "n_sites", "tau_q", "inv_delta_d", "xi_hat"});
    for (double s : sigmas) {
        for (int n : ns) {
            std::vector<SlopePoint> series;
            for (double tau : taus) {
                const CellResult* c = cell_at(s, tau, n);
                if (c == nullptr) {
                    continue;
                }
                series.push_back({tau, c->delta_d.mean, c->delta_d.std_error});
                const double xi = alpha * tau > std::numbers::e ? kzm_length_estimate(tau, alpha) : kNaN;
                kzm.add_row({s, ll(n), tau, 1.0 / c->delta_d.mean, xi});
            }
            if (series.size() < 2) {
                continue;
            }
            try {
                for (const LocalSlope& w : fit_local_slopes(series)) {
                    slopes.add_row({s, ll(n), w.tau_lo, w.tau_hi, w.w, w.error, std::string("ok")});
                }
            } catch (const NonPositiveValue&) {
                slopes.add_row({s, ll(n), kNaN, kNaN, kNaN, kNaN, std::string("nonpositive_delta_d")});
            }
        }
    }
    write(slopes);
    write(kzm);

    if (plan.compute_bundles) {
        Table corr("correlator", {"sigma", "tau_q", "n_sites", "r", "C_r", "P_n", "PP_r"});
        for (const CellResult& c : res.cells) {
            for (std::size_t r = 0; r < c.bundle.C_r.size(); ++r) {
                corr.add_row({c.sigma, c.tau_q, ll(c.n_sites), static_cast<long long>(r), c.bundle.C_r[r],
                              c.bundle.P_n[r], c.bundle.PP_r[r]});
            }
        }
        write(corr);
    }
    return write.files();
}

// ------------------------------------------------------------------ verify

bool VerifyReport::all_pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

struct Tracker {
    CheckResult result;

    Tracker(std::string name, double tolerance) {
        result.name = std::move(name);
        result.tolerance = tolerance;
    }
    void add(double deviation) {
        // NaN counts as a failure.
        if (!(deviation <= result.worst)) {
            result.worst = std::isnan(deviation) ? std::numeric_limits<double>::infinity() : deviation;
        }
        ++result.samples;
    }
    CheckResult done() {
        result.pass = result.samples > 0 && result.worst <= result.tolerance;
        return result;
    }
};

}  // namespace

VerifyReport run_verification(const RunConfig& config) {
    const std::vector<int> ns = config.get_ints("verify_n");
    const int draws = config.get_int("verify_draws");
    const double g_max = config.get_double("verify_g_max");
    const std::vector<double> sigmas = config.get_doubles("verify_sigma");
    const int dyn_n = config.get_int("verify_dynamic_n");
    const double dyn_tau = config.get_double("verify_dynamic_tau_q");
    const double ed_dt = config.get_double("verify_ed_dt");
    const std::uint64_t base = config.base_seed();

    if (ns.empty() || sigmas.empty() || draws < 1) {
        throw ConfigError("verify needs chain lengths, disorder strengths and at least one draw");
    }
    for (int n : ns) {
        if (n > kMaxExactSites) {
            throw SizeExceeded("verify_n = " + std::to_string(n) + " exceeds the exact-diagonalization limit of " +
                               std::to_string(kMaxExactSites));
        }
        ChainSpec{n, 0.0, 0}.validate();
    }
    if (dyn_n > kMaxExactEvolveSites) {
        throw SizeExceeded("verify_dynamic_n = " + std::to_string(dyn_n) +
                           " exceeds the exact-evolution limit of " + std::to_string(kMaxExactEvolveSites));
    }
    ChainSpec{dyn_n, 0.0, 0}.validate();

    Tracker energy("ground_energy", 1e-9);
    Tracker density("kink_density", 1e-9);
    Tracker fidelity("fidelity", 1e-8);
    Tracker zz("zz_correlator", 1e-9);
    Tracker series("bcs_series_vs_determinant", 1e-10);
    Tracker gauge("mode_phase_gauge", 1e-10);
    Tracker dynamic("dynamic_kink_density", 1e-4);

    for (int n : ns) {
        for (int k = 0; k < draws; ++k) {
            const std::uint64_t seed = realization_seed(base, n, k);
            const double g = g_max * unit_uniform(seed ^ 0x9e3779b97f4a7c15ULL);
            const auto pick = static_cast<std::size_t>(unit_uniform(seed ^ 0xd1b54a32d192ed03ULL) *
                                                       static_cast<double>(sigmas.size()));
            const double sigma = sigmas[std::min(pick, sigmas.size() - 1)];
            const FieldProfile f = effective_fields(sample_disorder(ChainSpec{n, sigma, seed}), g);

            const BogoliubovModes modes = solve_ground_modes(f);
            const SpinState exact = exact_ground_state(f);
            const OverlapPair ov = kink_overlap(modes);
            const PairWavefunction z = pair_wavefunction(ov);
            const double d = kink_density(ov);
            const double log_f = log_fidelity_to_kink_vacuum(z);

            energy.add(std::abs(ground_energy(modes) - exact_energy(exact, f)));
            density.add(std::abs(d - exact_kink_density(exact)));
            fidelity.add(std::abs(std::exp(log_f) - exact_fidelity(exact)));
            for (int r = 1; r < n; ++r) {
                zz.add(std::abs(zz_correlator(modes, 0, r) - exact_zz(exact, 0, r)));
            }
            if (n <= 6) {
                series.add(std::abs(1.0 / bcs_series_inverse_fidelity(z) - std::exp(log_f)));
            }

            std::vector<double> angles(static_cast<std::size_t>(n));
            for (int m = 0; m < n; ++m) {
                angles[static_cast<std::size_t>(m)] =
                    2.0 * std::numbers::pi * unit_uniform(stream_seed(seed, 0x6a09e667ULL, static_cast<std::uint64_t>(m)));
            }
            const BogoliubovModes rotated = with_mode_phases(modes, angles);
            const OverlapPair ov2 = kink_overlap(rotated);
            gauge.add(std::abs(kink_density(ov2) - d));
            gauge.add(std::abs(log_fidelity_to_kink_vacuum(pair_wavefunction(ov2)) - log_f));
            gauge.add(std::abs(zz_correlator(rotated, 0, n / 2) - zz_correlator(modes, 0, n / 2)));
        }
    }

    for (double sigma : sorted_unique(sigmas)) {
        QuenchProtocol p;
        p.tau_q = dyn_tau;
        p.snapshot_fields = {p.g_final};
        const DisorderRealization r = sample_disorder(ChainSpec{dyn_n, sigma, realization_seed(base, dyn_n, 0)});
        const QuenchResult q = run_quench(r, p);
        const SpinState psi = exact_quench(r, p, ed_dt);
        dynamic.add(std::abs(kink_density(kink_overlap(q.final_state.modes)) - exact_kink_density(psi)));
    }

    VerifyReport report;
    for (Tracker* t : {&energy, &density, &fidelity, &zz, &series, &gauge, &dynamic}) {
        report.checks.push_back(t->done());
    }
    return report;
}

VerifyReport cmd_verify(const RunConfig& config, const std::string& timestamp, std::ostream& out,
                        std::vector<std::filesystem::path>& written) {
    const VerifyReport report = run_verification(config);
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = config.command();
    j["config_hash"] = config.hash_hex();
    j["base_seed"] = config.base_seed();
    j["build"] = build_id();
    j["timestamp"] = timestamp;
    auto checks = nlohmann::ordered_json::array();
    for (const CheckResult& c : report.checks) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s %s: worst %.3g (tolerance %.1g, %d samples)\n",
                      c.pass ? "PASS" : "FAIL", c.name.c_str(), c.worst, c.tolerance, c.samples);
        out << line;
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"worst", std::isfinite(c.worst) ? nlohmann::ordered_json(c.worst)
                                                           : nlohmann::ordered_json(format_double(c.worst))},
                          {"tolerance", c.tolerance},
                          {"samples", c.samples}});
    }
    j["checks"] = std::move(checks);
    j["all_pass"] = report.all_pass();

    const auto dir = config.output_dir();
    std::filesystem::create_directories(dir);
    const auto path = dir / "verify.json";
    std::ofstream(path, std::ios::binary) << j.dump(1) << "\n";
    written.push_back(path);
    return report;
}

// -------------------------------------------------------------- dispatcher

namespace {

void write_run_meta(const RunConfig& config, const std::string& timestamp, int exit_code,
                    const std::vector<std::filesystem::path>& files, const std::string& error) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = config.command();
    j["config_hash"] = config.hash_hex();
    j["base_seed"] = config.base_seed();
    j["build"] = build_id();
    j["rng"] = std::string(kRngName) + "/v" + std::to_string(kRngVersion);
    j["timestamp"] = timestamp;
    j["config"] = config.values();
    j["config_text"] = config.canonical_text();
    auto names = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        names.push_back(f.filename().string());
    }
    j["files"] = std::move(names);
    j["exit_code"] = exit_code;
    if (!error.empty()) {
        j["error"] = error;
    }
    const auto dir = config.output_dir();
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "run_meta.json", std::ios::binary) << j.dump(1) << "\n";
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const std::string timestamp = utc_timestamp();
    std::vector<std::filesystem::path> files;
    int code = kExitOk;
    std::string error;
    try {
        // Surface malformed keys before any work starts.
        config.format();
        config.base_seed();
        if (config.threads() < 1) {
            throw ConfigError("threads must be >= 1");
        }
        const std::string& cmd = config.command();
        if (cmd == "static-scan") {
            files = cmd_static_scan(config, timestamp);
        } else if (cmd == "quench") {
            files = cmd_quench(config, timestamp);
        } else if (cmd == "ensemble") {
            files = cmd_ensemble(config, timestamp);
        } else {
            const VerifyReport report = cmd_verify(config, timestamp, out, files);
            code = report.all_pass() ? kExitOk : kExitVerificationFailure;
        }
    } catch (const InvalidArgument& e) {
        code = kExitConfigError;
        error = e.what();
    } catch (const NumericalFailure& e) {
        code = kExitNumericalFailure;
        error = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        code = kExitConfigError;
        error = e.what();
    }
    if (!error.empty()) {
        err << "error: " << error << "\n";
    }
    try {
        write_run_meta(config, timestamp, code, files, error);
    } catch (const std::exception& e) {
        err << "error: cannot write run_meta.json: " << e.what() << "\n";
        if (code == kExitOk) {
            code = kExitConfigError;
        }
    }
    for (const auto& f : files) {
        out << "wrote " << f.string() << "\n";
    }
    return code;
}

}  // namespace rtfim
