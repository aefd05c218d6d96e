#include "rtfim/ensemble.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "rtfim/errors.hpp"
#include "rtfim/rng.hpp"

namespace rtfim {

namespace {

// Both the correlator bundle and the fidelity come from Z; when U is
// singular the fidelity falls back to ln|det U| (equal analytically) and no
// bundle is produced.
void vacuum_observables(const OverlapPair& ov, bool want_bundle, double& log_f, CorrelationBundle& bundle) {
    try {
        const PairWavefunction z = pair_wavefunction(ov);
        log_f = log_fidelity_to_kink_vacuum(z);
        if (want_bundle) {
            bundle = correlation_bundle(z);
        }
    } catch (const SingularOverlap&) {
        log_f = log_overlap_fidelity(ov);
    }
}

void check_grid_nonempty(bool empty, const char* name) {
    if (empty) {
        throw InvalidArgument(std::string("empty ") + name + " grid");
    }
}

}  // namespace

int realizations_for(int n_sites, int budget, int min_realizations) {
    if (n_sites <= 0) {
        throw InvalidArgument("realizations_for: n_sites must be positive");
    }
    const int by_budget = (budget + n_sites - 1) / n_sites;
    return std::max(min_realizations, by_budget);
}

std::uint64_t realization_seed(std::uint64_t base_seed, int n_sites, int k) {
    return stream_seed(base_seed, static_cast<std::uint64_t>(n_sites), static_cast<std::uint64_t>(k));
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) {
        return;
    }
    const int workers = std::max(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// ------------------------------------------------------------------ quench

void EnsemblePlan::validate() const {
    check_grid_nonempty(sigma_grid.empty(), "sigma");
    check_grid_nonempty(tau_q_grid.empty(), "tau_q");
    check_grid_nonempty(n_grid.empty(), "N");
    for (double s : sigma_grid) {
        if (!(s >= 0.0)) {
            throw InvalidArgument("sigma must be >= 0");
        }
    }
    for (double t : tau_q_grid) {
        if (!(t > 0.0)) {
            throw NonPositiveValue("tau_q must be positive");
        }
    }
    for (int n : n_grid) {
        ChainSpec{n, 0.0, 0}.validate();
    }
    if (threads < 1) {
        throw InvalidArgument("threads must be >= 1");
    }
    protocol.validate();
}

namespace {

RealizationRecord run_one_quench(const EnsemblePlan& plan, double sigma, double tau_q, int n, int k) {
    RealizationRecord rec;
    rec.sigma = sigma;
    rec.tau_q = tau_q;
    rec.n_sites = n;
    rec.index = k;
    rec.seed = realization_seed(plan.base_seed, n, k);

    const DisorderRealization r = sample_disorder(ChainSpec{n, sigma, rec.seed});
    QuenchProtocol p = plan.protocol;
    p.tau_q = tau_q;
    p.snapshot_fields = {p.g_final};

    try {
        const BogoliubovModes ground = solve_ground_modes(effective_fields(r, p.g_final));
        rec.d_ground = kink_density(kink_overlap(ground));

        QuenchResult q;
        rec.dt_used = p.step();
        try {
            q = run_quench(r, p);
        } catch (const NormDriftExceeded& e) {
            spdlog::warn("sigma={} tau_q={} N={} k={}: {}; retrying at dt/2", sigma, tau_q, n, k, e.what());
            p.dt = 0.5 * p.step();
            rec.dt_used = p.dt;
            rec.retried = true;
            q = run_quench(r, p);
        }
        const OverlapPair ov = kink_overlap(q.final_state.modes);
        rec.d_final = kink_density(ov);
        rec.delta_d = excess_kink_density(rec.d_final, rec.d_ground);
        rec.norm_drift = q.final_state.norm_drift;
        vacuum_observables(ov, plan.compute_bundles, rec.log_fidelity, rec.bundle);
        if (plan.keep_final_modes) {
            rec.final_modes = std::move(q.final_state.modes);
        }
        rec.ok = true;
    } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.what();
        spdlog::warn("sigma={} tau_q={} N={} k={} failed: {}", sigma, tau_q, n, k, e.what());
    }
    return rec;
}

}  // namespace

EnsembleResult run_ensemble(const EnsemblePlan& plan) {
    plan.validate();
    struct Cell {
        double sigma;
        double tau_q;
        int n;
        int count;
        std::size_t first;  // offset into the realization table
    };
    std::vector<Cell> cells;
    std::size_t total = 0;
    for (double sigma : plan.sigma_grid) {
        for (double tau : plan.tau_q_grid) {
            for (int n : plan.n_grid) {
                const int count = realizations_for(n, plan.realization_budget, plan.min_realizations);
                cells.push_back({sigma, tau, n, count, total});
                total += static_cast<std::size_t>(count);
            }
        }
    }

    // Work items: every realization, except that a clean chain (sigma = 0)
    // is computed once and replicated.
    std::vector<std::pair<std::size_t, int>> items;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const int todo = cells[c].sigma == 0.0 ? 1 : cells[c].count;
        for (int k = 0; k < todo; ++k) {
            items.emplace_back(c, k);
        }
    }

    EnsembleResult result;
    result.realizations.resize(total);
    parallel_for(static_cast<int>(items.size()), plan.threads, [&](int i) {
        const auto [c, k] = items[static_cast<std::size_t>(i)];
        const Cell& cell = cells[c];
        result.realizations[cell.first + static_cast<std::size_t>(k)] =
            run_one_quench(plan, cell.sigma, cell.tau_q, cell.n, k);
    });

    for (const Cell& cell : cells) {
        if (cell.sigma == 0.0) {
            for (int k = 1; k < cell.count; ++k) {
                RealizationRecord copy = result.realizations[cell.first];
                copy.index = k;
                copy.seed = realization_seed(plan.base_seed, cell.n, k);
                result.realizations[cell.first + static_cast<std::size_t>(k)] = std::move(copy);
            }
        }
        CellResult out;
        out.sigma = cell.sigma;
        out.tau_q = cell.tau_q;
        out.n_sites = cell.n;
        out.n_realizations = cell.count;
        std::vector<double> d, dg, dd, lf;
        std::vector<const CorrelationBundle*> bundles;
        for (int k = 0; k < cell.count; ++k) {
            const RealizationRecord& rec = result.realizations[cell.first + static_cast<std::size_t>(k)];
            if (!rec.ok) {
                ++out.n_failed;
                continue;
            }
            d.push_back(rec.d_final);
            dg.push_back(rec.d_ground);
            dd.push_back(rec.delta_d);
            lf.push_back(rec.log_fidelity);
            if (!rec.bundle.C_r.empty()) {
                bundles.push_back(&rec.bundle);
            }
        }
        out.flagged = out.n_failed > 0.01 * cell.count;
        out.d = mean_stderr(d);
        out.d_ground = mean_stderr(dg);
        out.delta_d = mean_stderr(dd);
        if (lf.size() >= 2) {
            out.fidelity = average_fidelity(lf);
        } else if (lf.size() == 1) {
            out.fidelity = {lf[0], std::exp(lf[0]), 0.0, 1};
        }
        if (!bundles.empty()) {
            out.bundle = average_bundles(bundles);
        }
        result.cells.push_back(std::move(out));
    }
    return result;
}

// ------------------------------------------------------------------ static

void StaticPlan::validate() const {
    check_grid_nonempty(sigma_grid.empty(), "sigma");
    check_grid_nonempty(g_grid.empty(), "g");
    check_grid_nonempty(n_grid.empty(), "N");
    for (double s : sigma_grid) {
        if (!(s >= 0.0)) {
            throw InvalidArgument("sigma must be >= 0");
        }
    }
    for (int n : n_grid) {
        ChainSpec{n, 0.0, 0}.validate();
    }
    if (threads < 1) {
        throw InvalidArgument("threads must be >= 1");
    }
}

StaticResult run_static_ensemble(const StaticPlan& plan) {
    plan.validate();
    struct Cell {
        double sigma;
        double g;
        int n;
        int count;
        std::size_t first;
    };
    std::vector<Cell> cells;
    std::size_t total = 0;
    for (double sigma : plan.sigma_grid) {
        for (double g : plan.g_grid) {
            for (int n : plan.n_grid) {
                const int count = realizations_for(n, plan.realization_budget, plan.min_realizations);
                cells.push_back({sigma, g, n, count, total});
                total += static_cast<std::size_t>(count);
            }
        }
    }
    std::vector<std::pair<std::size_t, int>> items;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const int todo = cells[c].sigma == 0.0 ? 1 : cells[c].count;
        for (int k = 0; k < todo; ++k) {
            items.emplace_back(c, k);
        }
    }

    StaticResult result;
    result.realizations.resize(total);
    parallel_for(static_cast<int>(items.size()), plan.threads, [&](int i) {
        const auto [c, k] = items[static_cast<std::size_t>(i)];
        const Cell& cell = cells[c];
        StaticRecord rec;
        rec.sigma = cell.sigma;
        rec.g = cell.g;
        rec.n_sites = cell.n;
        rec.index = k;
        rec.seed = realization_seed(plan.base_seed, cell.n, k);
        try {
            const DisorderRealization r = sample_disorder(ChainSpec{cell.n, cell.sigma, rec.seed});
            const BogoliubovModes modes = solve_ground_modes(effective_fields(r, cell.g));
            const OverlapPair ov = kink_overlap(modes);
            rec.d = kink_density(ov);
            vacuum_observables(ov, plan.compute_bundles, rec.log_fidelity, rec.bundle);
            rec.ok = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
        result.realizations[cell.first + static_cast<std::size_t>(k)] = std::move(rec);
    });

    for (const Cell& cell : cells) {
        if (cell.sigma == 0.0) {
            for (int k = 1; k < cell.count; ++k) {
                StaticRecord copy = result.realizations[cell.first];
                copy.index = k;
                copy.seed = realization_seed(plan.base_seed, cell.n, k);
                result.realizations[cell.first + static_cast<std::size_t>(k)] = std::move(copy);
            }
        }
        StaticCell out;
        out.sigma = cell.sigma;
        out.g = cell.g;
        out.n_sites = cell.n;
        out.n_realizations = cell.count;
        std::vector<double> d, lf;
        std::vector<const CorrelationBundle*> bundles;
        for (int k = 0; k < cell.count; ++k) {
            const StaticRecord& rec = result.realizations[cell.first + static_cast<std::size_t>(k)];
            if (!rec.ok) {
                ++out.n_failed;
                continue;
            }
            d.push_back(rec.d);
            lf.push_back(rec.log_fidelity);
            if (!rec.bundle.C_r.empty()) {
                bundles.push_back(&rec.bundle);
            }
        }
        out.flagged = out.n_failed > 0.01 * cell.count;
        out.d = mean_stderr(d);
        if (lf.size() >= 2) {
            out.fidelity = average_fidelity(lf);
        } else if (lf.size() == 1) {
            out.fidelity = {lf[0], std::exp(lf[0]), 0.0, 1};
        }
        if (!bundles.empty()) {
            out.bundle = average_bundles(bundles);
        }
        result.cells.push_back(std::move(out));
    }
    return result;
}

// -------------------------------------------------------------- reductions

MeanError mean_stderr(const std::vector<double>& x) {
    MeanError out;
    if (x.empty()) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double sum = 0.0;
    for (double v : x) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(x.size());
    if (x.size() >= 2) {
        double ss = 0.0;
        for (double v : x) {
            ss += (v - out.mean) * (v - out.mean);
        }
        const double n = static_cast<double>(x.size());
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

FidelityAverage average_fidelity(const std::vector<double>& log_fidelities) {
    if (log_fidelities.size() < 2) {
        throw InvalidArgument("average_fidelity needs at least two records");
    }
    FidelityAverage out;
    out.count = static_cast<int>(log_fidelities.size());
    const double top = *std::max_element(log_fidelities.begin(), log_fidelities.end());
    if (!std::isfinite(top)) {
        out.log_mean = top;
        out.mean = std::exp(top);
        return out;
    }
    std::vector<double> scaled;
    scaled.reserve(log_fidelities.size());
    for (double l : log_fidelities) {
        scaled.push_back(std::exp(l - top));
    }
    const MeanError m = mean_stderr(scaled);
    out.log_mean = top + std::log(m.mean);
    out.mean = std::exp(out.log_mean);
    out.std_error = std::exp(top) * m.std_error;
    return out;
}

CorrelationBundle average_bundles(const std::vector<const CorrelationBundle*>& bundles) {
    CorrelationBundle out;
    if (bundles.empty()) {
        return out;
    }
    const std::size_t n = bundles.front()->C_r.size();
    out.C_r.assign(n, 0.0);
    out.P_n.assign(n, 0.0);
    out.PP_r.assign(n, 0.0);
    for (const CorrelationBundle* b : bundles) {
        for (std::size_t i = 0; i < n; ++i) {
            out.C_r[i] += b->C_r[i];
            out.P_n[i] += b->P_n[i];
            out.PP_r[i] += b->PP_r[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(bundles.size());
    for (std::size_t i = 0; i < n; ++i) {
        out.C_r[i] *= inv;
        out.P_n[i] *= inv;
        out.PP_r[i] *= inv;
    }
    return out;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    int n = 0;
};

std::vector<FitPoint> select_tail(const std::vector<FitPoint>& series, double d, double f_threshold,
                                  double nd_threshold) {
    std::vector<FitPoint> tail;
    for (const FitPoint& p : series) {
        if (p.log_fidelity < std::log(f_threshold) && p.n_sites * d >= nd_threshold &&
            std::isfinite(p.log_fidelity)) {
            tail.push_back(p);
        }
    }
    return tail;
}

LineFit least_squares(const std::vector<FitPoint>& pts) {
    LineFit fit;
    fit.n = static_cast<int>(pts.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pts) {
        sx += p.n_sites;
        sy += p.log_fidelity;
    }
    const double mx = sx / fit.n;
    const double my = sy / fit.n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : pts) {
        sxx += (p.n_sites - mx) * (p.n_sites - mx);
        sxy += (p.n_sites - mx) * (p.log_fidelity - my);
    }
    if (sxx <= 0.0) {
        throw InsufficientTail("tail points share a single chain length");
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (const auto& p : pts) {
        const double r = p.log_fidelity - (fit.intercept + fit.slope * p.n_sites);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / fit.n);
    return fit;
}

}  // namespace

CoefficientFit fit_correlation_coefficient(const std::vector<FitPoint>& series, double d, double f_threshold,
                                           double nd_threshold) {
    if (!(d > 0.0)) {
        throw NonPositiveValue("fit_correlation_coefficient: kink density must be positive");
    }
    const std::vector<FitPoint> tail = select_tail(series, d, f_threshold, nd_threshold);
    if (tail.size() < 3) {
        throw InsufficientTail("only " + std::to_string(tail.size()) +
                               " points satisfy F < " + std::to_string(f_threshold) +
                               " and N d >= " + std::to_string(nd_threshold));
    }
    const LineFit line = least_squares(tail);
    CoefficientFit out;
    out.slope = line.slope;
    out.intercept = line.intercept;
    out.residual = line.residual;
    out.n_points = line.n;
    out.d = d;
    out.f_threshold = f_threshold;
    out.nd_threshold = nd_threshold;
    out.c = (1.0 - std::exp(line.slope)) / d;

    for (double f : {0.05, 0.1, 0.2}) {
        for (double nd : {2.0, 3.0, 4.0}) {
            const auto alt = select_tail(series, d, f, nd);
            if (alt.size() < 3) {
                continue;
            }
            try {
                const double c_alt = (1.0 - std::exp(least_squares(alt).slope)) / d;
                out.threshold_sensitivity = std::max(out.threshold_sensitivity, std::abs(c_alt - out.c));
            } catch (const InsufficientTail&) {
            }
        }
    }
    return out;
}

std::vector<LocalSlope> fit_local_slopes(const std::vector<SlopePoint>& series) {
    if (series.size() < 2) {
        throw InvalidArgument("fit_local_slopes needs at least two points");
    }
    for (const auto& p : series) {
        if (!(p.tau_q > 0.0) || !(p.delta_d > 0.0)) {
            throw NonPositiveValue("fit_local_slopes: tau_q and delta d must be positive (got tau_q=" +
                                   std::to_string(p.tau_q) + ", delta d=" + std::to_string(p.delta_d) + ")");
        }
    }
    std::vector<LocalSlope> out;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const SlopePoint& a = series[i];
        const SlopePoint& b = series[i + 1];
        const double dl = std::log(b.tau_q / a.tau_q);
        if (dl == 0.0) {
            throw InvalidArgument("fit_local_slopes: repeated tau_q");
        }
        LocalSlope s;
        s.tau_lo = a.tau_q;
        s.tau_hi = b.tau_q;
        s.w = std::log(b.delta_d / a.delta_d) / dl;
        const double ra = a.std_error / a.delta_d;
        const double rb = b.std_error / b.delta_d;
        s.error = std::sqrt(ra * ra + rb * rb) / std::abs(dl);
        out.push_back(s);
    }
    return out;
}

double kzm_length_estimate(double tau_q, double alpha) {
    const double x = alpha * tau_q;
    if (!(x > std::exp(1.0))) {
        throw InvalidArgument("kzm_length_estimate requires alpha * tau_q > e");
    }
    const double l = std::log(x);
    const double ll = std::log(l);
    return (l * l) / (ll * ll);
}

}  // namespace rtfim
