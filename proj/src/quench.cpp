#include "rtfim/quench.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtfim/errors.hpp"
#include "rtfim/observables.hpp"

namespace rtfim {

namespace {

// Modes per SIMD block; the kernel is written for this fixed width so the
// inner loops vectorise.
constexpr int kLanes = 16;

// Yoshida triple-jump weights for the fourth-order composition.
const double kYoshidaW1 = 1.0 / (2.0 - std::cbrt(2.0));
const double kYoshidaW0 = -std::cbrt(2.0) / (2.0 - std::cbrt(2.0));

// One operator-splitting schedule for an interval: kicks[0..S] interleaved
// with hops[0..S-1]. Kick k rotates (u+_n, u-_n) by 2(Gamma_n L_k + int g);
// hop k rotates (u+_{n+1}, u-_n) by 2 w h.
struct Schedule {
    int n_hops = 0;
    // Kick k uses Gamma table kick_type[k]; the uniform part is (cos, sin).
    std::vector<int> kick_type;
    std::vector<double> kick_cos;
    std::vector<double> kick_sin;
    // Hop k uses hop table hop_type[k].
    std::vector<int> hop_type;
    // Per kick type: cos/sin of 2 Gamma_n L for every site.
    std::vector<std::vector<double>> gamma_cos;
    std::vector<std::vector<double>> gamma_sin;
    // Per hop type: cos/sin of 2 w h.
    std::vector<double> hop_cos;
    std::vector<double> hop_sin;
};

Schedule build_schedule(const std::vector<double>& gamma, const LinearField& field, double t0,
                        double h, int n_steps, int order) {
    std::vector<double> weights;
    if (order == 2) {
        weights = {1.0};
    } else if (order == 4) {
        weights = {kYoshidaW1, kYoshidaW0, kYoshidaW1};
    } else {
        throw InvalidArgument("integrator order must be 2 or 4");
    }
    const int per_step = static_cast<int>(weights.size());
    Schedule s;
    s.n_hops = n_steps * per_step;

    // Distinct kick lengths in units of h: the first and last kicks are
    // half a substep; interior kicks merge the halves of adjacent substeps.
    std::vector<double> kick_lengths;
    auto kick_type_of = [&](double len) {
        for (std::size_t i = 0; i < kick_lengths.size(); ++i) {
            if (kick_lengths[i] == len) {
                return static_cast<int>(i);
            }
        }
        kick_lengths.push_back(len);
        return static_cast<int>(kick_lengths.size() - 1);
    };
    std::vector<double> hop_weights;
    auto hop_type_of = [&](double w) {
        for (std::size_t i = 0; i < hop_weights.size(); ++i) {
            if (hop_weights[i] == w) {
                return static_cast<int>(i);
            }
        }
        hop_weights.push_back(w);
        return static_cast<int>(hop_weights.size() - 1);
    };

    s.kick_type.reserve(static_cast<std::size_t>(s.n_hops + 1));
    s.kick_cos.reserve(static_cast<std::size_t>(s.n_hops + 1));
    s.kick_sin.reserve(static_cast<std::size_t>(s.n_hops + 1));
    s.hop_type.reserve(static_cast<std::size_t>(s.n_hops));

    auto add_kick = [&](double a, double len_units) {
        const double b = a + len_units * h;
        const double angle = 2.0 * field.integral(a, b);
        s.kick_type.push_back(kick_type_of(len_units));
        s.kick_cos.push_back(std::cos(angle));
        s.kick_sin.push_back(std::sin(angle));
    };

    // Substep j of step i starts at t0 + h (i + sum of previous weights).
    double prev_w = 0.0;
    for (int i = 0; i < n_steps; ++i) {
        double offset = 0.0;
        for (int j = 0; j < per_step; ++j) {
            const double w = weights[static_cast<std::size_t>(j)];
            const double start = t0 + h * (static_cast<double>(i) + offset);
            // kick spanning the second half of the previous substep and the
            // first half of this one
            add_kick(start - 0.5 * prev_w * h, 0.5 * (prev_w + w));
            s.hop_type.push_back(hop_type_of(w));
            offset += w;
            prev_w = w;
        }
    }
    const double t_last = t0 + h * static_cast<double>(n_steps);
    add_kick(t_last - 0.5 * prev_w * h, 0.5 * prev_w);

    const std::size_t n = gamma.size();
    s.gamma_cos.assign(kick_lengths.size(), std::vector<double>(n));
    s.gamma_sin.assign(kick_lengths.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < kick_lengths.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const double angle = 2.0 * gamma[i] * kick_lengths[k] * h;
            s.gamma_cos[k][i] = std::cos(angle);
            s.gamma_sin[k][i] = std::sin(angle);
        }
    }
    for (double w : hop_weights) {
        s.hop_cos.push_back(std::cos(2.0 * w * h));
        s.hop_sin.push_back(std::sin(2.0 * w * h));
    }
    return s;
}

// Structure-of-arrays storage for one block of kLanes modes:
// index [site * kLanes + lane].
struct Block {
    std::vector<double> pr, pi, qr, qi;
    explicit Block(int n)
        : pr(static_cast<std::size_t>(n) * kLanes, 0.0),
          pi(static_cast<std::size_t>(n) * kLanes, 0.0),
          qr(static_cast<std::size_t>(n) * kLanes, 0.0),
          qi(static_cast<std::size_t>(n) * kLanes, 0.0) {}
};

inline void kick_site(double* __restrict pr, double* __restrict pi, double* __restrict qr,
                      double* __restrict qi, double c, double s) {
    // u+' = c u+ - i s u-,  u-' = c u- - i s u+
#pragma GCC ivdep
    for (int j = 0; j < kLanes; ++j) {
        const double a = pr[j], b = pi[j], x = qr[j], y = qi[j];
        pr[j] = c * a + s * y;
        pi[j] = c * b - s * x;
        qr[j] = c * x + s * b;
        qi[j] = c * y - s * a;
    }
}

inline void hop_pair(double* __restrict pr, double* __restrict pi, double* __restrict qr,
                     double* __restrict qi, double c, double s) {
    // u+' = c u+ + i s u-,  u-' = c u- + i s u+
#pragma GCC ivdep
    for (int j = 0; j < kLanes; ++j) {
        const double a = pr[j], b = pi[j], x = qr[j], y = qi[j];
        pr[j] = c * a - s * y;
        pi[j] = c * b + s * x;
        qr[j] = c * x - s * b;
        qi[j] = c * y + s * a;
    }
}

void kick_all(Block& blk, int n, const Schedule& s, int k) {
    const auto& gc = s.gamma_cos[static_cast<std::size_t>(s.kick_type[static_cast<std::size_t>(k)])];
    const auto& gs = s.gamma_sin[static_cast<std::size_t>(s.kick_type[static_cast<std::size_t>(k)])];
    const double ca = s.kick_cos[static_cast<std::size_t>(k)];
    const double sa = s.kick_sin[static_cast<std::size_t>(k)];
    for (int site = 0; site < n; ++site) {
        const std::size_t o = static_cast<std::size_t>(site) * kLanes;
        const double c = gc[static_cast<std::size_t>(site)] * ca - gs[static_cast<std::size_t>(site)] * sa;
        const double sn = gs[static_cast<std::size_t>(site)] * ca + gc[static_cast<std::size_t>(site)] * sa;
        kick_site(&blk.pr[o], &blk.pi[o], &blk.qr[o], &blk.qi[o], c, sn);
    }
}

// Kick k followed by hop k in a single sweep over the sites.
void kick_hop(Block& blk, int n, const Schedule& s, int k) {
    const auto& gc = s.gamma_cos[static_cast<std::size_t>(s.kick_type[static_cast<std::size_t>(k)])];
    const auto& gs = s.gamma_sin[static_cast<std::size_t>(s.kick_type[static_cast<std::size_t>(k)])];
    const double ca = s.kick_cos[static_cast<std::size_t>(k)];
    const double sa = s.kick_sin[static_cast<std::size_t>(k)];
    const int ht = s.hop_type[static_cast<std::size_t>(k)];
    const double hc = s.hop_cos[static_cast<std::size_t>(ht)];
    const double hs = s.hop_sin[static_cast<std::size_t>(ht)];
    double* __restrict pr = blk.pr.data();
    double* __restrict pi = blk.pi.data();
    double* __restrict qr = blk.qr.data();
    double* __restrict qi = blk.qi.data();

    auto kick = [&](int site) {
        const std::size_t o = static_cast<std::size_t>(site) * kLanes;
        const double c = gc[static_cast<std::size_t>(site)] * ca - gs[static_cast<std::size_t>(site)] * sa;
        const double sn = gs[static_cast<std::size_t>(site)] * ca + gc[static_cast<std::size_t>(site)] * sa;
        kick_site(pr + o, pi + o, qr + o, qi + o, c, sn);
    };

    kick(0);
    for (int site = 0; site + 1 < n; ++site) {
        kick(site + 1);
        // pair (u+_{site+1}, u-_site)
        const std::size_t op = static_cast<std::size_t>(site + 1) * kLanes;
        const std::size_t oq = static_cast<std::size_t>(site) * kLanes;
        hop_pair(pr + op, pi + op, qr + oq, qi + oq, hc, hs);
    }
    // antiperiodic pair (u+_1, u-_N) couples with the opposite sign
    const std::size_t oq = static_cast<std::size_t>(n - 1) * kLanes;
    hop_pair(pr, pi, qr + oq, qi + oq, hc, -hs);
}

void run_block(Block& blk, int n, const Schedule& s) {
    for (int k = 0; k < s.n_hops; ++k) {
        kick_hop(blk, n, s, k);
    }
    kick_all(blk, n, s, s.n_hops);
}

}  // namespace

void QuenchProtocol::validate() const {
    if (!(tau_q > 0.0) || !std::isfinite(tau_q)) {
        throw NonPositiveValue("tau_q must be positive");
    }
    if (!(g_init > g_final)) {
        throw InvalidArgument("g_init must exceed g_final (the ramp lowers the field)");
    }
    if (dt < 0.0) {
        throw InvalidArgument("dt must be >= 0 (0 selects the default)");
    }
    if (order != 2 && order != 4) {
        throw InvalidArgument("integrator order must be 2 or 4");
    }
    if (snapshot_fields.empty() && n_snapshots < 2) {
        throw InvalidArgument("n_snapshots must be at least 2");
    }
    for (std::size_t i = 0; i < snapshot_fields.size(); ++i) {
        const double g = snapshot_fields[i];
        if (g > g_init || g < g_final) {
            throw InvalidArgument("snapshot field outside [g_final, g_init]");
        }
        if (i > 0 && g > snapshot_fields[i - 1]) {
            throw InvalidArgument("snapshot fields must be listed in decreasing order");
        }
    }
}

double QuenchProtocol::step() const {
    return dt > 0.0 ? dt : std::min(0.02, 0.1 / std::abs(g_init));
}

std::vector<double> QuenchProtocol::snapshots() const {
    if (!snapshot_fields.empty()) {
        return snapshot_fields;
    }
    std::vector<double> g(static_cast<std::size_t>(n_snapshots));
    for (int k = 0; k < n_snapshots; ++k) {
        g[static_cast<std::size_t>(k)] = g_init + (g_final - g_init) * k / (n_snapshots - 1);
    }
    g.back() = g_final;
    return g;
}

EvolvedModes init_state(const DisorderRealization& r, const QuenchProtocol& p) {
    p.validate();
    EvolvedModes state;
    state.modes = solve_ground_modes(effective_fields(r, p.g_init));
    state.t_current = p.t_start();
    double gap = 0.0;
    if (state.modes.omega && !state.modes.omega->empty()) {
        gap = std::abs(state.modes.omega->front());
    }
    if (gap < 10.0 / p.tau_q) {
        const std::string msg = "initial gap " + std::to_string(gap) + " is below 10/tau_q = " +
                                std::to_string(10.0 / p.tau_q) + "; the start is not adiabatic";
        spdlog::warn("{}", msg);
        state.warnings.push_back(msg);
    }
    state.modes.omega.reset();
    return state;
}

void evolve(EvolvedModes& state, const std::vector<double>& gamma, const LinearField& field,
            double t_end, const StepPolicy& policy) {
    const int n = state.modes.n_sites;
    if (static_cast<int>(gamma.size()) != n) {
        throw InvalidArgument("evolve: gamma has the wrong length");
    }
    if (!(policy.dt > 0.0)) {
        throw NonPositiveValue("evolve: dt must be positive");
    }
    const double total = t_end - state.t_current;
    if (total <= 0.0) {
        return;
    }
    const int n_steps = std::max(1, static_cast<int>(std::ceil(total / policy.dt - 1e-9)));
    const double h = total / n_steps;
    const Schedule sched = build_schedule(gamma, field, state.t_current, h, n_steps, policy.order);

    const CMatrix p = state.modes.u + state.modes.v;
    const CMatrix q = state.modes.u - state.modes.v;
    CMatrix p_out(n, n);
    CMatrix q_out(n, n);
    const int n_modes = static_cast<int>(p.cols());
    Block blk(n);
    for (int first = 0; first < n_modes; first += kLanes) {
        const int width = std::min(kLanes, n_modes - first);
        std::fill(blk.pr.begin(), blk.pr.end(), 0.0);
        std::fill(blk.pi.begin(), blk.pi.end(), 0.0);
        std::fill(blk.qr.begin(), blk.qr.end(), 0.0);
        std::fill(blk.qi.begin(), blk.qi.end(), 0.0);
        for (int j = 0; j < width; ++j) {
            for (int site = 0; site < n; ++site) {
                const std::size_t o = static_cast<std::size_t>(site) * kLanes + static_cast<std::size_t>(j);
                blk.pr[o] = p(site, first + j).real();
                blk.pi[o] = p(site, first + j).imag();
                blk.qr[o] = q(site, first + j).real();
                blk.qi[o] = q(site, first + j).imag();
            }
        }
        run_block(blk, n, sched);
        for (int j = 0; j < width; ++j) {
            for (int site = 0; site < n; ++site) {
                const std::size_t o = static_cast<std::size_t>(site) * kLanes + static_cast<std::size_t>(j);
                p_out(site, first + j) = cplx(blk.pr[o], blk.pi[o]);
                q_out(site, first + j) = cplx(blk.qr[o], blk.qi[o]);
            }
        }
    }
    state.modes.u = 0.5 * (p_out + q_out);
    state.modes.v = 0.5 * (p_out - q_out);
    state.modes.omega.reset();
    state.t_current = t_end;

    double drift = 0.0;
    for (int m = 0; m < n_modes; ++m) {
        const double norm = 0.5 * (p_out.col(m).squaredNorm() + q_out.col(m).squaredNorm());
        drift = std::max(drift, std::abs(norm - 1.0));
    }
    state.norm_drift = std::max(state.norm_drift, drift);
    if (state.norm_drift > kMaxNormDrift) {
        throw NormDriftExceeded("mode normalisation drifted by " + std::to_string(state.norm_drift),
                                state.norm_drift);
    }
}

EvolvedModes step(const EvolvedModes& state, const DisorderRealization& r, const QuenchProtocol& p) {
    p.validate();
    const double t_end = p.t_end();
    if (!(state.t_current < t_end)) {
        throw InvalidArgument("step: the quench has already reached its end time");
    }
    EvolvedModes next = state;
    const double target = std::min(state.t_current + p.step(), t_end);
    evolve(next, r.gamma, p.field(), target, p.policy());
    return next;
}

double unitarity_error(const BogoliubovModes& modes) {
    const CMatrix p = modes.u + modes.v;
    const CMatrix q = modes.u - modes.v;
    const auto n = p.cols();
    const CMatrix gram = p.adjoint() * p + q.adjoint() * q - 2.0 * CMatrix::Identity(n, n);
    const CMatrix anom = p.transpose() * p - q.transpose() * q;
    return 0.5 * std::max(gram.cwiseAbs().maxCoeff(), anom.cwiseAbs().maxCoeff());
}

QuenchResult run_quench(const DisorderRealization& r, const QuenchProtocol& p, const QuenchObserver& observer) {
    QuenchResult result;
    result.final_state = init_state(r, p);
    EvolvedModes& state = result.final_state;
    const StepPolicy policy = p.policy();
    const LinearField field = p.field();

    auto record = [&](double g) {
        SnapshotRecord rec;
        rec.g = g;
        rec.t = state.t_current;
        rec.kink_density = kink_density(kink_overlap(state.modes));
        rec.norm_drift = state.norm_drift;
        result.trajectory.push_back(rec);
        if (observer) {
            observer(g, state);
        }
    };

    for (double g : p.snapshots()) {
        const double t = p.time_at(g);
        if (t > state.t_current) {
            evolve(state, r.gamma, field, t, policy);
        }
        record(g);
    }
    if (state.t_current < p.t_end()) {
        evolve(state, r.gamma, field, p.t_end(), policy);
    }
    return result;
}

}  // namespace rtfim
