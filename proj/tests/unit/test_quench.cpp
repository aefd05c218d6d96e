#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rtfim/errors.hpp"
#include "rtfim/observables.hpp"
#include "rtfim/quench.hpp"

using namespace rtfim;

TEST_CASE("linear field") {
    const LinearField f{2.0, 1.0, -0.5};
    CHECK(f.at(4.0) == doctest::Approx(0.0));
    // Integral of 1 - (t - 2)/2 over [0, 3] = 3 + 1/2 * ... computed directly.
    CHECK(f.integral(0.0, 3.0) == doctest::Approx(3.0 - 0.5 * (4.5 - 6.0)));
    CHECK(LinearField::frozen(3.0).integral(1.0, 2.5) == doctest::Approx(4.5));
}

TEST_CASE("protocol validation and defaults") {
    QuenchProtocol p;
    p.tau_q = 16.0;
    CHECK(p.step() == doctest::Approx(0.01));
    CHECK(p.order == 4);
    CHECK(p.t_start() == doctest::Approx(-160.0));
    CHECK(p.t_end() == 0.0);
    const auto s = p.snapshots();
    CHECK(s.size() == 200);
    CHECK(s.front() == 10.0);
    CHECK(s.back() == 0.0);
    p.tau_q = 0.0;
    CHECK_THROWS_AS(p.validate(), NonPositiveValue);
    p.tau_q = 1.0;
    p.order = 3;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p.order = 2;
    p.snapshot_fields = {1.0, 2.0};
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("frozen field keeps an eigenstate up to an order-4 splitting error") {
    const auto r = sample_disorder({16, 0.5, 4});
    QuenchProtocol p;
    p.tau_q = 1.0;
    p.g_init = 0.9;
    p.g_final = 0.0;
    const auto start = init_state(r, p);
    const double f0 = log_overlap_fidelity(kink_overlap(start.modes));
    auto drift = [&](double dt) {
        auto state = start;
        evolve(state, r.gamma, LinearField::frozen(0.9), state.t_current + 7.3, StepPolicy{dt, 4});
        return std::abs(log_overlap_fidelity(kink_overlap(state.modes)) - f0);
    };
    const double coarse = drift(0.02);
    const double fine = drift(0.01);
    CHECK(fine < 1e-6);
    // Fourth order: halving dt divides the error by ~16.
    CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("quench matches the exact evolution oracle") {
    // Exact-diagonalization value for N = 8, tau_q = 4, sigma = 0
    // (order-4 splitting at dt = 1e-3 on 2^8 amplitudes).
    const double ed = 0.006922264568;
    const auto r = sample_disorder({8, 0.0, 1});
    QuenchProtocol p;
    p.tau_q = 4.0;
    p.snapshot_fields = {0.0};
    const auto q = run_quench(r, p);
    CHECK(std::abs(kink_density(kink_overlap(q.final_state.modes)) - ed) < 1e-8);
    p.order = 2;
    const auto q2 = run_quench(r, p);
    CHECK(std::abs(kink_density(kink_overlap(q2.final_state.modes)) - ed) < 1e-5);
}

TEST_CASE("evolution is unitary and records the trajectory") {
    const auto r = sample_disorder({32, 0.5, 9});
    QuenchProtocol p;
    p.tau_q = 8.0;
    p.n_snapshots = 5;
    std::vector<double> seen;
    const auto q = run_quench(r, p, [&](double g, const EvolvedModes&) { seen.push_back(g); });
    CHECK(seen == std::vector<double>{10.0, 7.5, 5.0, 2.5, 0.0});
    REQUIRE(q.trajectory.size() == 5);
    CHECK(q.trajectory.front().kink_density == doctest::Approx(kink_density(kink_overlap(
                                                   solve_ground_modes(effective_fields(r, 10.0))))));
    CHECK(q.final_state.norm_drift < 1e-10);
    CHECK(unitarity_error(q.final_state.modes) < 1e-10);
    CHECK(q.final_state.t_current == doctest::Approx(0.0));
}

TEST_CASE("step advances one base step") {
    const auto r = sample_disorder({16, 0.3, 2});
    QuenchProtocol p;
    p.tau_q = 2.0;
    const auto s0 = init_state(r, p);
    const auto s1 = step(step(s0, r, p), r, p);
    auto direct = s0;
    evolve(direct, r.gamma, p.field(), s0.t_current + 2 * p.step(), p.policy());
    CHECK(s1.t_current == doctest::Approx(direct.t_current));
    CHECK((s1.modes.u - direct.modes.u).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("fast start warns about a non-adiabatic initial state") {
    const auto r = sample_disorder({8, 0.0, 1});
    QuenchProtocol p;
    p.tau_q = 0.1;
    CHECK_FALSE(init_state(r, p).warnings.empty());
    p.tau_q = 16.0;
    CHECK(init_state(r, p).warnings.empty());
}

TEST_CASE("uniform chain follows per-mode Landau-Zener") {
    // Each momentum pair is an independent two-level sweep; for a slow
    // enough quench p_k ~ exp(-2 pi tau sin^2 k) for the momenta whose
    // anticrossing g = cos k > 0 is traversed, and d = (1/N) sum_k p_k.
    const int n = 128;
    const double tau = 16.0;
    QuenchProtocol p;
    p.tau_q = tau;
    p.snapshot_fields = {0.0};
    const auto q = run_quench(sample_disorder({n, 0.0, 1}), p);
    double lz = 0.0;
    for (int j = 0; j < n; ++j) {
        const double k = (2 * j + 1) * std::numbers::pi / n;
        if (std::cos(k) > 0.0) {
            lz += std::exp(-2 * std::numbers::pi * tau * std::sin(k) * std::sin(k));
        }
    }
    lz /= n;
    CHECK(kink_density(kink_overlap(q.final_state.modes)) == doctest::Approx(lz).epsilon(0.02));
}
