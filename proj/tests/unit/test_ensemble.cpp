#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rtfim/ensemble.hpp"
#include "rtfim/errors.hpp"

using namespace rtfim;

TEST_CASE("realization counts") {
    CHECK(realizations_for(64) == 32);
    CHECK(realizations_for(512) == 4);
    CHECK(realizations_for(100) == 21);
    CHECK(realizations_for(4096) == 4);
    CHECK(realizations_for(256, 2048, 8) == 8);
    CHECK_THROWS_AS(realizations_for(0), InvalidArgument);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, 4, [&](int i) { hits[i].fetch_add(1); });
    for (auto& h : hits) {
        CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                        if (i == 7) {
                            throw std::runtime_error("boom");
                        }
                    }),
                    std::runtime_error);
}

TEST_CASE("disorder is shared across sigma (common random numbers)") {
    const auto a = sample_disorder({16, 0.4, realization_seed(5, 16, 2)});
    const auto b = sample_disorder({16, 0.8, realization_seed(5, 16, 2)});
    for (int n = 0; n < 16; ++n) {
        CHECK(b.gamma[n] == doctest::Approx(2.0 * a.gamma[n]));
    }
    CHECK(realization_seed(5, 16, 2) != realization_seed(5, 32, 2));
}

TEST_CASE("ensemble results do not depend on the thread count") {
    EnsemblePlan plan;
    plan.sigma_grid = {0.0, 0.5};
    plan.tau_q_grid = {1.0, 2.0};
    plan.n_grid = {8, 16};
    plan.realization_budget = 48;
    plan.protocol.g_init = 4.0;
    plan.compute_bundles = true;
    plan.threads = 1;
    const auto one = run_ensemble(plan);
    plan.threads = 3;
    const auto three = run_ensemble(plan);
    REQUIRE(one.realizations.size() == three.realizations.size());
    for (std::size_t i = 0; i < one.realizations.size(); ++i) {
        CHECK(one.realizations[i].d_final == three.realizations[i].d_final);
        CHECK(one.realizations[i].log_fidelity == three.realizations[i].log_fidelity);
    }
    REQUIRE(one.cells.size() == 8);
    for (const auto& c : one.cells) {
        CHECK(c.n_realizations == realizations_for(c.n_sites, 48));
        CHECK(c.n_failed == 0);
        CHECK_FALSE(c.flagged);
        CHECK(c.bundle.C_r.size() == static_cast<std::size_t>(c.n_sites));
        if (c.sigma == 0.0) {
            // Clean chains are computed once and replicated.
            CHECK(c.d.std_error == 0.0);
            CHECK(c.d_ground.mean == 0.0);
        } else {
            CHECK(c.d.std_error > 0.0);
            CHECK(c.d_ground.mean > 0.0);
        }
        CHECK(c.delta_d.mean == doctest::Approx(c.d.mean - c.d_ground.mean));
    }
    // Same (N, k) share the disorder draw across tau_q: equal ground densities.
    CHECK(one.cells[4].d_ground.mean == one.cells[6].d_ground.mean);
}

TEST_CASE("static ensemble") {
    StaticPlan plan;
    plan.sigma_grid = {0.0, 0.4};
    plan.g_grid = {0.0, 0.5};
    plan.n_grid = {16};
    plan.realization_budget = 64;
    const auto res = run_static_ensemble(plan);
    REQUIRE(res.cells.size() == 4);
    CHECK(res.cells[0].d.mean == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(res.cells[0].fidelity.mean == doctest::Approx(1.0));
    CHECK(res.cells[3].d.mean > res.cells[2].d.mean);
    plan.sigma_grid.clear();
    CHECK_THROWS_AS(run_static_ensemble(plan), InvalidArgument);
}

TEST_CASE("mean and standard error") {
    const auto m = mean_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(mean_stderr({7.0}).std_error == 0.0);
    // The standard error shrinks as 1/sqrt(N_R): for alternating 0/1 samples
    // it is 1 / (2 sqrt(n - 1)).
    std::vector<double> small, large;
    for (int i = 0; i < 50; ++i) {
        small.push_back(i % 2);
    }
    for (int i = 0; i < 200; ++i) {
        large.push_back(i % 2);
    }
    CHECK(mean_stderr(small).std_error / mean_stderr(large).std_error ==
          doctest::Approx(std::sqrt(199.0 / 49.0)).epsilon(1e-12));
}

TEST_CASE("fidelity average survives underflow") {
    const auto a = average_fidelity({-2000.0, -2001.0});
    CHECK(a.log_mean == doctest::Approx(-2000.0 + std::log((1.0 + std::exp(-1.0)) / 2.0)));
    CHECK(a.mean == 0.0);
    CHECK(a.count == 2);
    const auto b = average_fidelity({std::log(0.2), std::log(0.4)});
    CHECK(b.mean == doctest::Approx(0.3));
    CHECK_THROWS_AS(average_fidelity({-1.0}), InvalidArgument);
}

TEST_CASE("correlation coefficient fit") {
    const double d = 0.05;
    std::vector<FitPoint> series;
    for (int n : {16, 32, 64, 128, 256, 512}) {
        series.push_back({static_cast<double>(n), n * std::log(1.0 - 0.5 * d)});
    }
    const auto fit = fit_correlation_coefficient(series, d);
    CHECK(fit.c == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(fit.residual < 1e-12);
    // N d >= 3 keeps N >= 64; F < 0.1 then drops N = 64 (F = 0.198).
    CHECK(fit.n_points == 3);
    CHECK(fit.threshold_sensitivity < 1e-9);
    CHECK_THROWS_AS(fit_correlation_coefficient(series, 0.001), InsufficientTail);
    CHECK_THROWS_AS(fit_correlation_coefficient(series, 0.0), NonPositiveValue);
}

TEST_CASE("local slopes") {
    std::vector<SlopePoint> series;
    for (double tau : {16.0, 32.0, 64.0, 128.0}) {
        series.push_back({tau, 0.3 / std::sqrt(tau), 0.01 * 0.3 / std::sqrt(tau)});
    }
    const auto w = fit_local_slopes(series);
    REQUIRE(w.size() == 3);
    for (const auto& s : w) {
        CHECK(s.w == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(s.error == doctest::Approx(std::sqrt(2.0) * 0.01 / std::log(2.0)).epsilon(1e-9));
    }
    series[2].delta_d = -1e-3;
    CHECK_THROWS_AS(fit_local_slopes(series), NonPositiveValue);
    CHECK_THROWS_AS(fit_local_slopes({series[0]}), InvalidArgument);
}

TEST_CASE("logarithmic KZM length") {
    CHECK(kzm_length_estimate(std::exp(std::numbers::e)) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    // ln^2(100) / ln^2(ln 100), evaluated independently.
    CHECK(kzm_length_estimate(100.0) == doctest::Approx(9.093082382511442).epsilon(1e-13));
    CHECK_THROWS_AS(kzm_length_estimate(2.0), InvalidArgument);
}
