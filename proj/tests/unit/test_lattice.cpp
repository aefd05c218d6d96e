#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rtfim/errors.hpp"
#include "rtfim/lattice.hpp"

using namespace rtfim;

TEST_CASE("chain spec validation") {
    CHECK_NOTHROW((ChainSpec{8, 0.5, 1}.validate()));
    CHECK_THROWS_AS((ChainSpec{7, 0.5, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ChainSpec{0, 0.5, 1}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ChainSpec{8, -0.1, 1}.validate()), InvalidArgument);
}

TEST_CASE("disorder is deterministic in the seed and scales with sigma") {
    const auto a = sample_disorder({16, 0.5, 99});
    const auto b = sample_disorder({16, 0.5, 99});
    const auto c = sample_disorder({16, 1.0, 99});
    const auto zero = sample_disorder({16, 0.0, 99});
    for (int n = 0; n < 16; ++n) {
        CHECK(a.gamma[n] == b.gamma[n]);
        CHECK(c.gamma[n] == doctest::Approx(2.0 * a.gamma[n]).epsilon(1e-15));
        CHECK(zero.gamma[n] == 0.0);
    }
    const auto f = effective_fields(a, 0.7);
    CHECK(f.g == 0.7);
    CHECK(f.g_n[3] == doctest::Approx(0.7 + a.gamma[3]));
}

TEST_CASE("mean log field") {
    CHECK(mean_log_field(1.0, 0.0) == 0.0);
    CHECK(mean_log_field(2.0, 0.0) == doctest::Approx(std::log(2.0)));
    // At g = 0: E ln|sigma z| = ln sigma - (gamma_E + ln 2) / 2.
    const double exact = std::log(0.8) - 0.5 * (std::numbers::egamma + std::log(2.0));
    CHECK(mean_log_field(0.0, 0.8) == doctest::Approx(exact).epsilon(1e-11));
    // Far from the singularity the Gauss-Kronrod branch applies:
    // E ln(g + sigma z) = ln g - sigma^2 / (2 g^2) - 3 sigma^4 / (4 g^4) + ...
    const double g = 50.0, s = 1.0;
    CHECK(mean_log_field(g, s) ==
          doctest::Approx(std::log(g) - s * s / (2 * g * g) - 3 * std::pow(s, 4) / (4 * std::pow(g, 4))).epsilon(1e-9));
}

TEST_CASE("critical field") {
    CHECK(*critical_field(0.0) == 1.0);
    CHECK(*critical_field(1e-6) == doctest::Approx(1.0).epsilon(1e-9));
    // Monte-Carlo oracle (tests/oracles/critical_field_mc.py, 10^7 draws).
    CHECK(*critical_field(0.8) == doctest::Approx(1.2573110163356143).epsilon(1e-3));
    CHECK_FALSE(critical_field(2.0).has_value());
    CHECK(std::abs(mean_log_field(*critical_field(0.8), 0.8)) < 1e-9);

    // g_c rises until sigma ~ 1 and then turns over towards the
    // sigma = 1.887 threshold where no root is left.
    double prev = 1.0;
    for (double sigma = 0.05; sigma <= 0.95; sigma += 0.05) {
        const double gc = *critical_field(sigma);
        CHECK(gc > prev);
        prev = gc;
    }
    CHECK(*critical_field(1.8) < *critical_field(1.0));
    CHECK(critical_field(1.85).has_value());
    CHECK_FALSE(critical_field(1.9).has_value());
}
