#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rtfim/ed.hpp"
#include "rtfim/errors.hpp"
#include "rtfim/observables.hpp"
#include "rtfim/pfaffian.hpp"
#include "rtfim/quench.hpp"

using namespace rtfim;

namespace {

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

Eigen::MatrixXcd random_antisymmetric(int n, unsigned seed) {
    std::srand(seed);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(n, n);
    return a - a.transpose().eval();
}

}  // namespace

TEST_CASE("pfaffian") {
    Eigen::MatrixXcd a = random_antisymmetric(4, 1);
    const cplx expected = a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
    CHECK(std::abs(pfaffian(a) - expected) < 1e-14);
    for (int n : {2, 6, 10}) {
        Eigen::MatrixXcd b = random_antisymmetric(n, 7 + n);
        const cplx pf = pfaffian(b);
        CHECK(std::abs(pf * pf - b.determinant()) < 1e-12 * std::max(1.0, std::abs(b.determinant())));
    }
    CHECK(pfaffian(random_antisymmetric(5, 3)) == cplx(0.0));
    CHECK(pfaffian(Eigen::MatrixXcd(0, 0)) == cplx(1.0));
}

TEST_CASE("correlation bundle normalisation") {
    const auto f = effective_fields(sample_disorder({32, 0.5, 21}), 0.8);
    const auto z = pair_wavefunction(kink_overlap(solve_ground_modes(f)));
    const auto b = correlation_bundle(z);
    CHECK(b.C_r[0] == 0.0);
    CHECK(sum(b.C_r) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sum(b.P_n) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sum(b.PP_r) - b.PP_r[0] == doctest::Approx(1.0).epsilon(1e-13));
    for (int r = 1; r < 32; ++r) {
        CHECK(b.C_r[r] == doctest::Approx(b.C_r[32 - r]).epsilon(1e-12));
    }
}

TEST_CASE("pair convolution of independent kinks") {
    // Two equal centres at distance 5 on N = 16: PP is concentrated at
    // r = 0, +-5 with weights 1/2 (r = 0) and 1/4 each.
    std::vector<double> p(16, 0.0);
    p[2] = 0.5;
    p[7] = 0.5;
    const auto pp = pair_convolution(p);
    CHECK(pp[5] == doctest::Approx(0.5));
    CHECK(pp[11] == doctest::Approx(0.5));
    CHECK(pp[0] == doctest::Approx(1.0));
    CHECK(pp[3] == 0.0);
}

TEST_CASE("fidelity from Z equals |det U|") {
    const auto f = effective_fields(sample_disorder({24, 0.5, 8}), 1.1);
    const auto ov = kink_overlap(solve_ground_modes(f));
    CHECK(log_fidelity_to_kink_vacuum(pair_wavefunction(ov)) ==
          doctest::Approx(log_overlap_fidelity(ov)).epsilon(1e-12));
}

TEST_CASE("zz correlator against exact diagonalization") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto f = effective_fields(sample_disorder({8, 0.5, seed}), 0.3 + 0.4 * seed);
        const auto modes = solve_ground_modes(f);
        const auto psi = exact_ground_state(f);
        CHECK(zz_correlator(modes, 2, 0) == 1.0);
        for (int i = 0; i < 8; ++i) {
            for (int r = 1; i + r < 8; ++r) {
                CHECK(zz_correlator(modes, i, r) == doctest::Approx(exact_zz(psi, i, i + r)).epsilon(1e-11));
            }
        }
    }
    const auto modes = solve_ground_modes(uniform_fields(8, 0.5));
    CHECK_THROWS_AS(zz_correlator(modes, 4, 4), IndexOutOfRange);
    CHECK_THROWS_AS(zz_correlator(modes, -1, 2), IndexOutOfRange);
}

TEST_CASE("zz correlator of an evolved complex state uses the Pfaffian path") {
    QuenchProtocol p;
    p.tau_q = 1.0;
    p.g_init = 3.0;
    p.dt = 0.002;
    p.snapshot_fields = {0.0};
    const auto r = sample_disorder({8, 0.4, 17});
    const auto q = run_quench(r, p);
    const auto psi = exact_quench(r, p, 5e-4);
    for (int R = 1; R < 8; ++R) {
        CHECK(zz_correlator(q.final_state.modes, 0, R) == doctest::Approx(exact_zz(psi, 0, R)).epsilon(1e-8));
    }
}
