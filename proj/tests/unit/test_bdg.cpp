#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "rtfim/bdg.hpp"
#include "rtfim/errors.hpp"
#include "rtfim/observables.hpp"
#include "rtfim/quench.hpp"

using namespace rtfim;

namespace {

// Uniform chain, antiperiodic momenta k = (2j + 1) pi / N:
// E0 = -sum_k eps_k, eps_k = sqrt(1 + g^2 - 2 g cos k), and by
// Hellmann-Feynman <sz sz> = (1/N) sum_k (1 - g cos k) / eps_k.
double uniform_energy(int n, double g) {
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
        const double k = (2 * j + 1) * std::numbers::pi / n;
        e -= std::sqrt(1 + g * g - 2 * g * std::cos(k));
    }
    return e;
}

double uniform_density(int n, double g) {
    double zz = 0.0;
    for (int j = 0; j < n; ++j) {
        const double k = (2 * j + 1) * std::numbers::pi / n;
        zz += (1 - g * std::cos(k)) / std::sqrt(1 + g * g - 2 * g * std::cos(k));
    }
    return 0.5 * (1.0 - zz / n);
}

FieldProfile random_fields(int n, double g, double sigma, std::uint64_t seed) {
    return effective_fields(sample_disorder({n, sigma, seed}), g);
}

}  // namespace

TEST_CASE("uniform chain matches the closed form") {
    for (int n : {4, 16, 64}) {
        for (double g : {0.0, 0.3, 0.9, 1.0, 1.7, 5.0}) {
            const auto modes = solve_ground_modes(uniform_fields(n, g));
            CHECK(ground_energy(modes) == doctest::Approx(uniform_energy(n, g)).epsilon(1e-12));
            CHECK(kink_density(kink_overlap(modes)) == doctest::Approx(uniform_density(n, g)).epsilon(1e-11));
        }
    }
}

TEST_CASE("zero field is the kink vacuum") {
    const auto modes = solve_ground_modes(uniform_fields(8, 0.0));
    CHECK(ground_energy(modes) == doctest::Approx(-8.0));
    const auto ov = kink_overlap(modes);
    CHECK(kink_density(ov) < 1e-15);
    CHECK(fidelity_to_kink_vacuum(pair_wavefunction(ov)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("strong field approaches half filling of kinks") {
    const auto modes = solve_ground_modes(uniform_fields(32, 1e4));
    CHECK(kink_density(kink_overlap(modes)) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("modes form a unitary Bogoliubov transformation") {
    const auto modes = solve_ground_modes(random_fields(24, 0.8, 0.6, 5));
    CHECK(unitarity_error(modes) < 1e-13);
    const auto& w = *modes.omega;
    for (std::size_t i = 1; i < w.size(); ++i) {
        CHECK(w[i] >= w[i - 1]);
    }
}

TEST_CASE("SVD frequencies agree with the 2N generator") {
    const auto f = random_fields(12, 0.7, 0.5, 3);
    const auto modes = solve_ground_modes(f);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(bdg_generator(f));
    const auto ev = es.eigenvalues();
    for (int m = 0; m < 12; ++m) {
        CHECK(std::abs((*modes.omega)[m]) == doctest::Approx(ev(12 + m)).epsilon(1e-12));
        CHECK(ev(11 - m) == doctest::Approx(-ev(12 + m)).epsilon(1e-12));
    }
}

TEST_CASE("fast kink overlap equals the general overlap") {
    const auto modes = solve_ground_modes(random_fields(16, 0.9, 0.5, 11));
    const auto fast = kink_overlap(modes);
    const auto slow = bogoliubov_overlap(modes, kink_basis(16));
    CHECK((fast.U - slow.U).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((fast.V - slow.V).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pair wavefunction is antisymmetric and gauge invariant") {
    const auto modes = solve_ground_modes(random_fields(16, 0.6, 0.5, 13));
    const auto z = pair_wavefunction(kink_overlap(modes));
    CHECK((z.Z + z.Z.transpose()).cwiseAbs().maxCoeff() < 1e-13);
    std::vector<double> angles;
    for (int m = 0; m < 16; ++m) {
        angles.push_back(0.37 * m * m + 1.1);
    }
    const auto rotated = with_mode_phases(modes, angles);
    const auto z2 = pair_wavefunction(kink_overlap(rotated));
    CHECK((z.Z - z2.Z).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(kink_density(kink_overlap(rotated)) == doctest::Approx(kink_density(kink_overlap(modes))));
}

TEST_CASE("orthogonal vacuum raises SingularOverlap") {
    // Exchanging u and v* of one kink mode creates that kink: the state has
    // odd kink number and zero overlap with the kink vacuum.
    auto modes = kink_basis(8);
    const CMatrix u0 = modes.u.col(0);
    modes.u.col(0) = modes.v.col(0).conjugate();
    modes.v.col(0) = u0.conjugate();
    const auto ov = kink_overlap(modes);
    CHECK_THROWS_AS(pair_wavefunction(ov), SingularOverlap);
    const auto reg = pair_wavefunction(ov, 1e-6);
    CHECK(reg.regularized);
    CHECK(kink_density(ov) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("odd-parity fields flip the lowest mode") {
    FieldProfile f;
    f.g_n = {-3.0, 2.0, 1.0, 1.0};
    const auto modes = solve_ground_modes(f);
    CHECK(modes.parity_flipped);
    CHECK((*modes.omega)[0] < 0.0);
    CHECK(unitarity_error(modes) < 1e-13);
}

TEST_CASE("uniform chains report degenerate spectra") {
    CHECK(solve_ground_modes(uniform_fields(8, 0.5)).degenerate_spectrum);
    CHECK_FALSE(solve_ground_modes(random_fields(8, 0.5, 0.5, 1)).degenerate_spectrum);
}
