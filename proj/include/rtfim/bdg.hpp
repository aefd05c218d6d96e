#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

#include "rtfim/lattice.hpp"

namespace rtfim {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// A complete set of Bogoliubov modes in the antiperiodic (even parity)
/// fermion sector. Column m of (u, v) describes the quasiparticle
///   gamma_m = sum_n (u_nm^* c_n + v_nm^* c_n^dagger),
/// equivalently c_n = sum_m (u_nm gamma_m + v_nm^* gamma_m^dagger).
/// The represented state is the vacuum of all gamma_m.
///
/// Internally the combinations u+ = u + v and u- = u - v are convenient:
/// for a stationary mode they satisfy
///   omega u+_n = 2 g_n u-_n - 2 u-_{n-1},   omega u-_n = 2 g_n u+_n - 2 u+_{n+1}
/// with u+-_{N+1} = -u+-_1 and u+-_0 = -u+-_N.
struct BogoliubovModes {
    int n_sites = 0;
    CMatrix u;
    CMatrix v;
    /// Mode frequencies for stationary modes, ascending; absent for evolved
    /// modes. If the lowest positive-frequency vacuum lies in the odd fermion
    /// parity sector, the lowest mode is particle-hole conjugated so the state
    /// stays in the even sector, and its stored frequency is negative.
    std::optional<std::vector<double>> omega;
    bool antiperiodic = true;
    /// Set when two consecutive frequencies differ by less than 1e-12.
    bool degenerate_spectrum = false;
    /// Set when the lowest mode was conjugated to stay in the even sector.
    bool parity_flipped = false;

    CMatrix u_plus() const { return u + v; }
    CMatrix u_minus() const { return u - v; }

    /// Builds modes from u+ and u- columns (each of unit norm).
    static BogoliubovModes from_plus_minus(const CMatrix& p, const CMatrix& q);
};

/// Composite Bogoliubov transformation between a target and a reference
/// vacuum: gamma_a = sum_b (U_ba^* gamma0_b + V_ba^* gamma0_b^dagger).
struct OverlapPair {
    CMatrix U;
    CMatrix V;
};

/// Antisymmetric pair amplitude of the target vacuum written as a BCS state
/// over reference (kink) modes: |psi> ~ exp(1/2 sum Z_ab gamma0_a^+ gamma0_b^+)|0>.
struct PairWavefunction {
    CMatrix Z;
    int n_sites = 0;
    bool regularized = false;
    double regularization = 0.0;
    /// Smallest over largest singular value of U.
    double singular_value_ratio = 1.0;
};

/// Real N x N matrix M with (M u-)_n = 2 g_n u-_n - 2 u-_{n-1}, antiperiodic.
RMatrix bdg_coupling_matrix(const FieldProfile& fields);

/// Hermitian 2N x 2N generator [[0, M], [M^T, 0]] acting on (u+, u-).
/// Its eigenvalues come in +-omega pairs.
CMatrix bdg_generator(const FieldProfile& fields);

/// Ground-state modes of the quadratic Hamiltonian for the given fields.
/// Uses the singular value decomposition of M (left vectors are u+, right
/// vectors are u-, singular values are the frequencies). Phase convention:
/// the largest-magnitude component of u+ in each column is real positive.
BogoliubovModes solve_ground_modes(const FieldProfile& fields);

/// Ground-state energy -1/2 sum omega of stationary modes (equals the spin
/// chain's lowest energy in the even sigma^x parity sector).
double ground_energy(const BogoliubovModes& modes);

/// Kinks localised on bonds (m, m+1): u0_nm = (delta_{n,m+1} - delta_{n,m})/2,
/// v0_nm = (delta_{n,m+1} + delta_{n,m})/2, antiperiodic in n. All omega = 2.
BogoliubovModes kink_basis(int n_sites);

/// U = u0^dagger u + v0^dagger v, V = v0^T u + u0^T v.
OverlapPair bogoliubov_overlap(const BogoliubovModes& target, const BogoliubovModes& reference);

/// Same as bogoliubov_overlap(target, kink_basis(N)) in O(N^2).
OverlapPair kink_overlap(const BogoliubovModes& target);

/// d = Tr(V^dagger V) / N.
double ground_kink_density(const OverlapPair& overlap);

/// Z = V^* (U^*)^{-1}, antisymmetrised. Throws SingularOverlap when the
/// condition of U is below 1e-12. With tikhonov > 0 a regularised inverse
/// U^T (U^* U^T + lambda^2)^{-1} is used instead and recorded.
PairWavefunction pair_wavefunction(const OverlapPair& overlap, double tikhonov = 0.0);

/// Multiplies mode column m by exp(i angles[m]); the represented state is
/// unchanged, so every observable must be invariant under this.
BogoliubovModes with_mode_phases(const BogoliubovModes& modes, const std::vector<double>& angles);

/// Smallest/largest singular value ratio below which U counts as singular.
inline constexpr double kSingularOverlapRatio = 1e-12;

}  // namespace rtfim
