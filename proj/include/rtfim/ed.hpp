#pragma once

#include <complex>
#include <vector>

#include "rtfim/bdg.hpp"
#include "rtfim/lattice.hpp"
#include "rtfim/quench.hpp"

namespace rtfim {

/// Largest chain for exact ground states and for exact time evolution.
inline constexpr int kMaxExactSites = 12;
inline constexpr int kMaxExactEvolveSites = 10;

/// Periodic spin chain state in the sigma^z product basis. Bit n of the
/// basis index is 1 when spin n points down (sigma^z_n = -1).
struct SpinState {
    int n_sites = 0;
    std::vector<std::complex<double>> amplitudes;

    double norm() const;
};

/// Lowest eigenstate of H = -sum_n [g_n sigma^x_n + sigma^z_n sigma^z_{n+1}]
/// (periodic) restricted to the even sigma^x-parity sector. Throws
/// SizeExceeded for N > 12.
SpinState exact_ground_state(const FieldProfile& fields);

/// <psi|H|psi> for the spin Hamiltonian with the given fields.
double exact_energy(const SpinState& state, const FieldProfile& fields);

/// Integrates i d psi/dt = H(t) psi with H(t) built from Gamma_n + g(t) from
/// t0 to t1 by symmetric splitting into exact sigma^x rotations and diagonal
/// sigma^z sigma^z phases (order 2 or 4). Throws SizeExceeded for N > 10.
SpinState exact_evolve(const std::vector<double>& gamma, const LinearField& field, const SpinState& initial,
                       double t0, double t1, double dt = 1e-3, int order = 4);

/// Ground state at g_init evolved through the full linear quench.
SpinState exact_quench(const DisorderRealization& r, const QuenchProtocol& p, double dt = 1e-3);

/// Kink density sum_n (1 - sigma^z_n sigma^z_{n+1}) / (2N), periodic.
double exact_kink_density(const SpinState& state);

/// |<0|psi>|^2 with |0> = (|up...up> + |down...down>)/sqrt(2), the
/// even-parity kink vacuum.
double exact_fidelity(const SpinState& state);

/// <sigma^z_i sigma^z_j>.
double exact_zz(const SpinState& state, int i, int j);

/// The even kink vacuum as a spin state.
SpinState kink_vacuum_state(int n_sites);

/// sigma^x product state with every spin along +x (the g -> infinity ground state).
SpinState x_polarized_state(int n_sites);

/// Applies gamma_b^dagger = sum_n (u_nb c_n^dagger + v_nb c_n) of the given
/// modes, with Jordan-Wigner fermions c_n built from the spin operators.
SpinState apply_quasiparticle_creation(const BogoliubovModes& modes, int b, const SpinState& state);

/// Applies Zhat = 1/2 sum_ab Z_ab gamma0_a^dagger gamma0_b^dagger over kink modes.
SpinState apply_pair_operator(const PairWavefunction& z, const SpinState& state);

/// exp(Zhat)|0>, normalised, over the kink vacuum.
SpinState bcs_state(const PairWavefunction& z);

/// sum_k ||Zhat^k |0>||^2 / (k!)^2, which equals 1/F.
double bcs_series_inverse_fidelity(const PairWavefunction& z);

/// |<a|b>|^2 for normalised states.
double state_overlap(const SpinState& a, const SpinState& b);

}  // namespace rtfim
