#pragma once

#include <vector>

#include "rtfim/bdg.hpp"

namespace rtfim {

/// Pair correlator C_r, single-kink distribution P_n and its
/// autoconvolution PP_r, all indexed modulo N.
struct CorrelationBundle {
    std::vector<double> C_r;   // unit sum, C_0 = 0
    std::vector<double> P_n;   // unit sum
    std::vector<double> PP_r;  // unit sum over r != 0
};

/// Kink density Tr(V^dagger V)/N of any vacuum (stationary or evolved)
/// relative to the kink basis.
double kink_density(const OverlapPair& overlap);

/// ln F with F = det(1 + Z^dagger Z)^{-1/2}, from the singular values of Z.
double log_fidelity_to_kink_vacuum(const PairWavefunction& z);

/// F = exp(log_fidelity_to_kink_vacuum(z)), in (0, 1].
double fidelity_to_kink_vacuum(const PairWavefunction& z);

/// ln|det U|; equals ln F analytically and needs no inverse of U.
double log_overlap_fidelity(const OverlapPair& overlap);

/// C_r ~ sum_m |Z_{m+r,m}|^2, normalised to unit sum.
std::vector<double> cooper_pair_correlator(const PairWavefunction& z);

/// P_n ~ sum_m |Z_{m,n}|^2, normalised to unit sum.
std::vector<double> kink_probability(const PairWavefunction& z);

/// PP_r = sum_n P_n P_{n+r}, normalised so that sum_{r != 0} PP_r = 1
/// (PP_0 is kept with the same scale factor).
std::vector<double> pair_convolution(const std::vector<double>& p_n);

CorrelationBundle correlation_bundle(const PairWavefunction& z);

/// <sigma^z_i sigma^z_{i+R}> by Wick's theorem for sites 0 <= i and
/// i + R < N (no wrap through the boundary). When the state has vanishing
/// <AA> and <BB> contractions the value is det G with
/// G_ab = <B_{i+a} A_{i+b+1}>; otherwise the Pfaffian of the full 2R x 2R
/// contraction matrix is used. Throws IndexOutOfRange.
double zz_correlator(const BogoliubovModes& modes, int i, int r);

/// delta d = d - d_ground.
inline double excess_kink_density(double d_final, double d_ground) { return d_final - d_ground; }

}  // namespace rtfim
