#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace rtfim {

/// Chain geometry and disorder strength. Energies are in units of the
/// Ising coupling J = 1.
struct ChainSpec {
    int n_sites = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument unless n_sites is positive and even and sigma >= 0.
    void validate() const;
};

/// One sample of the static-environment fields Gamma_n.
struct DisorderRealization {
    std::vector<double> gamma;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    int n_sites() const { return static_cast<int>(gamma.size()); }
};

/// Effective transverse fields g_n = g + Gamma_n at one instant.
struct FieldProfile {
    std::vector<double> g_n;
    double g = 0.0;

    int n_sites() const { return static_cast<int>(g_n.size()); }
};

/// i.i.d. Gaussian fields with zero mean and standard deviation sigma,
/// deterministic in spec.seed.
DisorderRealization sample_disorder(const ChainSpec& spec);

FieldProfile effective_fields(const DisorderRealization& r, double g);

/// Uniform fields without disorder.
FieldProfile uniform_fields(int n_sites, double g);

/// Disorder average of ln|g + Gamma| for Gaussian Gamma of width sigma.
/// Throws QuadratureFailure when the error estimate exceeds tolerance.
double mean_log_field(double g, double sigma);

/// Critical field g_c > 0 solving E[ln|g_c + Gamma|] = 0. Returns nullopt
/// when no sign change exists on g in [1e-3, 1e3] (disorder too strong).
std::optional<double> critical_field(double sigma);

}  // namespace rtfim
