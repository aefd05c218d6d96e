#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rtfim {

/// Identifier of the random stream construction. Bump when any of
/// stream_seed(), GaussianStream or the engine changes, since stored
/// realizations are only reproducible against the same version.
inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-keyed/box-muller";
inline constexpr int kRngVersion = 1;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit seed from a base seed and a key path.
/// Streams keyed by different (base, a, b) tuples are statistically
/// independent; the result does not depend on call order or threading.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Standard normal deviates, platform independent (std::normal_distribution
/// is implementation defined, so Box-Muller is done by hand).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next();

private:
    double uniform_open();  // (0, 1]

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rtfim
