#include <doctest.h>

#include <cmath>
#include <set>

#include "rtfim/rng.hpp"

using namespace rtfim;

TEST_CASE("stream seeds are deterministic and distinct") {
    CHECK(stream_seed(1, 64, 3) == stream_seed(1, 64, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t n : {64, 128, 256}) {
        for (std::uint64_t k = 0; k < 100; ++k) {
            seen.insert(stream_seed(7, n, k));
        }
    }
    CHECK(seen.size() == 300);
    CHECK(stream_seed(1, 64, 3) != stream_seed(2, 64, 3));
}

TEST_CASE("gaussian stream reproduces and has unit variance") {
    GaussianStream a(42), b(42);
    for (int i = 0; i < 10; ++i) {
        CHECK(a.next() == b.next());
    }
    GaussianStream s(123);
    const int n = 200000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.next();
        m1 += x;
        m2 += x * x;
    }
    m1 /= n;
    m2 /= n;
    // Five standard errors.
    CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
    CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
