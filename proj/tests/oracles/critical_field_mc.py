"""Monte-Carlo estimate of the disorder-averaged critical field.

Solves E[ln|g + Gamma|] = 0 for Gamma ~ N(0, sigma^2) using a fixed sample of
10^7 Gaussian draws (common random numbers) and bisection. The printed value
is frozen into tests/unit/test_lattice.cpp.
"""
import numpy as np

def critical_field_mc(sigma, samples=10_000_000, seed=20240611):
    rng = np.random.default_rng(seed)
    gamma = sigma * rng.standard_normal(samples)
    lo, hi = 0.5, 2.0
    f = lambda g: np.mean(np.log(np.abs(g + gamma)))
    assert f(lo) < 0 < f(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

if __name__ == "__main__":
    for s in (0.8,):
        print(s, repr(critical_field_mc(s)))
