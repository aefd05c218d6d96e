#include "rtfim/lattice.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <string>

#include "rtfim/errors.hpp"
#include "rtfim/rng.hpp"

namespace rtfim {

void ChainSpec::validate() const {
    if (n_sites <= 0 || n_sites % 2 != 0) {
        throw InvalidArgument("n_sites must be a positive even integer, got " + std::to_string(n_sites));
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("sigma must be finite and >= 0");
    }
}

DisorderRealization sample_disorder(const ChainSpec& spec) {
    spec.validate();
    DisorderRealization r;
    r.sigma = spec.sigma;
    r.seed = spec.seed;
    r.gamma.resize(static_cast<std::size_t>(spec.n_sites));
    GaussianStream normal(spec.seed);
    for (double& x : r.gamma) {
        x = spec.sigma * normal.next();
    }
    return r;
}

FieldProfile effective_fields(const DisorderRealization& r, double g) {
    FieldProfile f;
    f.g = g;
    f.g_n.resize(r.gamma.size());
    for (std::size_t n = 0; n < r.gamma.size(); ++n) {
        f.g_n[n] = g + r.gamma[n];
    }
    return f;
}

FieldProfile uniform_fields(int n_sites, double g) {
    FieldProfile f;
    f.g = g;
    f.g_n.assign(static_cast<std::size_t>(n_sites), g);
    return f;
}

namespace {

constexpr double kCutoff = 12.0;          // integrate |Gamma| <= 12 sigma
constexpr double kQuadTolerance = 1e-13;
constexpr double kQuadMaxError = 1e-10;

double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double mean_log_field(double g, double sigma) {
    if (sigma == 0.0) {
        return std::log(std::abs(g));
    }
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sigma must be >= 0");
    }
    // Integrate over the standard normal variable x, Gamma = sigma x.
    const double x_sing = -g / sigma;
    double value = 0.0;
    double error = 0.0;
    try {
        if (std::abs(x_sing) >= kCutoff) {
            auto f = [&](double x) { return gaussian_pdf(x) * std::log(std::abs(g + sigma * x)); };
            value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                f, -kCutoff, kCutoff, 20, kQuadTolerance, &error);
        } else {
            // Split at the logarithmic singularity; tanh-sinh handles the
            // integrable endpoint singularity, using the complement argument
            // for the distance to the singular endpoint.
            boost::math::quadrature::tanh_sinh<double> integrator;
            auto left = [&](double x, double xc) {
                const double dist = xc > 0.0 ? xc : x_sing - x;
                return gaussian_pdf(x) * std::log(sigma * dist);
            };
            auto right = [&](double x, double xc) {
                const double dist = xc < 0.0 ? -xc : x - x_sing;
                return gaussian_pdf(x) * std::log(sigma * dist);
            };
            double err_l = 0.0;
            double err_r = 0.0;
            double l1 = 0.0;
            double l2 = 0.0;
            if (x_sing > -kCutoff) {
                value += integrator.integrate(left, -kCutoff, x_sing, kQuadTolerance, &err_l, &l1);
            }
            if (x_sing < kCutoff) {
                value += integrator.integrate(right, x_sing, kCutoff, kQuadTolerance, &err_r, &l2);
            }
            // tanh-sinh reports a relative error estimate.
            error = err_l * std::max(1.0, l1) + err_r * std::max(1.0, l2);
        }
    } catch (const std::exception& e) {
        throw QuadratureFailure(std::string("quadrature of E[ln|g+Gamma|] failed: ") + e.what());
    }
    if (!std::isfinite(value) || error > kQuadMaxError) {
        throw QuadratureFailure("quadrature of E[ln|g+Gamma|] did not converge (error estimate " +
                                std::to_string(error) + ")");
    }
    return value;
}

std::optional<double> critical_field(double sigma) {
    if (!(sigma >= 0.0)) {
        throw InvalidArgument("sigma must be >= 0");
    }
    if (sigma == 0.0) {
        return 1.0;
    }
    constexpr double kLogLo = -3.0 * std::numbers::ln10;
    constexpr double kLogHi = 3.0 * std::numbers::ln10;
    constexpr int kScan = 240;
    auto f = [&](double log_g) { return mean_log_field(std::exp(log_g), sigma); };

    double a = kLogLo;
    double fa = f(a);
    double b = a;
    bool bracketed = false;
    for (int i = 1; i <= kScan; ++i) {
        b = kLogLo + (kLogHi - kLogLo) * i / kScan;
        const double fb = f(b);
        if ((fa < 0.0) != (fb < 0.0)) {
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!bracketed) {
        return std::nullopt;
    }
    // Bisection in log g until the bracket in g is below 1e-10.
    while (std::exp(b) - std::exp(a) > 1e-10) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return std::exp(0.5 * (a + b));
}

}  // namespace rtfim
