#include "rtfim/observables.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <string>

#include "rtfim/errors.hpp"
#include "rtfim/pfaffian.hpp"

namespace rtfim {

namespace {

constexpr double kContractionZero = 1e-13;

void normalize_unit_sum(std::vector<double>& x) {
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    if (total > 0.0) {
        for (double& v : x) {
            v /= total;
        }
    }
}

// ln(1 + s^2) without overflow for large s.
double log1p_square(double s) {
    if (s > 1e8) {
        return 2.0 * std::log(s) + std::log1p(1.0 / (s * s));
    }
    return std::log1p(s * s);
}

}  // namespace

double kink_density(const OverlapPair& overlap) {
    return ground_kink_density(overlap);
}

double log_fidelity_to_kink_vacuum(const PairWavefunction& z) {
    if (z.Z.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<CMatrix> svd(z.Z);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        acc += log1p_square(svd.singularValues()(i));
    }
    return -0.5 * acc;
}

double fidelity_to_kink_vacuum(const PairWavefunction& z) {
    return std::exp(log_fidelity_to_kink_vacuum(z));
}

double log_overlap_fidelity(const OverlapPair& overlap) {
    const Eigen::PartialPivLU<CMatrix> lu(overlap.U);
    const CMatrix& lu_mat = lu.matrixLU();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < lu_mat.rows(); ++i) {
        acc += std::log(std::abs(lu_mat(i, i)));
    }
    return acc;
}

std::vector<double> cooper_pair_correlator(const PairWavefunction& z) {
    const Eigen::Index n = z.Z.rows();
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index r = 0; r < n; ++r) {
            c[static_cast<std::size_t>(r)] += std::norm(z.Z((m + r) % n, m));
        }
    }
    normalize_unit_sum(c);
    return c;
}

std::vector<double> kink_probability(const PairWavefunction& z) {
    const Eigen::Index n = z.Z.rows();
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index col = 0; col < n; ++col) {
        p[static_cast<std::size_t>(col)] = z.Z.col(col).squaredNorm();
    }
    normalize_unit_sum(p);
    return p;
}

std::vector<double> pair_convolution(const std::vector<double>& p_n) {
    const std::size_t n = p_n.size();
    std::vector<double> pp(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += p_n[i] * p_n[(i + r) % n];
        }
        pp[r] = acc;
    }
    double off = 0.0;
    for (std::size_t r = 1; r < n; ++r) {
        off += pp[r];
    }
    if (off > 0.0) {
        for (double& v : pp) {
            v /= off;
        }
    }
    return pp;
}

CorrelationBundle correlation_bundle(const PairWavefunction& z) {
    CorrelationBundle b;
    b.C_r = cooper_pair_correlator(z);
    b.P_n = kink_probability(z);
    b.PP_r = pair_convolution(b.P_n);
    return b;
}

double zz_correlator(const BogoliubovModes& modes, int i, int r) {
    const int n = modes.n_sites;
    if (i < 0 || r < 0 || i + r >= n) {
        throw IndexOutOfRange("zz_correlator: need 0 <= i and i + R < N (i=" + std::to_string(i) +
                              ", R=" + std::to_string(r) + ", N=" + std::to_string(n) + ")");
    }
    if (r == 0) {
        return 1.0;
    }
    // Majorana coefficients over modes for sites i .. i+R:
    // A_l = sum_m (u+_lm gamma_m + h.c.), B_l = sum_m (u-_lm gamma_m - h.c.).
    const CMatrix p = (modes.u + modes.v).middleRows(i, r + 1);
    const CMatrix q = (modes.u - modes.v).middleRows(i, r + 1);
    // Row k of p/q corresponds to site i + k.
    const CMatrix ba = q * p.adjoint();    // <B_l A_n>
    const CMatrix aa = p * p.adjoint();    // <A_l A_n>
    const CMatrix bb = -(q * q.adjoint()); // <B_l B_n>
    const CMatrix ab = -(p * q.adjoint()); // <A_l B_n>

    // String B_i A_{i+1} B_{i+1} ... B_{i+R-1} A_{i+R}: the B's sit on
    // rows 0..R-1, the A's on rows 1..R.
    double off_diag = 0.0;
    for (int a = 0; a < r; ++a) {
        for (int b = a + 1; b < r; ++b) {
            off_diag = std::max(off_diag, std::abs(bb(a, b)));
            off_diag = std::max(off_diag, std::abs(aa(a + 1, b + 1)));
        }
    }
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    if (off_diag < kContractionZero) {
        const CMatrix g = ba.block(0, 1, r, r);
        return sign * g.partialPivLu().determinant().real();
    }

    const int dim = 2 * r;
    CMatrix k = CMatrix::Zero(dim, dim);
    // Operator x at position 2j is B_{i+j}, position 2j+1 is A_{i+j+1}.
    for (int x = 0; x < dim; ++x) {
        for (int y = x + 1; y < dim; ++y) {
            const int sx = (x % 2 == 0) ? x / 2 : x / 2 + 1;
            const int sy = (y % 2 == 0) ? y / 2 : y / 2 + 1;
            const bool bx = (x % 2 == 0);
            const bool by = (y % 2 == 0);
            cplx val;
            if (bx && by) {
                val = bb(sx, sy);
            } else if (bx && !by) {
                val = ba(sx, sy);
            } else if (!bx && by) {
                val = ab(sx, sy);
            } else {
                val = aa(sx, sy);
            }
            k(y, x) = -val;
            k(x, y) = val;
        }
    }
    return sign * pfaffian(k).real();
}

}  // namespace rtfim
