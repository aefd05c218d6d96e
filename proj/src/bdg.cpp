#include "rtfim/bdg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "rtfim/errors.hpp"

namespace rtfim {

namespace {

constexpr double kDegenerateGap = 1e-12;

void check_even(int n) {
    if (n <= 0 || n % 2 != 0) {
        throw InvalidArgument("number of sites must be positive and even, got " + std::to_string(n));
    }
}

// Makes the largest |u+| component of every column real positive by a
// common phase on (u+, u-). The first index wins ties within 1e-12.
void fix_phases(CMatrix& p, CMatrix& q) {
    for (Eigen::Index m = 0; m < p.cols(); ++m) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index n = 0; n < p.rows(); ++n) {
            const double a = std::abs(p(n, m));
            if (a > best_abs + 1e-12) {
                best_abs = a;
                best = n;
            }
        }
        if (best_abs <= 0.0) {
            continue;
        }
        const cplx phase = std::conj(p(best, m)) / best_abs;
        p.col(m) *= phase;
        q.col(m) *= phase;
        p(best, m) = cplx(best_abs, 0.0);
    }
}

}  // namespace

BogoliubovModes BogoliubovModes::from_plus_minus(const CMatrix& p, const CMatrix& q) {
    BogoliubovModes modes;
    modes.n_sites = static_cast<int>(p.rows());
    modes.u = 0.5 * (p + q);
    modes.v = 0.5 * (p - q);
    return modes;
}

RMatrix bdg_coupling_matrix(const FieldProfile& fields) {
    const int n = fields.n_sites();
    check_even(n);
    RMatrix m = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 2.0 * fields.g_n[static_cast<std::size_t>(i)];
        if (i > 0) {
            m(i, i - 1) = -2.0;
        }
    }
    // u-_0 = -u-_N gives +2 u-_N in the first row.
    m(0, n - 1) += 2.0;
    return m;
}

CMatrix bdg_generator(const FieldProfile& fields) {
    const RMatrix m = bdg_coupling_matrix(fields);
    const Eigen::Index n = m.rows();
    CMatrix h = CMatrix::Zero(2 * n, 2 * n);
    h.topRightCorner(n, n) = m.cast<cplx>();
    h.bottomLeftCorner(n, n) = m.transpose().cast<cplx>();
    return h;
}

BogoliubovModes kink_basis(int n_sites) {
    check_even(n_sites);
    const int n = n_sites;
    CMatrix p = CMatrix::Zero(n, n);
    CMatrix q = CMatrix::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        // u+ = delta_{n,m+1} (antiperiodic wrap), u- = -delta_{n,m}
        if (m + 1 < n) {
            p(m + 1, m) = 1.0;
        } else {
            p(0, m) = -1.0;
        }
        q(m, m) = -1.0;
    }
    BogoliubovModes modes = BogoliubovModes::from_plus_minus(p, q);
    modes.omega = std::vector<double>(static_cast<std::size_t>(n), 2.0);
    modes.degenerate_spectrum = true;
    return modes;
}

BogoliubovModes solve_ground_modes(const FieldProfile& fields) {
    const int n = fields.n_sites();
    check_even(n);
    if (std::all_of(fields.g_n.begin(), fields.g_n.end(), [](double g) { return g == 0.0; })) {
        return kink_basis(n);
    }

    const RMatrix m = bdg_coupling_matrix(fields);
    Eigen::BDCSVD<RMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        throw NumericalFailure("singular value decomposition of the BdG matrix failed");
    }
    // Eigen orders singular values descending; modes are stored ascending.
    RMatrix p_real = svd.matrixU().rowwise().reverse();
    RMatrix q_real = svd.matrixV().rowwise().reverse();
    std::vector<double> omega(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        omega[static_cast<std::size_t>(k)] = svd.singularValues()(n - 1 - k);
    }

    // The vacuum of the positive-frequency modes has fermion parity
    // sign(det u+ det u-); the kink vacuum has +1. In the odd case the
    // lowest mode is conjugated (u- -> -u-, omega -> -omega).
    const double parity = p_real.partialPivLu().determinant() * q_real.partialPivLu().determinant();
    bool flipped = false;
    if (parity < 0.0) {
        q_real.col(0) *= -1.0;
        omega[0] = -omega[0];
        flipped = true;
    }

    CMatrix p = p_real.cast<cplx>();
    CMatrix q = q_real.cast<cplx>();
    fix_phases(p, q);
    BogoliubovModes modes = BogoliubovModes::from_plus_minus(p, q);
    modes.parity_flipped = flipped;
    for (int k = 0; k + 1 < n; ++k) {
        if (std::abs(std::abs(omega[static_cast<std::size_t>(k + 1)]) -
                     std::abs(omega[static_cast<std::size_t>(k)])) < kDegenerateGap) {
            modes.degenerate_spectrum = true;
        }
    }
    modes.omega = std::move(omega);
    return modes;
}

double ground_energy(const BogoliubovModes& modes) {
    if (!modes.omega) {
        throw InvalidArgument("ground_energy needs stationary modes");
    }
    double e = 0.0;
    for (double w : *modes.omega) {
        e -= 0.5 * w;
    }
    return e;
}

BogoliubovModes with_mode_phases(const BogoliubovModes& modes, const std::vector<double>& angles) {
    if (static_cast<Eigen::Index>(angles.size()) != modes.u.cols()) {
        throw InvalidArgument("with_mode_phases: one angle per mode required");
    }
    BogoliubovModes out = modes;
    for (Eigen::Index m = 0; m < modes.u.cols(); ++m) {
        const cplx phase = std::polar(1.0, angles[static_cast<std::size_t>(m)]);
        out.u.col(m) *= phase;
        out.v.col(m) *= phase;
    }
    return out;
}

OverlapPair bogoliubov_overlap(const BogoliubovModes& target, const BogoliubovModes& reference) {
    if (target.n_sites != reference.n_sites) {
        throw InvalidArgument("bogoliubov_overlap: size mismatch");
    }
    OverlapPair o;
    o.U = reference.u.adjoint() * target.u + reference.v.adjoint() * target.v;
    o.V = reference.v.transpose() * target.u + reference.u.transpose() * target.v;
    return o;
}

OverlapPair kink_overlap(const BogoliubovModes& target) {
    const int n = target.n_sites;
    check_even(n);
    const CMatrix p = target.u_plus();
    const CMatrix q = target.u_minus();
    OverlapPair o;
    o.U.resize(n, n);
    o.V.resize(n, n);
    for (int a = 0; a < n; ++a) {
        for (int m = 0; m < n; ++m) {
            // site m+1 of u+, with the antiperiodic wrap for the last bond
            const cplx p_next = (m + 1 < n) ? p(m + 1, a) : -p(0, a);
            o.U(m, a) = 0.5 * (p_next - q(m, a));
            o.V(m, a) = 0.5 * (p_next + q(m, a));
        }
    }
    return o;
}

double ground_kink_density(const OverlapPair& overlap) {
    const auto n = overlap.V.cols();
    if (n == 0) {
        throw InvalidArgument("ground_kink_density: empty overlap");
    }
    return overlap.V.squaredNorm() / static_cast<double>(n);
}

PairWavefunction pair_wavefunction(const OverlapPair& overlap, double tikhonov) {
    const auto n = overlap.U.rows();
    PairWavefunction z;
    z.n_sites = static_cast<int>(n);
    Eigen::BDCSVD<CMatrix> svd(overlap.U);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    const double smin = s.size() > 0 ? s(s.size() - 1) : 0.0;
    z.singular_value_ratio = smax > 0.0 ? smin / smax : 0.0;

    CMatrix raw;
    if (tikhonov > 0.0) {
        // (U^*)^{-1} ~ U^T (U^* U^T + lambda^2)^{-1}
        const CMatrix ustar = overlap.U.conjugate();
        const CMatrix gram = ustar * overlap.U.transpose() +
                             tikhonov * tikhonov * CMatrix::Identity(n, n);
        // Z = V^* U^T gram^{-1}  ->  Z^T = gram^{-T} (V^* U^T)^T
        const CMatrix rhs = (overlap.V.conjugate() * overlap.U.transpose()).transpose();
        raw = gram.transpose().partialPivLu().solve(rhs).transpose();
        z.regularized = true;
        z.regularization = tikhonov;
    } else {
        if (z.singular_value_ratio < kSingularOverlapRatio) {
            throw SingularOverlap("overlap matrix U is singular: the state is orthogonal to the kink vacuum",
                                  z.singular_value_ratio);
        }
        // Z^T = (U^dagger)^{-1} V^dagger
        raw = overlap.U.adjoint().partialPivLu().solve(overlap.V.adjoint()).transpose();
    }
    z.Z = 0.5 * (raw - raw.transpose());
    return z;
}

}  // namespace rtfim
