#include "rtfim/pfaffian.hpp"

namespace rtfim {

std::complex<double> pfaffian(Eigen::MatrixXcd a) {
    using cplx = std::complex<double>;
    const Eigen::Index n = a.rows();
    if (n % 2 != 0) {
        return 0.0;
    }
    // Rebuild the upper triangle from the lower one so round-off in the
    // caller's matrix cannot break antisymmetry.
    for (Eigen::Index j = 0; j < n; ++j) {
        a(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            a(j, i) = -a(i, j);
        }
    }
    cplx result = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index kp = k + 1;
        double best = std::abs(a(k + 1, k));
        for (Eigen::Index i = k + 2; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                kp = i;
            }
        }
        if (kp != k + 1) {
            a.row(k + 1).swap(a.row(kp));
            a.col(k + 1).swap(a.col(kp));
            result = -result;
        }
        if (a(k + 1, k) == cplx(0.0)) {
            return 0.0;
        }
        result *= a(k, k + 1);
        if (k + 2 < n) {
            const Eigen::Index rest = n - k - 2;
            const Eigen::VectorXcd tau = a.row(k).tail(rest).transpose() / a(k, k + 1);
            const Eigen::VectorXcd col = a.col(k + 1).tail(rest);
            a.bottomRightCorner(rest, rest) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return result;
}

}  // namespace rtfim
