#pragma once

#include <Eigen/Dense>

#include <complex>

namespace rtfim {

/// Pfaffian of a complex antisymmetric matrix by Parlett-Reid tridiagonal
/// reduction with partial pivoting (Householder-free LTL^T form).
/// Only the strictly lower triangle is trusted; odd sizes give 0.
std::complex<double> pfaffian(Eigen::MatrixXcd a);

}  // namespace rtfim
