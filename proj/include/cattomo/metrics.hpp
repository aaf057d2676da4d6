#pragma once

#include <Eigen/Dense>

namespace cattomo {

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues
/// are clipped to zero.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& a);

/// Root Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1].
double fidelity(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

/// (1/2) || rho - sigma ||_1.
double trace_distance(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

double max_abs_difference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace cattomo
