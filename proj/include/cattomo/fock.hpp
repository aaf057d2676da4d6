#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cattomo {

using cplx = std::complex<double>;
/// Amplitudes over |0>, ..., |D-1>.
using FockVector = Eigen::VectorXcd;
using OperatorMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Default truncation for a coherent amplitude: max(32, ceil(8|alpha|^2) + 20).
int default_dimension(cplx alpha);

/// Associated Laguerre L_n^k(x) for n = 0..n_max, by upward recurrence in n.
std::vector<double> laguerre_table(int n_max, int k, double x);

/// D x D truncation of exp(gamma a^dag - gamma^* a) from the closed-form
/// matrix elements. Every returned element is exact; only the basis is cut.
OperatorMatrix displacement_matrix(cplx gamma, int dim);

/// Real-argument displacement elements d_{a,b} = <a|D(x)|b>, x >= 0 real.
Eigen::MatrixXd real_displacement_matrix(double x, int dim);

struct CoherentState {
  FockVector amps;
  double norm_deficit = 0.0;  // 1 - ||amps||^2
  bool truncation_warning = false;
};

inline constexpr double kCoherentDeficitTol = 1e-8;

CoherentState coherent_state(cplx alpha, int dim);

enum class Parity { Even, Odd };

/// N(|alpha> +- |-alpha>), renormalized inside the truncation.
FockVector even_odd_coherent(cplx alpha, Parity parity, int dim);

/// Fock-basis creation operator (truncated).
OperatorMatrix creation_operator(int dim);

}  // namespace cattomo
