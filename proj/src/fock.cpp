#include "cattomo/fock.hpp"

#include <cmath>
#include <stdexcept>

#include "cattomo/errors.hpp"

namespace cattomo {

int default_dimension(cplx alpha) {
  const double a2 = std::norm(alpha);
  return std::max(32, static_cast<int>(std::ceil(8.0 * a2)) + 20);
}

std::vector<double> laguerre_table(int n_max, int k, double x) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n_max, 0) + 1));
  out[0] = 1.0;
  if (n_max >= 1) out[1] = 1.0 + k - x;
  for (int n = 1; n < n_max; ++n) {
    out[n + 1] = ((2.0 * n + 1.0 + k - x) * out[n] - (n + k) * out[n - 1]) / (n + 1.0);
  }
  return out;
}

namespace {

void check_args(cplx gamma, int dim) {
  if (dim < 1) throw std::invalid_argument("displacement_matrix: dim must be >= 1");
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag()))
    throw std::invalid_argument("displacement_matrix: gamma must be finite");
}

// |<m|D(gamma)|n>| for m >= n with the Laguerre sign folded in:
// sqrt(n!/m!) |gamma|^(m-n) e^(-|gamma|^2/2) L_n^(m-n)(|gamma|^2), evaluated in
// log space so factorials past 170 and large Laguerre values stay finite.
template <typename Fn>
void for_each_lower(double mod, int dim, Fn&& emit) {
  const double x = mod * mod;
  const double log_mod = std::log(mod);
  for (int k = 0; k < dim; ++k) {
    const auto lag = laguerre_table(dim - 1 - k, k, x);
    for (int n = 0; n + k < dim; ++n) {
      const int m = n + k;
      const double l = lag[n];
      if (l == 0.0) {
        emit(m, n, 0.0);
        continue;
      }
      const double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) + k * log_mod -
                             0.5 * x + std::log(std::abs(l));
      emit(m, n, std::copysign(std::exp(log_mag), l));
    }
  }
}

}  // namespace

OperatorMatrix displacement_matrix(cplx gamma, int dim) {
  check_args(gamma, dim);
  OperatorMatrix out = OperatorMatrix::Zero(dim, dim);
  const double mod = std::abs(gamma);
  if (mod == 0.0) return OperatorMatrix::Identity(dim, dim);
  const double phase = std::arg(gamma);
  for_each_lower(mod, dim, [&](int m, int n, double value) {
    const int k = m - n;
    // <m|D|n> = value e^{i k phase};  <n|D|m> = value (-1)^k e^{-i k phase}.
    const cplx rot = std::polar(1.0, k * phase);
    out(m, n) = value * rot;
    if (k != 0) out(n, m) = ((k % 2) ? -value : value) * std::conj(rot);
  });
  return out;
}

Eigen::MatrixXd real_displacement_matrix(double x, int dim) {
  check_args(cplx(x, 0.0), dim);
  if (x < 0.0) throw std::invalid_argument("real_displacement_matrix: x must be >= 0");
  if (x == 0.0) return Eigen::MatrixXd::Identity(dim, dim);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for_each_lower(x, dim, [&](int m, int n, double value) {
    const int k = m - n;
    out(m, n) = value;
    if (k != 0) out(n, m) = (k % 2) ? -value : value;
  });
  return out;
}

CoherentState coherent_state(cplx alpha, int dim) {
  if (dim < 1) throw std::invalid_argument("coherent_state: dim must be >= 1");
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw std::invalid_argument("coherent_state: alpha must be finite");
  CoherentState out;
  out.amps = FockVector::Zero(dim);
  const double mod = std::abs(alpha);
  if (mod == 0.0) {
    out.amps(0) = 1.0;
    return out;
  }
  const double phase = std::arg(alpha);
  const double log_mod = std::log(mod);
  for (int n = 0; n < dim; ++n) {
    const double log_mag = -0.5 * mod * mod + n * log_mod - 0.5 * std::lgamma(n + 1.0);
    out.amps(n) = std::polar(std::exp(log_mag), n * phase);
  }
  out.norm_deficit = 1.0 - out.amps.squaredNorm();
  out.truncation_warning = out.norm_deficit > kCoherentDeficitTol;
  return out;
}

FockVector even_odd_coherent(cplx alpha, Parity parity, int dim) {
  if (parity == Parity::Odd && alpha == cplx(0.0, 0.0))
    throw DegenerateInput("even_odd_coherent: odd coherent state is undefined at alpha = 0");
  const FockVector plus = coherent_state(alpha, dim).amps;
  const FockVector minus = coherent_state(-alpha, dim).amps;
  FockVector v = parity == Parity::Even ? FockVector(plus + minus) : FockVector(plus - minus);
  // Rebuild from parity so the vanishing components are exactly zero.
  for (int n = parity == Parity::Even ? 1 : 0; n < dim; n += 2) v(n) = 0.0;
  const double norm = v.norm();
  if (norm == 0.0) throw DegenerateInput("even_odd_coherent: state vanishes inside truncation");
  return v / norm;
}

OperatorMatrix creation_operator(int dim) {
  OperatorMatrix a_dag = OperatorMatrix::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) a_dag(n + 1, n) = std::sqrt(n + 1.0);
  return a_dag;
}

}  // namespace cattomo
