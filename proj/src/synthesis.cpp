#include "cattomo/synthesis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cattomo/errors.hpp"

namespace cattomo {

void PulseConfig::validate() const {
  if (!(zeta_tilde >= 0.0)) throw std::invalid_argument("PulseConfig: zeta_tilde must be >= 0");
  if (!(eps_tilde >= 0.0)) throw std::invalid_argument("PulseConfig: eps_tilde must be >= 0");
  if (!(d > 0.0)) throw std::invalid_argument("PulseConfig: d must be > 0");
  if (quad_points < 1 || quad_points % 2 == 0)
    throw std::invalid_argument("PulseConfig: quad_points must be odd and >= 1");
}

SpinFockState SpinFockState::from_components(const FockVector& up, const FockVector& down) {
  if (up.size() != down.size() || up.size() == 0)
    throw std::invalid_argument("SpinFockState: components must share a non-zero dimension");
  SpinFockState s;
  const auto split = [](const FockVector& v, cplx& c, FockVector& psi) {
    const double norm = v.norm();
    if (norm == 0.0) {
      c = 0.0;
      psi = FockVector::Zero(v.size());
      psi(0) = 1.0;
    } else {
      c = norm;
      psi = v / norm;
    }
  };
  split(up, s.c1, s.psi1);
  split(down, s.c2, s.psi2);
  return s;
}

void SpinFockState::validate(double tol) const {
  if (psi1.size() != psi2.size() || psi1.size() == 0)
    throw std::invalid_argument("SpinFockState: psi1 and psi2 must share a non-zero dimension");
  if (std::abs(std::norm(c1) + std::norm(c2) - 1.0) > tol)
    throw std::invalid_argument("SpinFockState: |c1|^2 + |c2|^2 != 1");
  if (std::abs(psi1.norm() - 1.0) > tol || std::abs(psi2.norm() - 1.0) > tol)
    throw std::invalid_argument("SpinFockState: psi_i must be normalized");
}

BlockDensity::BlockDensity(int dim) {
  for (auto& b : blocks_) b = OperatorMatrix::Zero(dim, dim);
}

BlockDensity::BlockDensity(OperatorMatrix rho11, OperatorMatrix rho12, OperatorMatrix rho21,
                           OperatorMatrix rho22)
    : blocks_{std::move(rho11), std::move(rho12), std::move(rho21), std::move(rho22)} {
  const auto d = blocks_[0].rows();
  for (const auto& b : blocks_)
    if (b.rows() != d || b.cols() != d)
      throw std::invalid_argument("BlockDensity: blocks must be square and equal-sized");
}

Eigen::MatrixXcd BlockDensity::full() const {
  const int d = dim();
  Eigen::MatrixXcd m(2 * d, 2 * d);
  m.topLeftCorner(d, d) = block(0, 0);
  m.topRightCorner(d, d) = block(0, 1);
  m.bottomLeftCorner(d, d) = block(1, 0);
  m.bottomRightCorner(d, d) = block(1, 1);
  return m;
}

BlockDensity BlockDensity::from_full(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0)
    throw std::invalid_argument("BlockDensity::from_full: need an even square matrix");
  const auto d = m.rows() / 2;
  return BlockDensity(m.topLeftCorner(d, d), m.topRightCorner(d, d), m.bottomLeftCorner(d, d),
                      m.bottomRightCorner(d, d));
}

double BlockDensity::trace() const { return (block(0, 0).trace() + block(1, 1).trace()).real(); }

BlockDensity BlockDensity::resized(int new_dim) const {
  BlockDensity out(new_dim);
  const int keep = std::min(new_dim, dim());
  for (int i = 0; i < 4; ++i) out.blocks_[i].topLeftCorner(keep, keep) = blocks_[i].topLeftCorner(keep, keep);
  return out;
}

BlockDensity::Check BlockDensity::check() const {
  Check c;
  const Eigen::MatrixXcd m = full();
  c.hermiticity = (m - m.adjoint()).cwiseAbs().maxCoeff();
  c.trace_error = std::abs(m.trace().real() - 1.0);
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

BlockDensity pure_to_density(const SpinFockState& state) {
  state.validate();
  const FockVector u = state.up();
  const FockVector v = state.down();
  return BlockDensity(u * u.adjoint(), u * v.adjoint(), v * u.adjoint(), v * v.adjoint());
}

namespace {

// D(alpha sigma_x) in the spin-major basis (up, down).
Eigen::MatrixXcd spin_x_displacement(cplx alpha, int dim) {
  const OperatorMatrix dp = displacement_matrix(alpha, dim);
  const OperatorMatrix dm = displacement_matrix(-alpha, dim);
  Eigen::MatrixXcd u(2 * dim, 2 * dim);
  u.topLeftCorner(dim, dim) = 0.5 * (dp + dm);
  u.bottomRightCorner(dim, dim) = 0.5 * (dp + dm);
  u.topRightCorner(dim, dim) = 0.5 * (dp - dm);
  u.bottomLeftCorner(dim, dim) = 0.5 * (dp - dm);
  return u;
}

void check_loss(double loss, const char* where) {
  if (loss > kDisplacementLossTol) {
    std::ostringstream os;
    os << where << ": truncated space lost norm " << loss << " (> " << kDisplacementLossTol
       << "); increase the Fock dimension";
    throw TruncationOverflow(os.str());
  }
}

}  // namespace

SpinFockState ideal_entangle(const SpinFockState& state, cplx alpha) {
  state.validate();
  if (alpha == cplx(0.0, 0.0)) return state;
  const int d = state.dim();
  const FockVector plus = (state.up() + state.down()) / std::sqrt(2.0);
  const FockVector minus = (state.up() - state.down()) / std::sqrt(2.0);
  const FockVector plus_d = displacement_matrix(alpha, d) * plus;
  const FockVector minus_d = displacement_matrix(-alpha, d) * minus;
  const double norm2 = plus_d.squaredNorm() + minus_d.squaredNorm();
  check_loss(1.0 - norm2, "ideal_entangle");
  const double scale = 1.0 / std::sqrt(norm2 * 2.0);
  return SpinFockState::from_components(scale * (plus_d + minus_d), scale * (plus_d - minus_d));
}

BlockDensity ideal_entangle(const BlockDensity& rho, cplx alpha) {
  if (alpha == cplx(0.0, 0.0)) return rho;
  const Eigen::MatrixXcd u = spin_x_displacement(alpha, rho.dim());
  Eigen::MatrixXcd out = u * rho.full() * u.adjoint();
  const double tr = out.trace().real();
  check_loss(rho.trace() - tr, "ideal_entangle");
  return BlockDensity::from_full(out * (rho.trace() / tr));
}

GaussHermiteRule gauss_hermite(int points) {
  if (points < 1) throw std::invalid_argument("gauss_hermite: points must be >= 1");
  // Golub-Welsch: eigen-decomposition of the Hermite Jacobi matrix.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    jacobi(k, k - 1) = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = std::sqrt(kPi) * es.eigenvectors().row(0).array().square().matrix().transpose();
  if (points % 2 == 1) rule.nodes(points / 2) = 0.0;
  return rule;
}

BlockDensity gaussian_traced_entangle(const BlockDensity& rho0, const PulseConfig& cfg) {
  cfg.validate();
  const int d = rho0.dim();
  if (cfg.eps_tilde == 0.0) return rho0;
  const Eigen::MatrixXcd u = spin_x_displacement(cfg.alpha(), d);
  const Eigen::MatrixXcd entangled = u * rho0.full() * u.adjoint();

  const GaussHermiteRule rule = gauss_hermite(cfg.quad_points);
  const int nodes = cfg.quad_points;
  // Per-node terms are summed in node order afterwards so the result does not
  // depend on the thread schedule.
  std::vector<Eigen::MatrixXcd> terms(static_cast<std::size_t>(nodes));
#pragma omp parallel for schedule(dynamic)
  for (int q = 0; q < nodes; ++q) {
    const double p = cfg.d * rule.nodes(q);
    const OperatorMatrix kick = displacement_matrix(cplx(0.0, -cfg.eps_tilde * p), d);
    Eigen::MatrixXcd k2 = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
    k2.topLeftCorner(d, d) = kick;
    k2.bottomRightCorner(d, d) = kick;
    terms[q] = (rule.weights(q) / std::sqrt(kPi)) * (k2 * entangled * k2.adjoint());
  }
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  for (const auto& t : terms) acc += t;

  const double tr = acc.trace().real();
  check_loss(rho0.trace() - tr, "gaussian_traced_entangle");
  acc *= rho0.trace() / tr;
  return BlockDensity::from_full(0.5 * (acc + acc.adjoint()));
}

Eigen::Matrix2cd spin_rotation_matrix(double angle, double axis_phase) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd u;
  u << c, -i * s * std::polar(1.0, -axis_phase), -i * s * std::polar(1.0, axis_phase), c;
  return u;
}

SpinFockState spin_rotation(const SpinFockState& state, double angle, double axis_phase) {
  const Eigen::Matrix2cd u = spin_rotation_matrix(angle, axis_phase);
  const FockVector a = state.up();
  const FockVector b = state.down();
  return SpinFockState::from_components(u(0, 0) * a + u(0, 1) * b, u(1, 0) * a + u(1, 1) * b);
}

BlockDensity spin_rotation(const BlockDensity& rho, double angle, double axis_phase) {
  const Eigen::Matrix2cd u = spin_rotation_matrix(angle, axis_phase);
  BlockDensity out(rho.dim());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const cplx w = u(i, k) * std::conj(u(j, l));
          if (w != cplx(0.0, 0.0)) out.block(i, j) += w * rho.block(k, l);
        }
  return out;
}

namespace {

SpinFockState vacuum_up(int dim) {
  if (dim < 1) throw std::invalid_argument("synthesis: dim must be >= 1");
  SpinFockState s;
  s.c1 = 1.0;
  s.c2 = 0.0;
  s.psi1 = FockVector::Zero(dim);
  s.psi1(0) = 1.0;
  s.psi2 = s.psi1;
  return s;
}

}  // namespace

SpinFockState synthesize_entangled(cplx alpha, int dim) { return ideal_entangle(vacuum_up(dim), alpha); }

SpinFockState synthesize_cat(cplx alpha, int dim) {
  // |+>_x -> |up>, |->_x -> |down> up to a common phase: R_x(pi) R_y(pi/2) = -iH.
  SpinFockState s = synthesize_entangled(alpha, dim);
  s = spin_rotation(s, kPi / 2, kPi / 2);
  return spin_rotation(s, kPi, 0.0);
}

SpinFockState cat_state(cplx alpha, int dim) {
  SpinFockState s;
  s.c1 = 1.0 / std::sqrt(2.0);
  s.c2 = 1.0 / std::sqrt(2.0);
  const FockVector plus = coherent_state(alpha, dim).amps;
  const FockVector minus = coherent_state(-alpha, dim).amps;
  s.psi1 = plus / plus.norm();
  s.psi2 = minus / minus.norm();
  return s;
}

Eigen::Matrix2cd reduced_spin(const BlockDensity& rho) {
  Eigen::Matrix2cd r;
  r << rho.block(0, 0).trace(), rho.block(0, 1).trace(), rho.block(1, 0).trace(),
      rho.block(1, 1).trace();
  return r;
}

double spin_entropy(const BlockDensity& rho) {
  const Eigen::Matrix2cd r = reduced_spin(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double mean_excitation(const BlockDensity& rho) {
  double n = 0.0;
  for (int k = 0; k < rho.dim(); ++k) n += k * (rho.block(0, 0)(k, k) + rho.block(1, 1)(k, k)).real();
  return n;
}

}  // namespace cattomo
