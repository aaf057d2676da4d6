#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "cattomo/fock.hpp"

namespace cattomo {

/// Effective pulse areas of the three-step entangling protocol. Only
/// zeta_tilde, eps_tilde and d enter the evolution; `metadata` carries the
/// physical frequencies for provenance.
struct PulseConfig {
  double zeta_tilde = 0.0;  // kappa * integral of zeta(t)
  double eps_tilde = 0.0;   // kappa * integral of epsilon(t)
  double d = 1.0;           // axial momentum width
  int quad_points = 41;     // Gauss-Hermite nodes, odd
  std::map<std::string, double> metadata;

  cplx alpha() const { return {0.0, eps_tilde * zeta_tilde}; }
  void validate() const;
};

/// c1 |psi1>|up> + c2 |psi2>|down>, psi_i unit vectors of equal dimension.
struct SpinFockState {
  cplx c1{1.0, 0.0};
  cplx c2{0.0, 0.0};
  FockVector psi1;
  FockVector psi2;

  int dim() const { return static_cast<int>(psi1.size()); }
  /// c1 psi1 and c2 psi2.
  FockVector up() const { return c1 * psi1; }
  FockVector down() const { return c2 * psi2; }

  /// Split unnormalized spin components into (c_i >= 0 real, unit psi_i).
  /// A vanishing component gets c_i = 0 and psi_i = |0>.
  static SpinFockState from_components(const FockVector& up, const FockVector& down);
  /// Throws std::invalid_argument if the normalization invariants fail.
  void validate(double tol = 1e-10) const;
};

/// 2 x 2 array of D x D cyclotron blocks rho^(ij), i, j in {0 (up), 1 (down)}.
class BlockDensity {
 public:
  BlockDensity() = default;
  explicit BlockDensity(int dim);
  BlockDensity(OperatorMatrix rho11, OperatorMatrix rho12, OperatorMatrix rho21,
               OperatorMatrix rho22);

  int dim() const { return static_cast<int>(blocks_[0].rows()); }
  const OperatorMatrix& block(int i, int j) const { return blocks_[2 * i + j]; }
  OperatorMatrix& block(int i, int j) { return blocks_[2 * i + j]; }

  /// Spin-major 2D x 2D matrix [[rho11, rho12], [rho21, rho22]].
  Eigen::MatrixXcd full() const;
  static BlockDensity from_full(const Eigen::MatrixXcd& m);

  double trace() const;
  /// Zero-pad (or crop) every block to `dim`.
  BlockDensity resized(int dim) const;

  struct Check {
    double hermiticity = 0.0;  // max deviation from rho = rho^dag
    double trace_error = 0.0;  // |Tr - 1|
    double min_eigenvalue = 0.0;
    bool ok(double herm_tol = 1e-12, double trace_tol = 1e-10, double psd_tol = 1e-10) const {
      return hermiticity <= herm_tol && trace_error <= trace_tol && min_eigenvalue >= -psd_tol;
    }
  };
  Check check() const;

 private:
  std::array<OperatorMatrix, 4> blocks_;
};

BlockDensity pure_to_density(const SpinFockState& state);

/// Norm loss tolerated by displacements before TruncationOverflow.
inline constexpr double kDisplacementLossTol = 1e-6;

/// D(alpha sigma_x): the |+>_x spin component is displaced by +alpha and the
/// |->_x component by -alpha.
SpinFockState ideal_entangle(const SpinFockState& state, cplx alpha);
BlockDensity ideal_entangle(const BlockDensity& rho, cplx alpha);

struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // for weight function exp(-u^2); sum = sqrt(pi)
};
GaussHermiteRule gauss_hermite(int points);

/// Axial-traced evolution: Gaussian average over p_z of
/// D(-i eps p) D(i eps zeta sigma_x) rho0 D^dag D^dag.
BlockDensity gaussian_traced_entangle(const BlockDensity& rho0, const PulseConfig& cfg);

/// 2 x 2 spin unitary exp(-i angle/2 (cos(phase) sigma_x + sin(phase) sigma_y)).
Eigen::Matrix2cd spin_rotation_matrix(double angle, double axis_phase);

SpinFockState spin_rotation(const SpinFockState& state, double angle, double axis_phase);
BlockDensity spin_rotation(const BlockDensity& rho, double angle, double axis_phase);

/// |0>|up> -> D(alpha sigma_x) -> R_x(pi) R_y(pi/2): the state
/// (|alpha>|up> + |-alpha>|down>)/sqrt(2), up to a global phase.
SpinFockState synthesize_cat(cplx alpha, int dim);
/// The same cat written down directly from coherent states.
SpinFockState cat_state(cplx alpha, int dim);
/// |0>|up> -> D(alpha sigma_x), the entangled even/odd-coherent state.
SpinFockState synthesize_entangled(cplx alpha, int dim);

/// Reduced spin density matrix Tr_c rho.
Eigen::Matrix2cd reduced_spin(const BlockDensity& rho);
/// Von Neumann entropy (nats) of the reduced spin state.
double spin_entropy(const BlockDensity& rho);
double mean_excitation(const BlockDensity& rho);

}  // namespace cattomo
