#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cattomo/measurement.hpp"
#include "cattomo/wigner.hpp"

namespace cattomo {

/// Fourier coefficients P^(i)(n, s) of the phase-scan distributions.
struct FourierTable {
  int s_max = 0;
  double gamma_mod = 0.0;
  // values[i](n, s)
  std::array<Eigen::MatrixXcd, 2> values;

  int n_rows() const { return static_cast<int>(values[0].rows()); }
};

FourierTable fourier_reduce(const PhaseScanDataset& data, int s_max);

/// G^(s)_{n,m} = d_{m+s,n} d_{m,n} with d the real-argument displacement
/// elements, for n = 0..N and m = 0..N_c - s. With eta < 1 the rows are
/// extended over every contributing excitation number and folded through the
/// binomial smearing matrix.
Eigen::MatrixXd build_g(int s, double gamma_mod, int n_rows_max, int n_c, double eta);

struct GSystem {
  int n_c = 0;
  int n_max = 0;
  double gamma_mod = 0.0;
  double eta = 1.0;
  std::vector<Eigen::MatrixXd> g;  // indexed by s
  std::vector<Eigen::MatrixXd> m;  // least-squares inverses (G^T G)^-1 G^T
  std::vector<double> condition;

  static GSystem build(double gamma_mod, int n_max, int n_c, int s_max, double eta);
  static GSystem build_serial(double gamma_mod, int n_max, int n_c, int s_max, double eta);
  int s_max() const { return static_cast<int>(g.size()) - 1; }
};

/// Rows <m+s|rho^(ii)|m>, m = 0..N_c - s, Hermitian-completed.
std::array<OperatorMatrix, 2> invert_diagonals(const FourierTable& f, const GSystem& g);

struct Moduli {
  double c1 = 0.0;
  double c2 = 0.0;
  double raw_sum_squares = 0.0;  // before renormalization
};
Moduli recover_moduli(const FourierTable& f);

struct Overlap {
  double r = 0.0;
  double beta = 0.0;
  bool beta_defined = true;
  FockVector psi1;
  FockVector psi2;
  double purity1 = 1.0;
  double purity2 = 1.0;
  std::vector<std::string> warnings;
};

/// Rotate v so its largest-magnitude amplitude is real positive.
FockVector gauge_fix(const FockVector& v);

/// Dominant pure component of rho written as c1|psi1>|up> + c2|psi2>|down>
/// in the reconstruction gauge: psi_i gauge-fixed, c1 real >= 0.
SpinFockState canonical_pure(const BlockDensity& rho);

Overlap extract_overlap(const OperatorMatrix& rho11, const OperatorMatrix& rho22, double c1_mod,
                        double c2_mod);

/// Predicted up-spin population after exp(-i a/2 (cos p sx + sin p sy)).
double predicted_pbar1(double theta, double r, double beta, double c1_mod, double c2_mod,
                       double angle, double axis_phase);

struct ThetaResult {
  double theta = 0.0;
  double alternative = 0.0;  // rejected arcsin branch
  double residual = 0.0;
  bool clamped = false;
  bool ambiguous = false;  // no second rotation and branches differ
};

struct ThetaOptions {
  double floor = 1e-9;  // minimum r |c1| |c2|
  double branch_tolerance = 0.05;
};

ThetaResult recover_theta(const RotationMeasurement& primary, double r, double beta, double c1_mod,
                          double c2_mod, const std::optional<RotationMeasurement>& secondary,
                          const ThetaOptions& opts = {});

struct GridSpec {
  double re_min = -3.0, re_max = 3.0;
  double im_min = -3.0, im_max = 3.0;
  int points = 61;
};

struct ReconstructionOptions {
  int n_c = 12;
  int s_max = -1;  // -1: n_c
  ThetaOptions theta;
  bool physicality_projection = true;
  std::optional<GridSpec> grid;
};

struct WignerSet {
  // [0] = 11, [1] = 22, [2] = 12; tilde = raw, normalized = divided by c_i c_j^*.
  std::array<WignerGrid, 3> tilde;
  std::array<WignerGrid, 3> normalized;
};

struct ReconstructionReport {
  std::array<OperatorMatrix, 2> diagonal_blocks;  // as inverted, Hermitized
  std::optional<BlockDensity> rho_rec;            // absent when theta unrecovered
  double c1_mod = 0.0, c2_mod = 0.0;
  std::optional<double> theta;
  double r = 0.0, beta = 0.0;
  std::vector<double> condition_numbers;
  std::optional<double> fidelity;
  std::optional<double> trace_distance;
  std::optional<double> diagonal_max_error;  // vs truth, on the common support
  std::optional<std::string> theta_failure;
  std::optional<WignerSet> wigner;
  std::optional<WignerSet> wigner_truth;
  std::vector<std::string> diagnostics;

  nlohmann::json to_json() const;
  static ReconstructionReport from_json(const nlohmann::json& j);
};

/// Physicality projection: clip negative eigenvalues, restore the trace.
/// Returns true when the block was modified.
bool project_psd(OperatorMatrix& block, double threshold);

ReconstructionReport reconstruct(const PhaseScanDataset& data,
                                 const std::optional<RotationData>& rotations,
                                 const ReconstructionOptions& opts,
                                 const std::optional<BlockDensity>& truth = std::nullopt);

}  // namespace cattomo
