#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cattomo/fock.hpp"

namespace cattomo {

/// Samples of one Wigner-matrix element on a rectangular phase-space grid.
/// values(i, j) belongs to beta = re_axis[i] + 1i * im_axis[j].
struct WignerGrid {
  std::vector<double> re_axis;
  std::vector<double> im_axis;
  Eigen::MatrixXcd values;

  /// Header `re,im,w_re,w_im`, one row per node, re-major.
  std::string to_csv() const;
  static WignerGrid from_csv(const std::string& text);
  nlohmann::json to_json() const;
  static WignerGrid from_json(const nlohmann::json& j);
};

/// (2/pi) Tr[rho D(beta) P D^dag(beta)], P the parity operator. Diagonal
/// blocks integrate to their trace over the plane.
cplx wigner_point(const OperatorMatrix& rho_block, cplx beta);

std::vector<double> linspace(double lo, double hi, int points);

WignerGrid wigner_grid(const OperatorMatrix& rho_block, const std::vector<double>& re_axis,
                       const std::vector<double>& im_axis);
/// Single-threaded reference for wigner_grid.
WignerGrid wigner_grid_serial(const OperatorMatrix& rho_block, const std::vector<double>& re_axis,
                              const std::vector<double>& im_axis);

}  // namespace cattomo
