#include "cattomo/wigner.hpp"

#include <array>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cattomo/serialize.hpp"

namespace cattomo {

// D(beta) P D^dag(beta) = D(2 beta) P, so the displaced-parity expectation
// reduces to sum_{k,l} rho_kl (-1)^k <l|D(2 beta)|k>. Each element of the
// truncated D(2 beta) is exact, so no extended space is needed.
cplx wigner_point(const OperatorMatrix& rho_block, cplx beta) {
  if (rho_block.rows() != rho_block.cols())
    throw std::invalid_argument("wigner_point: block must be square");
  const int dim = static_cast<int>(rho_block.rows());
  const OperatorMatrix d2 = displacement_matrix(2.0 * beta, dim);
  cplx acc = 0.0;
  for (int k = 0; k < dim; ++k) {
    cplx row = 0.0;
    for (int l = 0; l < dim; ++l) row += rho_block(k, l) * d2(l, k);
    acc += (k % 2) ? -row : row;
  }
  return (2.0 / kPi) * acc;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument("linspace: need at least one point");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
  return out;
}

namespace {

void check_axes(const std::vector<double>& re_axis, const std::vector<double>& im_axis) {
  if (re_axis.empty() || im_axis.empty())
    throw std::invalid_argument("wigner_grid: axes must be non-empty");
}

}  // namespace

WignerGrid wigner_grid(const OperatorMatrix& rho_block, const std::vector<double>& re_axis,
                       const std::vector<double>& im_axis) {
  check_axes(re_axis, im_axis);
  WignerGrid grid{re_axis, im_axis, Eigen::MatrixXcd(re_axis.size(), im_axis.size())};
  const long n_re = static_cast<long>(re_axis.size());
  const long n_im = static_cast<long>(im_axis.size());
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (long i = 0; i < n_re; ++i)
    for (long j = 0; j < n_im; ++j)
      grid.values(i, j) = wigner_point(rho_block, cplx(re_axis[i], im_axis[j]));
  return grid;
}

WignerGrid wigner_grid_serial(const OperatorMatrix& rho_block, const std::vector<double>& re_axis,
                              const std::vector<double>& im_axis) {
  check_axes(re_axis, im_axis);
  WignerGrid grid{re_axis, im_axis, Eigen::MatrixXcd(re_axis.size(), im_axis.size())};
  for (std::size_t i = 0; i < re_axis.size(); ++i)
    for (std::size_t j = 0; j < im_axis.size(); ++j)
      grid.values(i, j) = wigner_point(rho_block, cplx(re_axis[i], im_axis[j]));
  return grid;
}

std::string WignerGrid::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "re,im,w_re,w_im\n";
  for (std::size_t i = 0; i < re_axis.size(); ++i)
    for (std::size_t j = 0; j < im_axis.size(); ++j)
      os << re_axis[i] << ',' << im_axis[j] << ',' << values(i, j).real() << ','
         << values(i, j).imag() << '\n';
  return os.str();
}

WignerGrid WignerGrid::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "re,im,w_re,w_im")
    throw std::invalid_argument("WignerGrid::from_csv: bad header");
  std::vector<std::array<double, 4>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<double, 4> row{};
    std::istringstream ls(line);
    std::string cell;
    for (auto& v : row) {
      if (!std::getline(ls, cell, ',')) throw std::invalid_argument("WignerGrid::from_csv: short row");
      v = std::stod(cell);
    }
    rows.push_back(row);
  }
  // Axes in first-appearance order; rows are re-major.
  WignerGrid grid;
  for (const auto& row : rows) {
    if (grid.re_axis.empty() || grid.re_axis.back() != row[0]) grid.re_axis.push_back(row[0]);
    if (grid.re_axis.size() == 1) grid.im_axis.push_back(row[1]);
  }
  if (grid.re_axis.size() * grid.im_axis.size() != rows.size())
    throw std::invalid_argument("WignerGrid::from_csv: rows do not form a grid");
  grid.values.resize(static_cast<long>(grid.re_axis.size()), static_cast<long>(grid.im_axis.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long i = static_cast<long>(r / grid.im_axis.size());
    const long j = static_cast<long>(r % grid.im_axis.size());
    grid.values(i, j) = cplx(rows[r][2], rows[r][3]);
  }
  return grid;
}

nlohmann::json WignerGrid::to_json() const {
  nlohmann::json flat = nlohmann::json::array();
  for (std::size_t i = 0; i < re_axis.size(); ++i)
    for (std::size_t j = 0; j < im_axis.size(); ++j)
      flat.push_back(cattomo::to_json(values(static_cast<long>(i), static_cast<long>(j))));
  return {{"re_axis", re_axis}, {"im_axis", im_axis}, {"values", flat}};
}

WignerGrid WignerGrid::from_json(const nlohmann::json& j) {
  WignerGrid grid;
  grid.re_axis = j.at("re_axis").get<std::vector<double>>();
  grid.im_axis = j.at("im_axis").get<std::vector<double>>();
  const auto& flat = j.at("values");
  if (flat.size() != grid.re_axis.size() * grid.im_axis.size())
    throw std::invalid_argument("WignerGrid::from_json: value count does not match axes");
  grid.values.resize(static_cast<long>(grid.re_axis.size()), static_cast<long>(grid.im_axis.size()));
  for (std::size_t r = 0; r < flat.size(); ++r)
    grid.values(static_cast<long>(r / grid.im_axis.size()), static_cast<long>(r % grid.im_axis.size())) =
        complex_from_json(flat[r]);
  return grid;
}

}  // namespace cattomo
