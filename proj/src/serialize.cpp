#include "cattomo/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cattomo {

nlohmann::json to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex values must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json to_json(const FockVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

FockVector vector_from_json(const nlohmann::json& j) {
  FockVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

nlohmann::json to_json(const OperatorMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

OperatorMatrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  OperatorMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw std::invalid_argument("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    out.push_back(row);
  }
  return out;
}

Eigen::MatrixXd real_matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

nlohmann::json to_json(const SpinFockState& s) {
  return {{"dim", s.dim()}, {"c1", to_json(s.c1)}, {"c2", to_json(s.c2)}, {"psi1", to_json(s.psi1)}, {"psi2", to_json(s.psi2)}};
}

SpinFockState spin_state_from_json(const nlohmann::json& j) {
  SpinFockState s;
  s.c1 = complex_from_json(j.at("c1"));
  s.c2 = complex_from_json(j.at("c2"));
  s.psi1 = vector_from_json(j.at("psi1"));
  s.psi2 = vector_from_json(j.at("psi2"));
  s.validate(1e-9);
  return s;
}

nlohmann::json to_json(const BlockDensity& rho) {
  return {{"dim", rho.dim()},
          {"rho11", to_json(rho.block(0, 0))},
          {"rho12", to_json(rho.block(0, 1))},
          {"rho21", to_json(rho.block(1, 0))},
          {"rho22", to_json(rho.block(1, 1))}};
}

BlockDensity block_density_from_json(const nlohmann::json& j) {
  return BlockDensity(matrix_from_json(j.at("rho11")), matrix_from_json(j.at("rho12")), matrix_from_json(j.at("rho21")),
                      matrix_from_json(j.at("rho22")));
}

nlohmann::json to_json(const PulseConfig& cfg) {
  return {{"zeta_tilde", cfg.zeta_tilde}, {"eps_tilde", cfg.eps_tilde}, {"d", cfg.d},
          {"quad_points", cfg.quad_points}, {"metadata", cfg.metadata}};
}

PulseConfig pulse_config_from_json(const nlohmann::json& j) {
  PulseConfig cfg;
  cfg.zeta_tilde = j.at("zeta_tilde").get<double>();
  cfg.eps_tilde = j.at("eps_tilde").get<double>();
  cfg.d = j.at("d").get<double>();
  cfg.quad_points = j.value("quad_points", 41);
  if (j.contains("metadata")) cfg.metadata = j.at("metadata").get<std::map<std::string, double>>();
  cfg.validate();
  return cfg;
}

nlohmann::json state_file_json(const StateVariant& state) {
  if (const auto* pure = std::get_if<SpinFockState>(&state)) {
    auto j = to_json(*pure);
    j["kind"] = "pure";
    j["density"] = to_json(pure_to_density(*pure));
    return j;
  }
  auto j = to_json(std::get<BlockDensity>(state));
  j["kind"] = "density";
  return j;
}

StateVariant state_from_file_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "pure") return spin_state_from_json(j);
  if (kind == "density") return block_density_from_json(j);
  throw std::invalid_argument("state file: unknown kind '" + kind + "'");
}

BlockDensity as_density(const StateVariant& state) {
  if (const auto* pure = std::get_if<SpinFockState>(&state)) return pure_to_density(*pure);
  return std::get<BlockDensity>(state);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace cattomo
