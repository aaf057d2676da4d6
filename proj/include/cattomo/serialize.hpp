#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "cattomo/synthesis.hpp"

namespace cattomo {

// Complex numbers are [re, im] pairs; matrices are arrays of rows.
nlohmann::json to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FockVector& v);
FockVector vector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OperatorMatrix& m);
OperatorMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd real_matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpinFockState& s);
SpinFockState spin_state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BlockDensity& rho);
BlockDensity block_density_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PulseConfig& cfg);
PulseConfig pulse_config_from_json(const nlohmann::json& j);

/// A state file holds either a pure SpinFockState or a BlockDensity.
using StateVariant = std::variant<SpinFockState, BlockDensity>;
nlohmann::json state_file_json(const StateVariant& state);
StateVariant state_from_file_json(const nlohmann::json& j);
BlockDensity as_density(const StateVariant& state);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cattomo
