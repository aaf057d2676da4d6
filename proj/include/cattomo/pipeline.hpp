#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cattomo/serialize.hpp"
#include "cattomo/tomography.hpp"

namespace cattomo {

struct SynthesisSection {
  std::optional<cplx> alpha;
  std::optional<PulseConfig> pulse;  // exact Gaussian-trace route
  std::string form = "cat";          // "cat" or "entangled"
  int dim = 0;                       // 0: default for alpha
};

struct ScanSection {
  double gamma_mod = 1.2;
  int phase_count = 0;  // 0: 2 s_max + 3
  std::int64_t samples_per_phase = 1'000'000;
  double eta = 1.0;
  std::uint64_t seed = 1;
  bool exact_mode = false;
  int n_max = 0;  // 0: n_c + 8
  double omega_b = 1.0;
  double g = 2.00231930436;
  std::int64_t rotation_samples = 0;  // 0: samples_per_phase
  bool project_to_cutoff = false;
};

struct TomographySection {
  int n_c = 12;
  int s_max = -1;
  double second_rotation_phase = kPi / 3;
  double branch_tolerance = 0.05;
};

struct OutputSection {
  GridSpec grid;
};

struct PipelineConfig {
  SynthesisSection synthesis;
  ScanSection scan;
  TomographySection tomography;
  OutputSection output;
  nlohmann::json raw;  // canonical form used for hashing

  /// Validates every field; ConfigError messages name the offending path.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::string& path);

  int s_max() const { return tomography.s_max < 0 ? tomography.n_c : tomography.s_max; }
  int n_max() const { return scan.n_max > 0 ? scan.n_max : tomography.n_c + 8; }
  int phase_count() const { return scan.phase_count > 0 ? scan.phase_count : 2 * s_max() + 3; }
  int dim() const;
  std::string hash() const;
};

/// Lowercase hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<std::pair<std::string, std::string>> outputs;  // stage, path
  std::vector<std::string> completed_stages;
  std::optional<std::string> failure;

  nlohmann::json to_json() const;
};

struct SynthesisOutput {
  StateVariant state;
  nlohmann::json summary;
};

SynthesisOutput run_synthesis(const PipelineConfig& cfg);
PhaseScanDataset run_scan(const BlockDensity& rho, const PipelineConfig& cfg);
RotationData run_rotations(const BlockDensity& rho, const PipelineConfig& cfg);
ReconstructionReport run_reconstruction(const PhaseScanDataset& data,
                                        const std::optional<RotationData>& rotations,
                                        const PipelineConfig& cfg,
                                        const std::optional<BlockDensity>& truth);

/// Project onto span{|0>..|n_c>} and renormalize; returns the lost weight.
double project_to_cutoff(BlockDensity& rho, int n_c);

// Subcommands. Each writes into `out` and returns the process exit code.
int cmd_synthesize(const PipelineConfig& cfg, const std::filesystem::path& out);
int cmd_scan(const std::filesystem::path& state_file, const PipelineConfig& cfg,
             const std::filesystem::path& out);
int cmd_reconstruct(const std::filesystem::path& dataset_file,
                    const std::optional<std::filesystem::path>& rotation_file,
                    const std::optional<std::filesystem::path>& truth_file,
                    const PipelineConfig& cfg, const std::filesystem::path& out);
int cmd_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out);

/// Exit code for an exception escaping a stage.
int exit_code_for(const std::exception& e);

}  // namespace cattomo
