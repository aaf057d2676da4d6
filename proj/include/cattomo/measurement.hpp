#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cattomo/synthesis.hpp"

namespace cattomo {

/// Magnetic-bottle readout parameters.
struct BottleConfig {
  double omega_b = 1.0;
  double g = 2.00231930436;
  double eta = 1.0;  // cyclotron detection efficiency
  int n_max = 20;    // highest resolvable excitation N

  void validate() const;
};

struct ScanSettings {
  double gamma_mod = 1.2;
  std::vector<double> phases;
  std::int64_t samples_per_phase = 1'000'000;
  std::uint64_t seed = 0;
  bool exact_mode = false;

  void validate() const;
};

/// K phases uniformly spaced on [0, 2pi).
std::vector<double> uniform_phases(int count);

/// Per-spin-sector table over n = 0..n_max; index [spin][n].
using SpinTable = std::array<std::vector<double>, 2>;

/// Measured (or exact) distributions for one probe phase. In exact mode
/// `probabilities` holds the smeared distributions and `counts` is empty.
struct PhaseRecord {
  double phase = 0.0;
  std::array<std::vector<std::int64_t>, 2> counts;
  SpinTable probabilities;
};

struct PhaseScanDataset {
  ScanSettings settings;
  BottleConfig bottle;
  std::vector<PhaseRecord> records;

  bool exact() const { return settings.exact_mode; }
  /// Empirical frequencies (counts / samples) or exact probabilities.
  SpinTable frequencies(std::size_t k) const;

  nlohmann::json to_json() const;
  static PhaseScanDataset from_json(const nlohmann::json& j);
  /// Columns phase,spin,n,count (or probability in exact mode).
  std::string to_csv() const;
};

/// Axial-frequency shift of the (n, spin) level, in units of omega_b per
/// unit z^2: omega_b (n + g/4 spin). spin is +1 (up) or -1 (down).
double axial_shift(int n, int spin, const BottleConfig& cfg);

/// True when every pair in {0..n_max} x {+1,-1} has a distinct shift.
bool shifts_distinguishable(const BottleConfig& cfg, double tol = 1e-12);

/// P^(i)(n, gamma) = <n| D^dag(gamma) rho^(ii) D(gamma) |n>, n = 0..n_max.
SpinTable ideal_distribution(const BlockDensity& rho, cplx gamma, int n_max);

/// Binomial thinning by detection efficiency eta. Output has the input's length.
std::vector<double> apply_efficiency(const std::vector<double>& p, double eta);
/// (n_out x n_in) matrix B_{n,m} = C(m, n) eta^n (1 - eta)^(m - n).
Eigen::MatrixXd binomial_smearing_matrix(int n_out, int n_in, double eta);

/// Multinomial draw by sequential binomial conditionals.
std::vector<std::int64_t> sample_counts(const std::vector<double>& p, std::int64_t n_samples,
                                        std::uint64_t seed, std::uint64_t stream = 0);

PhaseScanDataset run_phase_scan(const BlockDensity& rho, const ScanSettings& scan,
                                 const BottleConfig& bottle);
PhaseScanDataset run_phase_scan_serial(const BlockDensity& rho, const ScanSettings& scan,
                                       const BottleConfig& bottle);

/// Spin populations (Tr rho^(11), Tr rho^(22)).
std::array<double, 2> spin_populations(const BlockDensity& rho);
/// Sampled spin populations (perfect spin readout).
std::array<double, 2> spin_populations(const BlockDensity& rho, std::int64_t n_samples,
                                       std::uint64_t seed, std::uint64_t stream = 0);

/// Spin populations after a rotation pulse; input to phase recovery.
struct RotationMeasurement {
  double angle = kPi / 2;
  double axis_phase = 0.0;
  double pbar1 = 0.5;
  std::int64_t samples = 0;  // 0 = exact
};

struct RotationData {
  RotationMeasurement primary;
  std::optional<RotationMeasurement> secondary;

  nlohmann::json to_json() const;
  static RotationData from_json(const nlohmann::json& j);
};

/// Rotate, then measure the spin: the primary pulse is (pi/2, 0); the
/// secondary is (pi/2, secondary_phase).
RotationData measure_rotations(const BlockDensity& rho, double secondary_phase,
                               std::int64_t samples, std::uint64_t seed);

}  // namespace cattomo
