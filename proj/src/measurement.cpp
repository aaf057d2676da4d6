#include "cattomo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cattomo/errors.hpp"
#include "cattomo/serialize.hpp"

namespace cattomo {

void BottleConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("BottleConfig: eta must lie in (0, 1]");
  if (n_max < 1) throw std::invalid_argument("BottleConfig: n_max must be >= 1");
  if (!(omega_b > 0.0)) throw std::invalid_argument("BottleConfig: omega_b must be > 0");
  if (g == 2.0) throw std::invalid_argument("BottleConfig: g = 2 makes (n+1, down) and (n, up) degenerate");
}

void ScanSettings::validate() const {
  if (!(gamma_mod >= 0.0) || !std::isfinite(gamma_mod))
    throw std::invalid_argument("ScanSettings: gamma_mod must be finite and >= 0");
  if (phases.empty()) throw std::invalid_argument("ScanSettings: at least one phase is required");
  std::vector<double> wrapped;
  for (double p : phases) {
    double w = std::fmod(p, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    wrapped.push_back(w);
  }
  std::sort(wrapped.begin(), wrapped.end());
  for (std::size_t i = 1; i < wrapped.size(); ++i)
    if (wrapped[i] - wrapped[i - 1] < 1e-12)
      throw std::invalid_argument("ScanSettings: phases must be distinct modulo 2 pi");
  if (wrapped.size() > 1 && wrapped.front() + 2.0 * kPi - wrapped.back() < 1e-12)
    throw std::invalid_argument("ScanSettings: phases must be distinct modulo 2 pi");
  if (!exact_mode && samples_per_phase < 1)
    throw std::invalid_argument("ScanSettings: samples_per_phase must be >= 1");
}

std::vector<double> uniform_phases(int count) {
  if (count < 1) throw std::invalid_argument("uniform_phases: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[k] = 2.0 * kPi * k / count;
  return out;
}

SpinTable PhaseScanDataset::frequencies(std::size_t k) const {
  const PhaseRecord& rec = records.at(k);
  if (exact()) return rec.probabilities;
  SpinTable out;
  const double inv = 1.0 / static_cast<double>(settings.samples_per_phase);
  for (int i = 0; i < 2; ++i) {
    out[i].resize(rec.counts[i].size());
    for (std::size_t n = 0; n < rec.counts[i].size(); ++n) out[i][n] = rec.counts[i][n] * inv;
  }
  return out;
}

nlohmann::json PhaseScanDataset::to_json() const {
  nlohmann::json j;
  j["settings"] = {{"gamma_mod", settings.gamma_mod},
                   {"phases", settings.phases},
                   {"samples_per_phase", settings.samples_per_phase},
                   {"seed", settings.seed},
                   {"exact_mode", settings.exact_mode}};
  j["bottle"] = {{"omega_b", bottle.omega_b}, {"g", bottle.g}, {"eta", bottle.eta}, {"n_max", bottle.n_max}};
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json jr{{"phase", r.phase}};
    if (exact())
      jr["probabilities"] = {r.probabilities[0], r.probabilities[1]};
    else
      jr["counts"] = {r.counts[0], r.counts[1]};
    recs.push_back(jr);
  }
  j["records"] = recs;
  return j;
}

PhaseScanDataset PhaseScanDataset::from_json(const nlohmann::json& j) {
  PhaseScanDataset d;
  const auto& s = j.at("settings");
  d.settings.gamma_mod = s.at("gamma_mod").get<double>();
  d.settings.phases = s.at("phases").get<std::vector<double>>();
  d.settings.samples_per_phase = s.at("samples_per_phase").get<std::int64_t>();
  d.settings.seed = s.at("seed").get<std::uint64_t>();
  d.settings.exact_mode = s.at("exact_mode").get<bool>();
  const auto& b = j.at("bottle");
  d.bottle.omega_b = b.at("omega_b").get<double>();
  d.bottle.g = b.at("g").get<double>();
  d.bottle.eta = b.at("eta").get<double>();
  d.bottle.n_max = b.at("n_max").get<int>();
  for (const auto& jr : j.at("records")) {
    PhaseRecord r;
    r.phase = jr.at("phase").get<double>();
    for (int i = 0; i < 2; ++i) {
      if (d.settings.exact_mode)
        r.probabilities[i] = jr.at("probabilities").at(i).get<std::vector<double>>();
      else
        r.counts[i] = jr.at("counts").at(i).get<std::vector<std::int64_t>>();
    }
    d.records.push_back(std::move(r));
  }
  if (d.records.size() != d.settings.phases.size())
    throw std::invalid_argument("PhaseScanDataset: record count does not match phase list");
  return d;
}

std::string PhaseScanDataset::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "phase,spin,n," << (exact() ? "probability" : "count") << '\n';
  for (const auto& r : records)
    for (int i = 0; i < 2; ++i) {
      const std::size_t len = exact() ? r.probabilities[i].size() : r.counts[i].size();
      for (std::size_t n = 0; n < len; ++n) {
        os << r.phase << ',' << (i + 1) << ',' << n << ',';
        if (exact())
          os << r.probabilities[i][n];
        else
          os << r.counts[i][n];
        os << '\n';
      }
    }
  return os.str();
}

double axial_shift(int n, int spin, const BottleConfig& cfg) {
  if (n < 0) throw std::invalid_argument("axial_shift: n must be >= 0");
  if (spin != 1 && spin != -1) throw std::invalid_argument("axial_shift: spin must be +1 or -1");
  return cfg.omega_b * (n + 0.25 * cfg.g * spin);
}

bool shifts_distinguishable(const BottleConfig& cfg, double tol) {
  std::vector<double> shifts;
  for (int n = 0; n <= cfg.n_max; ++n)
    for (int spin : {1, -1}) shifts.push_back(axial_shift(n, spin, cfg));
  std::sort(shifts.begin(), shifts.end());
  for (std::size_t i = 1; i < shifts.size(); ++i)
    if (shifts[i] - shifts[i - 1] <= tol) return false;
  return true;
}

namespace {

// P^(i)(n, gamma) for n < n_count, unclamped.
SpinTable displaced_number_distribution(const BlockDensity& rho, cplx gamma, int n_count) {
  const int d = rho.dim();
  const int size = std::max(d, n_count);
  const OperatorMatrix disp = displacement_matrix(gamma, size);
  const OperatorMatrix cols = disp.topLeftCorner(d, n_count);
  SpinTable out;
  for (int i = 0; i < 2; ++i) {
    const OperatorMatrix rc = rho.block(i, i) * cols;
    out[i].resize(static_cast<std::size_t>(n_count));
    for (int n = 0; n < n_count; ++n) out[i][n] = cols.col(n).dot(rc.col(n)).real();
  }
  return out;
}

void clamp_negative(SpinTable& t) {
  for (auto& row : t)
    for (auto& v : row)
      if (v < 0.0) v = 0.0;
}

// Excitation range that captures the displaced support of a D-level state.
int extended_count(int dim, double gamma_mod, int n_max) {
  const int guess = dim + static_cast<int>(std::ceil(gamma_mod * gamma_mod + 10.0 * gamma_mod * std::sqrt(dim))) + 20;
  return std::max(guess, n_max + 1);
}

}  // namespace

SpinTable ideal_distribution(const BlockDensity& rho, cplx gamma, int n_max) {
  if (n_max < 0) throw std::invalid_argument("ideal_distribution: n_max must be >= 0");
  SpinTable t = displaced_number_distribution(rho, gamma, n_max + 1);
  clamp_negative(t);
  return t;
}

Eigen::MatrixXd binomial_smearing_matrix(int n_out, int n_in, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("efficiency: eta must lie in (0, 1]");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_out, n_in);
  if (eta == 1.0) {
    for (int n = 0; n < std::min(n_out, n_in); ++n) b(n, n) = 1.0;
    return b;
  }
  const double le = std::log(eta);
  const double l1 = std::log1p(-eta);
  for (int m = 0; m < n_in; ++m)
    for (int n = 0; n <= std::min(m, n_out - 1); ++n)
      b(n, m) = std::exp(std::lgamma(m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0) +
                         n * le + (m - n) * l1);
  return b;
}

std::vector<double> apply_efficiency(const std::vector<double>& p, double eta) {
  for (double v : p)
    if (v < 0.0) throw std::invalid_argument("apply_efficiency: probabilities must be >= 0");
  const int len = static_cast<int>(p.size());
  const Eigen::MatrixXd b = binomial_smearing_matrix(len, len, eta);
  const Eigen::VectorXd out = b * Eigen::Map<const Eigen::VectorXd>(p.data(), len);
  return {out.data(), out.data() + len};
}

std::vector<std::int64_t> sample_counts(const std::vector<double>& p, std::int64_t n_samples,
                                        std::uint64_t seed, std::uint64_t stream) {
  if (n_samples < 0) throw std::invalid_argument("sample_counts: n_samples must be >= 0");
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("sample_counts: invalid probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("sample_counts: probabilities must sum to 1 (got " + std::to_string(total) + ")");

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::int64_t> counts(p.size(), 0);
  std::int64_t remaining = n_samples;
  double remaining_p = total;
  for (std::size_t j = 0; j < p.size() && remaining > 0; ++j) {
    if (j + 1 == p.size()) {
      counts[j] = remaining;
      break;
    }
    const double q = remaining_p > 0.0 ? std::clamp(p[j] / remaining_p, 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::int64_t> draw(remaining, q);
    counts[j] = q >= 1.0 ? remaining : (q <= 0.0 ? 0 : draw(rng));
    remaining -= counts[j];
    remaining_p -= p[j];
  }
  return counts;
}

namespace {

PhaseRecord scan_one_phase(const BlockDensity& rho, const ScanSettings& scan, const BottleConfig& bottle,
                           std::size_t k) {
  PhaseRecord rec;
  rec.phase = scan.phases[k];
  const cplx gamma = std::polar(scan.gamma_mod, rec.phase);
  const int d = rho.dim();
  int n_ext = extended_count(d, scan.gamma_mod, bottle.n_max);
  SpinTable full;
  for (;;) {
    full = displaced_number_distribution(rho, gamma, n_ext);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      double sum = 0.0;
      for (double v : full[i]) sum += v;
      worst = std::max(worst, std::abs(sum - rho.block(i, i).trace().real()));
    }
    if (worst <= 1e-12) break;
    if (n_ext > 4096) throw TruncationOverflow("run_phase_scan: displaced support exceeds 4096 levels");
    n_ext *= 2;
  }
  clamp_negative(full);
  const Eigen::MatrixXd smear = binomial_smearing_matrix(bottle.n_max + 1, n_ext, bottle.eta);
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd v = smear * Eigen::Map<const Eigen::VectorXd>(full[i].data(), n_ext);
    rec.probabilities[i].assign(v.data(), v.data() + v.size());
  }
  if (scan.exact_mode) return rec;

  std::vector<double> joint;
  for (int i = 0; i < 2; ++i) joint.insert(joint.end(), rec.probabilities[i].begin(), rec.probabilities[i].end());
  double total = 0.0;
  for (double v : joint) total += v;
  if (!(total > 0.0)) throw NumericalError("run_phase_scan: no probability inside the resolvable range");
  for (double& v : joint) v /= total;
  const auto counts = sample_counts(joint, scan.samples_per_phase, scan.seed, k);
  const auto half = static_cast<std::ptrdiff_t>(bottle.n_max + 1);
  rec.counts[0].assign(counts.begin(), counts.begin() + half);
  rec.counts[1].assign(counts.begin() + half, counts.end());
  return rec;
}

void validate_scan(const BlockDensity& rho, const ScanSettings& scan, const BottleConfig& bottle) {
  scan.validate();
  bottle.validate();
  if (rho.dim() < 1) throw std::invalid_argument("run_phase_scan: empty state");
}

}  // namespace

PhaseScanDataset run_phase_scan(const BlockDensity& rho, const ScanSettings& scan, const BottleConfig& bottle) {
  validate_scan(rho, scan, bottle);
  PhaseScanDataset out{scan, bottle, std::vector<PhaseRecord>(scan.phases.size())};
  const long count = static_cast<long>(scan.phases.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    try {
      out.records[k] = scan_one_phase(rho, scan, bottle, static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

PhaseScanDataset run_phase_scan_serial(const BlockDensity& rho, const ScanSettings& scan,
                                       const BottleConfig& bottle) {
  validate_scan(rho, scan, bottle);
  PhaseScanDataset out{scan, bottle, {}};
  for (std::size_t k = 0; k < scan.phases.size(); ++k) out.records.push_back(scan_one_phase(rho, scan, bottle, k));
  return out;
}

std::array<double, 2> spin_populations(const BlockDensity& rho) {
  return {rho.block(0, 0).trace().real(), rho.block(1, 1).trace().real()};
}

std::array<double, 2> spin_populations(const BlockDensity& rho, std::int64_t n_samples, std::uint64_t seed,
                                       std::uint64_t stream) {
  auto p = spin_populations(rho);
  const double total = p[0] + p[1];
  const auto counts = sample_counts({std::clamp(p[0] / total, 0.0, 1.0), std::clamp(p[1] / total, 0.0, 1.0)},
                                    n_samples, seed, stream);
  return {static_cast<double>(counts[0]) / n_samples, static_cast<double>(counts[1]) / n_samples};
}

namespace {

// Streams above 2^32 so they never collide with per-phase streams.
constexpr std::uint64_t kRotationStream = std::uint64_t{1} << 32;

RotationMeasurement rotate_and_measure(const BlockDensity& rho, double angle, double phase, std::int64_t samples,
                                       std::uint64_t seed, std::uint64_t stream) {
  RotationMeasurement m;
  m.angle = angle;
  m.axis_phase = phase;
  m.samples = samples;
  const BlockDensity rotated = spin_rotation(rho, angle, phase);
  m.pbar1 = samples > 0 ? spin_populations(rotated, samples, seed, stream)[0] : spin_populations(rotated)[0];
  return m;
}

nlohmann::json rotation_json(const RotationMeasurement& m) {
  return {{"angle", m.angle}, {"axis_phase", m.axis_phase}, {"pbar1", m.pbar1}, {"samples", m.samples}};
}

RotationMeasurement rotation_from_json(const nlohmann::json& j) {
  RotationMeasurement m;
  m.angle = j.at("angle").get<double>();
  m.axis_phase = j.at("axis_phase").get<double>();
  m.pbar1 = j.at("pbar1").get<double>();
  m.samples = j.value("samples", std::int64_t{0});
  return m;
}

}  // namespace

RotationData measure_rotations(const BlockDensity& rho, double secondary_phase, std::int64_t samples,
                               std::uint64_t seed) {
  RotationData data;
  data.primary = rotate_and_measure(rho, kPi / 2, 0.0, samples, seed, kRotationStream);
  data.secondary = rotate_and_measure(rho, kPi / 2, secondary_phase, samples, seed, kRotationStream + 1);
  return data;
}

nlohmann::json RotationData::to_json() const {
  nlohmann::json j{{"primary", rotation_json(primary)}};
  j["secondary"] = secondary ? rotation_json(*secondary) : nlohmann::json(nullptr);
  return j;
}

RotationData RotationData::from_json(const nlohmann::json& j) {
  RotationData d;
  d.primary = rotation_from_json(j.at("primary"));
  if (j.contains("secondary") && !j.at("secondary").is_null()) d.secondary = rotation_from_json(j.at("secondary"));
  return d;
}

}  // namespace cattomo
