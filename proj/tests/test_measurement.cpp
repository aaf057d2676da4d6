#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "cattomo/measurement.hpp"
#include "oracles.hpp"

using namespace cattomo;

namespace {

BlockDensity vacuum_up(int dim) {
  BlockDensity rho(dim);
  rho.block(0, 0)(0, 0) = 1.0;
  return rho;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ScanSettings exact_scan(int phases) {
  ScanSettings s;
  s.phases = uniform_phases(phases);
  s.exact_mode = true;
  return s;
}

}  // namespace

TEST(AxialShift, LevelsAreDistinctForPhysicalG) {
  BottleConfig cfg;
  EXPECT_TRUE(shifts_distinguishable(cfg));
  EXPECT_DOUBLE_EQ(axial_shift(3, 1, cfg), 3.0 + cfg.g / 4.0);
  EXPECT_DOUBLE_EQ(axial_shift(3, -1, cfg), 3.0 - cfg.g / 4.0);
}

TEST(AxialShift, GEqualTwoIsDegenerate) {
  BottleConfig cfg;
  cfg.g = 2.0;
  EXPECT_FALSE(shifts_distinguishable(cfg));
  EXPECT_NEAR(axial_shift(1, -1, cfg), axial_shift(0, 1, cfg), 1e-15);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(AxialShift, ZeroBottleRejected) {
  BottleConfig cfg;
  cfg.omega_b = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(axial_shift(-1, 1, BottleConfig{}), std::invalid_argument);
}

TEST(IdealDistribution, VacuumIsPoisson) {
  const cplx gamma = std::polar(1.2, 0.4);
  const SpinTable t = ideal_distribution(vacuum_up(6), gamma, 25);
  for (int n = 0; n <= 25; ++n) {
    EXPECT_NEAR(t[0][n], oracle::poisson_pmf(n, 1.44), 1e-14) << n;
    EXPECT_EQ(t[1][n], 0.0);
  }
  EXPECT_NEAR(t[0][0], std::exp(-1.44), 1e-15);
}

TEST(IdealDistribution, MeanIsShiftedByGammaSquared) {
  const SpinTable t = ideal_distribution(vacuum_up(4), 2.0, 60);
  double mean = 0.0;
  for (int n = 0; n <= 60; ++n) mean += n * t[0][n];
  EXPECT_NEAR(mean, 4.0, 1e-12);
}

TEST(IdealDistribution, CatBlocksCarryHalfEach) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  const SpinTable t = ideal_distribution(rho, std::polar(1.2, 1.0), 80);
  EXPECT_NEAR(sum(t[0]), 0.5, 1e-12);
  EXPECT_NEAR(sum(t[1]), 0.5, 1e-12);
}

TEST(IdealDistribution, AgreesWithExponentialDisplacement) {
  std::mt19937_64 rng(11);
  const Eigen::VectorXcd v = oracle::random_state(rng, 6, 10);
  BlockDensity rho(10);
  rho.block(1, 1) = v * v.adjoint();
  const cplx gamma = std::polar(1.2, 2.2);
  const Eigen::MatrixXcd d = oracle::displacement_expm(gamma, 60, 120);
  Eigen::VectorXcd big = Eigen::VectorXcd::Zero(60);
  big.head(10) = v;
  const Eigen::VectorXcd moved = d.adjoint() * big;
  const SpinTable t = ideal_distribution(rho, gamma, 20);
  for (int n = 0; n <= 20; ++n) EXPECT_NEAR(t[1][n], std::norm(moved(n)), 1e-12);
}

TEST(Efficiency, UnitEfficiencyIsIdentity) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(apply_efficiency(p, 1.0), p);
}

TEST(Efficiency, SingleExcitation) {
  const auto out = apply_efficiency({0.0, 1.0}, 0.9);
  EXPECT_NEAR(out[0], 0.1, 1e-15);
  EXPECT_NEAR(out[1], 0.9, 1e-15);
}

TEST(Efficiency, ThinnedPoissonIsPoisson) {
  std::vector<double> p(80);
  for (int n = 0; n < 80; ++n) p[n] = oracle::poisson_pmf(n, 2.5);
  const auto out = apply_efficiency(p, 0.9);
  for (int n = 0; n < 40; ++n) EXPECT_NEAR(out[n], oracle::poisson_pmf(n, 2.25), 1e-12) << n;
}

TEST(Efficiency, AgreesWithDirectSumAndPreservesMass) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(25);
  for (double& v : p) v = u(rng);
  const double total = sum(p);
  for (double& v : p) v /= total;
  for (double eta : {0.3, 0.75, 0.99}) {
    const auto a = apply_efficiency(p, eta);
    const auto b = oracle::thin(p, eta);
    for (std::size_t n = 0; n < p.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-14);
    EXPECT_NEAR(sum(a), 1.0, 1e-12);
  }
}

TEST(Efficiency, LinearInTheDistribution) {
  const std::vector<double> p{0.5, 0.0, 0.5, 0.0}, q{0.0, 0.25, 0.25, 0.5};
  std::vector<double> mix(4);
  for (int n = 0; n < 4; ++n) mix[n] = 0.3 * p[n] + 0.7 * q[n];
  const auto a = apply_efficiency(p, 0.6), b = apply_efficiency(q, 0.6), m = apply_efficiency(mix, 0.6);
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(m[n], 0.3 * a[n] + 0.7 * b[n], 1e-15);
}

TEST(Efficiency, InvalidEtaRejected) {
  EXPECT_THROW(apply_efficiency({1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(apply_efficiency({1.0}, 1.1), std::invalid_argument);
}

TEST(Sampling, DeterministicDistribution) {
  const auto c = sample_counts({0.0, 1.0, 0.0}, 1000, 7);
  EXPECT_EQ(c, (std::vector<std::int64_t>{0, 1000, 0}));
}

TEST(Sampling, CountsWithinFiveSigma) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.25, 0.15};
  const std::int64_t n = 1'000'000;
  const auto c = sample_counts(p, n, 42, 3);
  EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::int64_t{0}), n);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double sigma = std::sqrt(n * p[j] * (1.0 - p[j]));
    EXPECT_LT(std::abs(c[j] - n * p[j]), 5.0 * sigma) << j;
  }
}

TEST(Sampling, SeedAndStreamDetermineTheDraw) {
  const std::vector<double> p{0.3, 0.3, 0.4};
  EXPECT_EQ(sample_counts(p, 1000, 1, 0), sample_counts(p, 1000, 1, 0));
  EXPECT_NE(sample_counts(p, 1000, 1, 0), sample_counts(p, 1000, 2, 0));
  EXPECT_NE(sample_counts(p, 1000, 1, 0), sample_counts(p, 1000, 1, 1));
}

TEST(Sampling, RejectsInvalidInput) {
  EXPECT_THROW(sample_counts({0.5, 0.4}, 10, 0), std::invalid_argument);
  EXPECT_THROW(sample_counts({1.2, -0.2}, 10, 0), std::invalid_argument);
}

TEST(PhaseScan, VacuumIsPhaseIndependent) {
  ScanSettings scan = exact_scan(7);
  BottleConfig bottle;
  const PhaseScanDataset d = run_phase_scan(vacuum_up(4), scan, bottle);
  ASSERT_EQ(d.records.size(), 7u);
  for (const auto& r : d.records)
    for (int n = 0; n <= bottle.n_max; ++n) EXPECT_NEAR(r.probabilities[0][n], d.records[0].probabilities[0][n], 1e-14);
}

TEST(PhaseScan, ExactModeMatchesSmearedIdeal) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  ScanSettings scan = exact_scan(5);
  BottleConfig bottle;
  bottle.eta = 0.8;
  const PhaseScanDataset d = run_phase_scan(rho, scan, bottle);
  for (std::size_t k = 0; k < 5; ++k) {
    const SpinTable ideal = ideal_distribution(rho, std::polar(scan.gamma_mod, scan.phases[k]), 120);
    for (int i = 0; i < 2; ++i) {
      const auto thinned = oracle::thin(ideal[i], 0.8);
      for (int n = 0; n <= bottle.n_max; ++n) EXPECT_NEAR(d.records[k].probabilities[i][n], thinned[n], 1e-13);
    }
    EXPECT_TRUE(d.records[k].counts[0].empty());
  }
}

TEST(PhaseScan, ParallelMatchesSerialExactly) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  ScanSettings scan;
  scan.phases = uniform_phases(9);
  scan.samples_per_phase = 20000;
  scan.seed = 99;
  BottleConfig bottle;
  bottle.eta = 0.9;
  const PhaseScanDataset a = run_phase_scan(rho, scan, bottle);
  const PhaseScanDataset b = run_phase_scan_serial(rho, scan, bottle);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(PhaseScan, SampledFrequenciesConvergeAsInverseRootN) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  BottleConfig bottle;
  ScanSettings exact = exact_scan(3);
  const PhaseScanDataset ref = run_phase_scan(rho, exact, bottle);
  std::vector<double> err;
  for (std::int64_t n : {1000, 100000}) {
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      ScanSettings scan = exact;
      scan.exact_mode = false;
      scan.samples_per_phase = n;
      scan.seed = seed;
      const PhaseScanDataset d = run_phase_scan(rho, scan, bottle);
      double worst = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const SpinTable f = d.frequencies(k);
        for (int i = 0; i < 2; ++i)
          for (int m = 0; m <= bottle.n_max; ++m)
            worst = std::max(worst, std::abs(f[i][m] - ref.records[k].probabilities[i][m]));
      }
      mean += worst / 8.0;
    }
    err.push_back(mean);
  }
  EXPECT_NEAR(err[0] / err[1], 10.0, 3.0);
}

TEST(PhaseScan, InvalidSettingsRejected) {
  ScanSettings scan;
  BottleConfig bottle;
  EXPECT_THROW(run_phase_scan(vacuum_up(3), scan, bottle), std::invalid_argument);
  scan.phases = {0.0, 2.0 * kPi};
  EXPECT_THROW(run_phase_scan(vacuum_up(3), scan, bottle), std::invalid_argument);
}

TEST(PhaseScan, JsonRoundTripAndCsvLayout) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  ScanSettings scan;
  scan.phases = uniform_phases(3);
  scan.samples_per_phase = 500;
  scan.seed = 5;
  BottleConfig bottle;
  bottle.n_max = 4;
  const PhaseScanDataset d = run_phase_scan(rho, scan, bottle);
  const PhaseScanDataset back = PhaseScanDataset::from_json(nlohmann::json::parse(d.to_json().dump()));
  EXPECT_EQ(back.to_json(), d.to_json());
  const std::string csv = d.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "phase,spin,n,count");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 2 * 5);
}

TEST(SpinPopulations, MatchRotatedBranchInterference) {
  const SpinFockState s = cat_state({0.4, 0.9}, 30);
  const BlockDensity rho = pure_to_density(s);
  for (double phase : {0.0, 1.0, kPi / 3}) {
    const double a = kPi / 2;
    const cplx i(0.0, 1.0);
    const FockVector up = std::cos(a / 2) * s.up() - i * std::sin(a / 2) * std::polar(1.0, -phase) * s.down();
    const auto p = spin_populations(spin_rotation(rho, a, phase));
    EXPECT_NEAR(p[0], up.squaredNorm(), 1e-14);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-14);
  }
}

TEST(SpinPopulations, SampledAreNearExact) {
  const BlockDensity rho = spin_rotation(pure_to_density(cat_state({0.0, 1.0}, 20)), 1.0, 0.0);
  const auto exact = spin_populations(rho);
  const auto sampled = spin_populations(rho, 1'000'000, 8);
  const double sigma = std::sqrt(exact[0] * exact[1] / 1e6);
  EXPECT_LT(std::abs(sampled[0] - exact[0]), 5.0 * sigma);
}

TEST(Rotations, JsonRoundTrip) {
  const BlockDensity rho = pure_to_density(cat_state({0.0, 1.5}, 30));
  const RotationData r = measure_rotations(rho, kPi / 3, 1000, 4);
  ASSERT_TRUE(r.secondary.has_value());
  EXPECT_DOUBLE_EQ(r.secondary->axis_phase, kPi / 3);
  const RotationData back = RotationData::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.to_json(), r.to_json());
  RotationData single{r.primary, std::nullopt};
  EXPECT_FALSE(RotationData::from_json(single.to_json()).secondary.has_value());
}
