#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cattomo/errors.hpp"
#include "cattomo/metrics.hpp"
#include "cattomo/synthesis.hpp"
#include "oracles.hpp"

using namespace cattomo;

namespace {

const cplx kAlpha(0.0, 1.5);

Eigen::VectorXcd stacked(const SpinFockState& s) {
  Eigen::VectorXcd v(2 * s.dim());
  v << s.up(), s.down();
  return v;
}

// (|a>+|-a>)/2 |up> + (|a>-|-a>)/2 |down> from the coherent-state series.
Eigen::VectorXcd entangled_oracle(cplx alpha, int dim) {
  const Eigen::VectorXcd p = oracle::coherent_series(alpha, dim);
  const Eigen::VectorXcd m = oracle::coherent_series(-alpha, dim);
  Eigen::VectorXcd v(2 * dim);
  v << 0.5 * (p + m), 0.5 * (p - m);
  return v;
}

PulseConfig pulse(double zeta, double d) {
  PulseConfig cfg;
  cfg.zeta_tilde = zeta;
  cfg.eps_tilde = std::abs(kAlpha) / zeta;
  cfg.d = d;
  return cfg;
}

BlockDensity vacuum_up(int dim) {
  BlockDensity rho(dim);
  rho.block(0, 0)(0, 0) = 1.0;
  return rho;
}

}  // namespace

TEST(SpinFockState, FromComponentsSplitsNorms) {
  FockVector up = FockVector::Zero(3), down = FockVector::Zero(3);
  up(1) = cplx(0.0, 0.6);
  down(2) = 0.8;
  const SpinFockState s = SpinFockState::from_components(up, down);
  EXPECT_NEAR(s.c1.real(), 0.6, 1e-15);
  EXPECT_NEAR(s.c2.real(), 0.8, 1e-15);
  EXPECT_LT((s.up() - up).norm(), 1e-15);
  EXPECT_NO_THROW(s.validate());
}

TEST(SpinFockState, ValidateRejectsBadNorm) {
  SpinFockState s;
  s.psi1 = FockVector::Zero(2);
  s.psi1(0) = 1.0;
  s.psi2 = s.psi1;
  s.c1 = 0.9;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(PureToDensity, IsRankOnePhysicalState) {
  const BlockDensity rho = pure_to_density(cat_state(kAlpha, 30));
  EXPECT_TRUE(rho.check().ok());
  const Eigen::MatrixXcd m = rho.full();
  EXPECT_NEAR((m * m).trace().real(), 1.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  EXPECT_NEAR(es.eigenvalues()(m.rows() - 1), 1.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(m.rows() - 2), 0.0, 1e-12);
}

TEST(BlockDensity, FullRoundTripAndResize) {
  const BlockDensity rho = pure_to_density(cat_state({0.7, 0.2}, 12));
  const BlockDensity back = BlockDensity::from_full(rho.full());
  EXPECT_EQ(back.full(), rho.full());
  const BlockDensity big = rho.resized(20);
  EXPECT_EQ(big.dim(), 20);
  EXPECT_NEAR(big.trace(), rho.trace(), 1e-15);
  EXPECT_EQ(big.resized(12).full(), rho.full());
}

TEST(IdealEntangle, MatchesCoherentStateForm) {
  const int dim = 40;
  const SpinFockState s = synthesize_entangled(kAlpha, dim);
  EXPECT_LT((stacked(s) - entangled_oracle(kAlpha, dim)).norm(), 1e-12);
}

TEST(IdealEntangle, SpinWeightsAreNotEqual) {
  const SpinFockState s = synthesize_entangled(kAlpha, 40);
  const double e = std::exp(-2.0 * std::norm(kAlpha));
  EXPECT_NEAR(std::abs(s.c1), std::sqrt((1.0 + e) / 2.0), 1e-12);
  EXPECT_NEAR(std::abs(s.c2), std::sqrt((1.0 - e) / 2.0), 1e-12);
}

TEST(IdealEntangle, BranchesAreOrthogonalEvenAndOdd) {
  const SpinFockState s = synthesize_entangled(kAlpha, 40);
  EXPECT_LT(std::abs(s.psi1.dot(s.psi2)), 1e-14);
  for (int n = 1; n < 40; n += 2) EXPECT_LT(std::abs(s.psi1(n)), 1e-14);
  for (int n = 0; n < 40; n += 2) EXPECT_LT(std::abs(s.psi2(n)), 1e-14);
}

TEST(IdealEntangle, ZeroAlphaIsIdentity) {
  const SpinFockState s = synthesize_entangled(0.0, 10);
  EXPECT_NEAR(std::abs(s.c1), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.c2), 0.0, 1e-15);
  EXPECT_NEAR(spin_entropy(pure_to_density(s)), 0.0, 1e-15);
}

TEST(IdealEntangle, PlusXSpinFactorizes) {
  const int dim = 40;
  FockVector vac = FockVector::Zero(dim);
  vac(0) = 1.0;
  SpinFockState plus;
  plus.c1 = plus.c2 = 1.0 / std::sqrt(2.0);
  plus.psi1 = plus.psi2 = vac;
  const SpinFockState out = ideal_entangle(plus, kAlpha);
  const Eigen::VectorXcd coh = oracle::coherent_series(kAlpha, dim);
  EXPECT_LT((out.up() - coh / std::sqrt(2.0)).norm(), 1e-12);
  EXPECT_LT((out.down() - coh / std::sqrt(2.0)).norm(), 1e-12);
  const Eigen::Matrix2cd r = reduced_spin(pure_to_density(out));
  EXPECT_NEAR((r * r).trace().real(), 1.0, 1e-12);
}

TEST(IdealEntangle, DensityOverloadAgreesWithPure) {
  const SpinFockState s = synthesize_entangled(kAlpha, 40);
  const BlockDensity rho = ideal_entangle(vacuum_up(40), kAlpha);
  EXPECT_LT(max_abs_difference(rho.full(), pure_to_density(s).full()), 1e-12);
}

TEST(IdealEntangle, TruncationOverflowIsReported) {
  EXPECT_THROW(synthesize_entangled(kAlpha, 8), TruncationOverflow);
}

TEST(SpinEntropy, ApproachesLn2ForWellSeparatedBranches) {
  EXPECT_NEAR(spin_entropy(pure_to_density(synthesize_entangled(kAlpha, 40))), 0.693085474388674336, 1e-10);
  const double s4 = spin_entropy(pure_to_density(synthesize_entangled({0.0, 4.0}, 80)));
  EXPECT_NEAR(s4, std::log(2.0), 1e-12);
}

TEST(MeanExcitation, CoherentBranches) {
  const BlockDensity rho = pure_to_density(cat_state(kAlpha, 40));
  EXPECT_NEAR(mean_excitation(rho), std::norm(kAlpha), 1e-10);
}

TEST(GaussHermite, IntegratesPolynomialsExactly) {
  const GaussHermiteRule rule = gauss_hermite(41);
  EXPECT_NEAR(rule.weights.sum(), std::sqrt(kPi), 1e-13);
  double m2 = 0.0, m4 = 0.0;
  for (int q = 0; q < 41; ++q) {
    m2 += rule.weights(q) * std::pow(rule.nodes(q), 2);
    m4 += rule.weights(q) * std::pow(rule.nodes(q), 4);
  }
  EXPECT_NEAR(m2, std::sqrt(kPi) / 2.0, 1e-12);
  EXPECT_NEAR(m4, 3.0 * std::sqrt(kPi) / 4.0, 1e-12);
}

TEST(GaussianTraced, NarrowMomentumSpreadReproducesIdeal) {
  const int dim = 40;
  const BlockDensity ideal = pure_to_density(synthesize_entangled(kAlpha, dim));
  const BlockDensity traced = gaussian_traced_entangle(vacuum_up(dim), pulse(10.0, 1e-4));
  EXPECT_LE(trace_distance(traced.full(), ideal.full()), 1e-6);
}

TEST(GaussianTraced, LargeZetaGivesHighFidelity) {
  const int dim = 48;
  const BlockDensity ideal = pure_to_density(synthesize_entangled(kAlpha, dim));
  const BlockDensity traced = gaussian_traced_entangle(vacuum_up(dim), pulse(10.0, 1.0));
  EXPECT_GE(fidelity(traced.full(), ideal.full()), 0.99);
  EXPECT_TRUE(traced.check().ok());
}

TEST(GaussianTraced, FidelityIncreasesWithZeta) {
  const int dim = 80;
  const BlockDensity ideal = pure_to_density(synthesize_entangled(kAlpha, dim));
  double prev = 0.0;
  for (double zeta : {1.0, 3.0, 10.0, 30.0, 100.0}) {
    const BlockDensity traced = gaussian_traced_entangle(vacuum_up(dim), pulse(zeta, 1.0));
    const double f = fidelity(traced.full(), ideal.full());
    EXPECT_GT(f, prev) << "zeta " << zeta;
    prev = f;
  }
}

TEST(GaussianTraced, ZeroEpsilonIsIdentity) {
  PulseConfig cfg;
  cfg.zeta_tilde = 5.0;
  cfg.eps_tilde = 0.0;
  const BlockDensity rho0 = vacuum_up(10);
  EXPECT_EQ(gaussian_traced_entangle(rho0, cfg).full(), rho0.full());
}

TEST(GaussianTraced, PreservesDensityInvariants) {
  std::mt19937_64 rng(3);
  const Eigen::VectorXcd up = oracle::random_state(rng, 4, 40);
  const Eigen::VectorXcd down = oracle::random_state(rng, 4, 40);
  const BlockDensity rho0 = pure_to_density(SpinFockState::from_components(0.6 * up, 0.8 * down));
  const BlockDensity out = gaussian_traced_entangle(rho0, pulse(5.0, 1.0));
  const BlockDensity::Check c = out.check();
  EXPECT_LE(c.hermiticity, 1e-12);
  EXPECT_LE(c.trace_error, 1e-10);
  EXPECT_GE(c.min_eigenvalue, -1e-10);
}

TEST(PulseConfig, Validation) {
  PulseConfig cfg;
  cfg.quad_points = 40;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.quad_points = 41;
  cfg.d = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SpinRotation, TrivialAngles) {
  EXPECT_LT((spin_rotation_matrix(0.0, 0.7) - Eigen::Matrix2cd::Identity()).norm(), 1e-15);
  EXPECT_LT((spin_rotation_matrix(2.0 * kPi, 0.7) + Eigen::Matrix2cd::Identity()).norm(), 1e-15);
}

TEST(SpinRotation, AnglesAddAboutACommonAxis) {
  for (double phase : {0.0, 0.4, kPi / 3, 2.0}) {
    const Eigen::Matrix2cd ab = spin_rotation_matrix(0.9, phase) * spin_rotation_matrix(1.7, phase);
    EXPECT_LT((ab - spin_rotation_matrix(2.6, phase)).norm(), 1e-12);
    const Eigen::Matrix2cd u = spin_rotation_matrix(1.3, phase);
    EXPECT_LT((u * u.adjoint() - Eigen::Matrix2cd::Identity()).norm(), 1e-14);
  }
}

TEST(SpinRotation, HalfPiPulseFromUp) {
  const double phase = 0.8;
  const Eigen::Matrix2cd u = spin_rotation_matrix(kPi / 2, phase);
  const cplx i(0.0, 1.0);
  EXPECT_LT(std::abs(u(0, 0) - 1.0 / std::sqrt(2.0)), 1e-15);
  EXPECT_LT(std::abs(u(1, 0) + i * std::polar(1.0, phase) / std::sqrt(2.0)), 1e-15);
  EXPECT_LT(std::abs(u(0, 1) + i * std::polar(1.0, -phase) / std::sqrt(2.0)), 1e-15);
}

TEST(SpinRotation, DensityOverloadAgreesWithPure) {
  const SpinFockState s = cat_state({0.3, 1.0}, 20);
  const BlockDensity a = pure_to_density(spin_rotation(s, 1.1, 0.5));
  const BlockDensity b = spin_rotation(pure_to_density(s), 1.1, 0.5);
  EXPECT_LT(max_abs_difference(a.full(), b.full()), 1e-14);
}

TEST(SynthesizeCat, MatchesDirectCatUpToGlobalPhase) {
  const int dim = 40;
  const BlockDensity a = pure_to_density(synthesize_cat(kAlpha, dim));
  const BlockDensity b = pure_to_density(cat_state(kAlpha, dim));
  EXPECT_LT(max_abs_difference(a.full(), b.full()), 1e-12);
}

TEST(SynthesizeCat, EqualWeightsAndCoherentBranches) {
  const SpinFockState s = cat_state(kAlpha, 40);
  EXPECT_NEAR(std::abs(s.c1), 1.0 / std::sqrt(2.0), 1e-15);
  const Eigen::VectorXcd coh = oracle::coherent_series(kAlpha, 40);
  EXPECT_NEAR(std::abs(s.psi1.dot(coh)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.psi1.dot(s.psi2)), std::exp(-2.0 * std::norm(kAlpha)), 1e-12);
}
