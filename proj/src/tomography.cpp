#include "cattomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cattomo/errors.hpp"
#include "cattomo/metrics.hpp"
#include "cattomo/serialize.hpp"

namespace cattomo {

namespace {

double wrap_angle(double a) {
  // (-pi, pi]
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

void require_uniform(const std::vector<double>& phases) {
  const auto k = phases.size();
  std::vector<double> w;
  for (double p : phases) {
    double x = std::fmod(p, 2.0 * kPi);
    if (x < 0) x += 2.0 * kPi;
    w.push_back(x);
  }
  std::sort(w.begin(), w.end());
  const double step = 2.0 * kPi / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double next = i + 1 < k ? w[i + 1] : w[0] + 2.0 * kPi;
    if (std::abs(next - w[i] - step) > 1e-9)
      throw NumericalError("fourier_reduce: phases must be uniformly spaced on [0, 2 pi)");
  }
}

}  // namespace

FourierTable fourier_reduce(const PhaseScanDataset& data, int s_max) {
  const int k_count = static_cast<int>(data.records.size());
  if (s_max < 0) throw std::invalid_argument("fourier_reduce: s_max must be >= 0");
  if (k_count < 2 * s_max + 1) {
    std::ostringstream os;
    os << "fourier_reduce: " << k_count << " phases alias Fourier orders up to " << s_max << " (need >= "
       << 2 * s_max + 1 << ")";
    throw NumericalError(os.str());
  }
  require_uniform(data.settings.phases);
  const int rows = data.bottle.n_max + 1;
  FourierTable f;
  f.s_max = s_max;
  f.gamma_mod = data.settings.gamma_mod;
  for (auto& v : f.values) v = Eigen::MatrixXcd::Zero(rows, s_max + 1);
  for (int k = 0; k < k_count; ++k) {
    const SpinTable p = data.frequencies(static_cast<std::size_t>(k));
    const double phi = data.records[k].phase;
    for (int s = 0; s <= s_max; ++s) {
      const cplx w = std::polar(1.0 / k_count, s * phi);
      for (int i = 0; i < 2; ++i)
        for (int n = 0; n < rows; ++n) f.values[i](n, s) += w * p[i][n];
    }
  }
  return f;
}

Eigen::MatrixXd build_g(int s, double gamma_mod, int n_rows_max, int n_c, double eta) {
  if (n_c < 0 || s < 0 || s > n_c) throw std::invalid_argument("build_g: need 0 <= s <= N_c");
  if (n_rows_max < n_c) throw std::invalid_argument("build_g: need N >= N_c");
  if (!(gamma_mod >= 0.0)) throw std::invalid_argument("build_g: gamma_mod must be >= 0");
  if (gamma_mod == 0.0 && s >= 1)
    throw RankDeficiency("build_g: |gamma| = 0 carries no phase information for s = " + std::to_string(s));
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("build_g: eta must lie in (0, 1]");

  // Extend the excitation range until every column m <= N_c is resolved.
  int n_ext = std::max(n_rows_max + 1, n_c + 1) +
              static_cast<int>(std::ceil(gamma_mod * gamma_mod + 10.0 * gamma_mod * std::sqrt(n_c + 1.0))) + 20;
  Eigen::MatrixXd d;
  for (;;) {
    d = real_displacement_matrix(gamma_mod, n_ext);
    const double worst = (1.0 - d.topRows(n_c + 1).rowwise().squaredNorm().array()).abs().maxCoeff();
    if (worst <= 1e-13) break;
    if (n_ext > 4096) throw TruncationOverflow("build_g: displaced support exceeds 4096 levels");
    n_ext *= 2;
  }
  const int cols = n_c + 1 - s;
  Eigen::MatrixXd g_ext(n_ext, cols);
  for (int n = 0; n < n_ext; ++n)
    for (int m = 0; m < cols; ++m) g_ext(n, m) = d(m + s, n) * d(m, n);
  return binomial_smearing_matrix(n_rows_max + 1, n_ext, eta) * g_ext;
}

namespace {

void solve_one(GSystem& sys, int s) {
  sys.g[s] = build_g(s, sys.gamma_mod, sys.n_max, sys.n_c, sys.eta);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.g[s], Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  sys.condition[s] = cond;
  if (!(sv(sv.size() - 1) > sv(0) * 1e-13)) {
    std::ostringstream os;
    os << "G^(" << s << ") is rank deficient (condition number " << cond << ")";
    throw RankDeficiency(os.str());
  }
  sys.m[s] = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

GSystem prepare(double gamma_mod, int n_max, int n_c, int s_max, double eta) {
  if (s_max < 0 || s_max > n_c) throw std::invalid_argument("GSystem: need 0 <= s_max <= N_c");
  GSystem sys;
  sys.n_c = n_c;
  sys.n_max = n_max;
  sys.gamma_mod = gamma_mod;
  sys.eta = eta;
  sys.g.resize(static_cast<std::size_t>(s_max + 1));
  sys.m.resize(sys.g.size());
  sys.condition.resize(sys.g.size());
  return sys;
}

}  // namespace

GSystem GSystem::build(double gamma_mod, int n_max, int n_c, int s_max, double eta) {
  GSystem sys = prepare(gamma_mod, n_max, n_c, s_max, eta);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s <= s_max; ++s) {
    try {
      solve_one(sys, s);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return sys;
}

GSystem GSystem::build_serial(double gamma_mod, int n_max, int n_c, int s_max, double eta) {
  GSystem sys = prepare(gamma_mod, n_max, n_c, s_max, eta);
  for (int s = 0; s <= s_max; ++s) solve_one(sys, s);
  return sys;
}

std::array<OperatorMatrix, 2> invert_diagonals(const FourierTable& f, const GSystem& g) {
  if (f.n_rows() != g.n_max + 1)
    throw std::invalid_argument("invert_diagonals: Fourier table rows do not match G");
  const int s_top = std::min(f.s_max, g.s_max());
  const int dim = g.n_c + 1;
  std::array<OperatorMatrix, 2> out;
  for (int i = 0; i < 2; ++i) {
    OperatorMatrix rho = OperatorMatrix::Zero(dim, dim);
    for (int s = 0; s <= s_top; ++s) {
      const Eigen::VectorXcd x = g.m[s].cast<cplx>() * f.values[i].col(s);
      for (int m = 0; m + s < dim; ++m) {
        rho(m + s, m) = x(m);
        if (s > 0) rho(m, m + s) = std::conj(x(m));
      }
    }
    out[i] = 0.5 * (rho + rho.adjoint());
  }
  return out;
}

Moduli recover_moduli(const FourierTable& f) {
  std::array<double, 2> sums{};
  for (int i = 0; i < 2; ++i) sums[i] = std::max(0.0, f.values[i].col(0).real().sum());
  Moduli out;
  out.raw_sum_squares = sums[0] + sums[1];
  if (out.raw_sum_squares < 1e-12) throw StatisticalError("recover_moduli: no signal in either spin sector");
  out.c1 = std::clamp(std::sqrt(sums[0] / out.raw_sum_squares), 0.0, 1.0);
  out.c2 = std::clamp(std::sqrt(sums[1] / out.raw_sum_squares), 0.0, 1.0);
  return out;
}

FockVector gauge_fix(const FockVector& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const double mag = std::abs(v(arg));
  if (mag == 0.0) return v;
  return v * (std::conj(v(arg)) / mag);
}

SpinFockState canonical_pure(const BlockDensity& rho) {
  const Eigen::MatrixXcd m = rho.full();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXcd top = es.eigenvectors().col(m.rows() - 1);
  const int d = rho.dim();
  SpinFockState s = SpinFockState::from_components(top.head(d), top.tail(d));
  s.psi1 = gauge_fix(s.psi1);
  s.psi2 = gauge_fix(s.psi2);
  cplx c1 = s.psi1.dot(top.head(d));
  cplx c2 = s.psi2.dot(top.tail(d));
  const double norm = std::sqrt(std::norm(c1) + std::norm(c2));
  const cplx global = std::abs(c1) > 0.0 ? std::conj(c1) / std::abs(c1) : cplx(1.0);
  s.c1 = global * c1 / norm;
  s.c2 = global * c2 / norm;
  s.c1 = std::abs(s.c1);
  return s;
}

Overlap extract_overlap(const OperatorMatrix& rho11, const OperatorMatrix& rho22, double c1_mod, double c2_mod) {
  Overlap out;
  const auto dominant = [&](const OperatorMatrix& block, double weight, double& purity, int idx) -> FockVector {
    const int d = static_cast<int>(block.rows());
    FockVector vac = FockVector::Zero(d);
    vac(0) = 1.0;
    if (weight * weight < 1e-12) {
      out.warnings.push_back("spin sector " + std::to_string(idx) + " is empty; psi set to vacuum");
      purity = 1.0;
      return vac;
    }
    const OperatorMatrix norm_block = block / (weight * weight);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (norm_block + norm_block.adjoint()));
    const auto& ev = es.eigenvalues();
    const double top = ev(d - 1);
    const double next = d > 1 ? ev(d - 2) : 0.0;
    if (top - next <= 1e-9 * std::max(1.0, std::abs(top)))
      throw DegenerateInput("extract_overlap: dominant eigenvalue of rho^(" + std::to_string(idx) + std::to_string(idx) +
                            ") is degenerate; the eigenvector gauge is ambiguous");
    purity = (norm_block * norm_block).trace().real();
    if (purity < 0.9) {
      std::ostringstream os;
      os << "rho^(" << idx << idx << ") purity " << purity << " < 0.9; rank-1 phase recovery is approximate";
      out.warnings.push_back(os.str());
    }
    return gauge_fix(es.eigenvectors().col(d - 1));
  };
  out.psi1 = dominant(rho11, c1_mod, out.purity1, 1);
  out.psi2 = dominant(rho22, c2_mod, out.purity2, 2);
  if (c1_mod * c1_mod < 1e-12 || c2_mod * c2_mod < 1e-12) {
    out.r = 0.0;
    out.beta = 0.0;
    out.beta_defined = false;
    return out;
  }
  const cplx z = out.psi1.dot(out.psi2);
  out.r = std::min(1.0, std::abs(z));
  if (out.r < 1e-12) {
    out.beta = 0.0;
    out.beta_defined = false;
    out.warnings.push_back("psi1 and psi2 are orthogonal; beta is undefined");
  } else {
    out.beta = std::arg(z);
  }
  return out;
}

double predicted_pbar1(double theta, double r, double beta, double c1_mod, double c2_mod, double angle,
                       double axis_phase) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  return c * c * c1_mod * c1_mod + s * s * c2_mod * c2_mod +
         std::sin(angle) * r * c1_mod * c2_mod * std::sin(theta + beta - axis_phase);
}

ThetaResult recover_theta(const RotationMeasurement& primary, double r, double beta, double c1_mod, double c2_mod,
                          const std::optional<RotationMeasurement>& secondary, const ThetaOptions& opts) {
  const double amp = r * c1_mod * c2_mod;
  if (!(amp > opts.floor)) {
    std::ostringstream os;
    os << "recover_theta: r |c1| |c2| = " << amp << " is below the floor " << opts.floor
       << "; the relative phase is unrecoverable";
    throw UnrecoverablePhase(os.str());
  }
  const double sa = std::sin(primary.angle);
  if (std::abs(sa) < 1e-12) throw UnrecoverablePhase("recover_theta: primary rotation angle carries no phase information");
  const double c = std::cos(primary.angle / 2.0);
  const double s = std::sin(primary.angle / 2.0);
  double x = (primary.pbar1 - c * c * c1_mod * c1_mod - s * s * c2_mod * c2_mod) / (sa * amp);
  ThetaResult res;
  if (x > 1.0 || x < -1.0) {
    res.clamped = true;
    x = std::clamp(x, -1.0, 1.0);
  }
  const double principal = std::asin(x);
  const double a = wrap_angle(principal - beta + primary.axis_phase);
  const double b = wrap_angle(kPi - principal - beta + primary.axis_phase);

  if (!secondary) {
    res.theta = a;
    res.alternative = b;
    res.ambiguous = std::abs(wrap_angle(a - b)) > 1e-9;
    return res;
  }
  const auto residual = [&](double theta) {
    const double p1 = predicted_pbar1(theta, r, beta, c1_mod, c2_mod, primary.angle, primary.axis_phase) - primary.pbar1;
    const double p2 = predicted_pbar1(theta, r, beta, c1_mod, c2_mod, secondary->angle, secondary->axis_phase) -
                      secondary->pbar1;
    return p1 * p1 + p2 * p2;
  };
  const double ra = residual(a);
  const double rb = residual(b);
  res.theta = ra <= rb ? a : b;
  res.alternative = ra <= rb ? b : a;
  res.residual = std::sqrt(std::min(ra, rb));
  if (res.residual > opts.branch_tolerance) {
    std::ostringstream os;
    os << "recover_theta: neither arcsin branch matches the second rotation (residual " << res.residual << ")";
    throw InconsistentBranch(os.str());
  }
  return res;
}

bool project_psd(OperatorMatrix& block, double threshold) {
  const OperatorMatrix h = 0.5 * (block + block.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.eigenvalues().minCoeff() >= threshold) return false;
  const double trace = h.trace().real();
  Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  if (clipped.sum() > 0.0) clipped *= trace / clipped.sum();
  block = es.eigenvectors() * clipped.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return true;
}

namespace {

WignerSet wigner_set(const std::array<OperatorMatrix, 3>& blocks, const std::array<cplx, 3>& norms,
                     const std::array<bool, 3>& present, const GridSpec& spec) {
  const auto re = linspace(spec.re_min, spec.re_max, spec.points);
  const auto im = linspace(spec.im_min, spec.im_max, spec.points);
  WignerSet set;
  for (int b = 0; b < 3; ++b) {
    if (!present[b]) continue;
    set.tilde[b] = wigner_grid(blocks[b], re, im);
    set.normalized[b] = set.tilde[b];
    if (std::abs(norms[b]) > 0.0) set.normalized[b].values /= norms[b];
  }
  return set;
}

}  // namespace

ReconstructionReport reconstruct(const PhaseScanDataset& data, const std::optional<RotationData>& rotations,
                                 const ReconstructionOptions& opts, const std::optional<BlockDensity>& truth) {
  const int n_c = opts.n_c;
  const int s_max = opts.s_max < 0 ? n_c : opts.s_max;
  if (data.bottle.n_max < n_c) throw std::invalid_argument("reconstruct: need N >= N_c");
  ReconstructionReport rep;

  const FourierTable f = fourier_reduce(data, s_max);
  const GSystem g = GSystem::build(data.settings.gamma_mod, data.bottle.n_max, n_c, s_max, data.bottle.eta);
  rep.condition_numbers = g.condition;
  rep.diagonal_blocks = invert_diagonals(f, g);

  const Moduli mod = recover_moduli(f);
  rep.c1_mod = mod.c1;
  rep.c2_mod = mod.c2;
  if (std::abs(mod.raw_sum_squares - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "moduli renormalized: sum of |c_i|^2 was " << mod.raw_sum_squares;
    rep.diagnostics.push_back(os.str());
  }
  {
    std::ostringstream os;
    os << "eta = " << data.bottle.eta << ", |gamma| = " << data.settings.gamma_mod << ", K = " << data.records.size()
       << ", N = " << data.bottle.n_max << ", N_c = " << n_c << ", s_max = " << s_max
       << (data.exact() ? ", exact probabilities" : ", samples/phase = " + std::to_string(data.settings.samples_per_phase));
    rep.diagnostics.push_back(os.str());
    std::ostringstream cs;
    cs << "condition numbers:";
    for (double c : g.condition) cs << ' ' << c;
    rep.diagnostics.push_back(cs.str());
  }

  if (opts.physicality_projection) {
    const double stat_tol = data.exact() ? 1e-12 : 1.0 / std::sqrt(static_cast<double>(data.settings.samples_per_phase));
    for (int i = 0; i < 2; ++i)
      if (project_psd(rep.diagonal_blocks[i], -10.0 * stat_tol))
        rep.diagnostics.push_back("rho^(" + std::to_string(i + 1) + std::to_string(i + 1) +
                                  ") projected onto the positive semidefinite cone");
  }

  const Overlap ov = extract_overlap(rep.diagonal_blocks[0], rep.diagonal_blocks[1], rep.c1_mod, rep.c2_mod);
  rep.r = ov.r;
  rep.beta = ov.beta;
  for (const auto& w : ov.warnings) rep.diagnostics.push_back(w);

  if (!rotations) {
    rep.theta_failure = "no rotation data supplied";
    rep.diagnostics.push_back("theta unrecovered: no rotation data supplied");
  } else {
    try {
      const ThetaResult tr =
          recover_theta(rotations->primary, ov.r, ov.beta, rep.c1_mod, rep.c2_mod, rotations->secondary, opts.theta);
      rep.theta = tr.theta;
      if (tr.clamped) rep.diagnostics.push_back("arcsin argument clamped to [-1, 1]");
      if (tr.ambiguous) rep.diagnostics.push_back("arcsin branch ambiguous without a second rotation; principal branch kept");
    } catch (const StatisticalError& e) {
      rep.theta_failure = e.what();
      rep.diagnostics.push_back(std::string("theta unrecovered: ") + e.what());
    }
  }

  const int dim = n_c + 1;
  std::array<cplx, 3> norms{rep.c1_mod * rep.c1_mod, rep.c2_mod * rep.c2_mod, 0.0};
  OperatorMatrix off = OperatorMatrix::Zero(dim, dim);
  if (rep.theta) {
    const cplx c1 = rep.c1_mod;
    const cplx c2 = std::polar(rep.c2_mod, *rep.theta);
    norms[2] = c1 * std::conj(c2);
    off = norms[2] * ov.psi1 * ov.psi2.adjoint();
    BlockDensity rho(rep.diagonal_blocks[0], off, off.adjoint(), rep.diagonal_blocks[1]);
    const Eigen::MatrixXcd full = rho.full();
    rep.rho_rec = BlockDensity::from_full(0.5 * (full + full.adjoint()));
  }

  if (truth) {
    const int common = std::max(truth->dim(), dim);
    const BlockDensity t = truth->resized(common);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      OperatorMatrix rec = OperatorMatrix::Zero(common, common);
      rec.topLeftCorner(dim, dim) = rep.diagonal_blocks[i];
      err = std::max(err, max_abs_difference(rec, t.block(i, i)));
    }
    rep.diagonal_max_error = err;
    if (rep.rho_rec) {
      const Eigen::MatrixXcd rec_full = rep.rho_rec->resized(common).full();
      rep.fidelity = fidelity(t.full(), rec_full);
      rep.trace_distance = trace_distance(t.full(), rec_full);
    }
  }

  if (opts.grid) {
    rep.wigner = wigner_set({rep.diagonal_blocks[0], rep.diagonal_blocks[1], off}, norms,
                            {true, true, rep.theta.has_value()}, *opts.grid);
    if (truth) {
      const SpinFockState tp = canonical_pure(*truth);
      const std::array<cplx, 3> tn{std::norm(tp.c1), std::norm(tp.c2), tp.c1 * std::conj(tp.c2)};
      rep.wigner_truth = wigner_set({truth->block(0, 0), truth->block(1, 1), truth->block(0, 1)}, tn,
                                    {true, true, true}, *opts.grid);
    }
  }
  return rep;
}

nlohmann::json ReconstructionReport::to_json() const {
  nlohmann::json j;
  j["rho11"] = cattomo::to_json(diagonal_blocks[0]);
  j["rho22"] = cattomo::to_json(diagonal_blocks[1]);
  j["rho_rec"] = rho_rec ? cattomo::to_json(*rho_rec) : nlohmann::json(nullptr);
  j["c1_mod"] = c1_mod;
  j["c2_mod"] = c2_mod;
  j["theta"] = theta ? nlohmann::json(*theta) : nlohmann::json(nullptr);
  j["theta_recovered"] = theta.has_value();
  j["theta_failure"] = theta_failure ? nlohmann::json(*theta_failure) : nlohmann::json(nullptr);
  j["r"] = r;
  j["beta"] = beta;
  j["condition_numbers"] = condition_numbers;
  nlohmann::json metrics = nlohmann::json::object();
  if (fidelity) metrics["fidelity"] = *fidelity;
  if (trace_distance) metrics["trace_distance"] = *trace_distance;
  if (diagonal_max_error) metrics["diagonal_max_error"] = *diagonal_max_error;
  j["metrics"] = metrics;
  j["diagnostics"] = diagnostics;
  return j;
}

ReconstructionReport ReconstructionReport::from_json(const nlohmann::json& j) {
  ReconstructionReport rep;
  rep.diagonal_blocks[0] = matrix_from_json(j.at("rho11"));
  rep.diagonal_blocks[1] = matrix_from_json(j.at("rho22"));
  if (!j.at("rho_rec").is_null()) rep.rho_rec = block_density_from_json(j.at("rho_rec"));
  rep.c1_mod = j.at("c1_mod").get<double>();
  rep.c2_mod = j.at("c2_mod").get<double>();
  if (!j.at("theta").is_null()) rep.theta = j.at("theta").get<double>();
  if (!j.at("theta_failure").is_null()) rep.theta_failure = j.at("theta_failure").get<std::string>();
  rep.r = j.at("r").get<double>();
  rep.beta = j.at("beta").get<double>();
  rep.condition_numbers = j.at("condition_numbers").get<std::vector<double>>();
  const auto& m = j.at("metrics");
  if (m.contains("fidelity")) rep.fidelity = m.at("fidelity").get<double>();
  if (m.contains("trace_distance")) rep.trace_distance = m.at("trace_distance").get<double>();
  if (m.contains("diagonal_max_error")) rep.diagonal_max_error = m.at("diagonal_max_error").get<double>();
  rep.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return rep;
}

}  // namespace cattomo
