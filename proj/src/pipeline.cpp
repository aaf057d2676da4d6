#include "cattomo/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "cattomo/errors.hpp"
#include "cattomo/metrics.hpp"
#include "cattomo/serialize.hpp"

namespace cattomo {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// Field access with path-qualified ConfigError messages.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, _] : j_.items())
      if (!allowed.count(key)) throw ConfigError(path_ + "." + key + ": unknown field");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string where(const std::string& key) const { return path_ + "." + key; }
  const nlohmann::json& raw(const std::string& key) const { return j_.at(key); }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  double number(const std::string& key, double fallback) const {
    if (has(key) && !j_.at(key).is_number()) throw ConfigError(where(key) + ": expected a number");
    const double v = get<double>(key, fallback);
    if (!std::isfinite(v)) throw ConfigError(where(key) + ": must be finite");
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (has(key) && !j_.at(key).is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return get<std::int64_t>(key, fallback);
  }

  void require(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ConfigError(where(key) + ": " + what);
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  Section root(j, "config", {"synthesis", "scan", "tomography", "output"});
  if (!root.has("synthesis")) throw ConfigError("config.synthesis: missing");

  Section syn(j.at("synthesis"), "synthesis", {"alpha", "pulse", "form", "dim"});
  syn.require(syn.has("alpha") != syn.has("pulse"), "alpha", "give exactly one of alpha or pulse");
  if (syn.has("alpha")) {
    try {
      cfg.synthesis.alpha = complex_from_json(syn.raw("alpha"));
    } catch (const std::exception&) {
      throw ConfigError("synthesis.alpha: expected [re, im]");
    }
    syn.require(std::isfinite(cfg.synthesis.alpha->real()) && std::isfinite(cfg.synthesis.alpha->imag()), "alpha",
                "must be finite");
  } else {
    Section p(syn.raw("pulse"), "synthesis.pulse", {"zeta_tilde", "eps_tilde", "d", "quad_points", "metadata"});
    PulseConfig pc;
    pc.zeta_tilde = p.number("zeta_tilde", 0.0);
    pc.eps_tilde = p.number("eps_tilde", 0.0);
    pc.d = p.number("d", 1.0);
    pc.quad_points = static_cast<int>(p.integer("quad_points", 41));
    if (p.has("metadata")) pc.metadata = p.get<std::map<std::string, double>>("metadata", {});
    p.require(pc.zeta_tilde >= 0.0, "zeta_tilde", "must be >= 0");
    p.require(pc.eps_tilde >= 0.0, "eps_tilde", "must be >= 0");
    p.require(pc.d > 0.0, "d", "must be > 0");
    p.require(pc.quad_points >= 1 && pc.quad_points % 2 == 1, "quad_points", "must be odd and >= 1");
    cfg.synthesis.pulse = pc;
  }
  cfg.synthesis.form = syn.get<std::string>("form", "cat");
  syn.require(cfg.synthesis.form == "cat" || cfg.synthesis.form == "entangled", "form",
              "must be \"cat\" or \"entangled\"");
  cfg.synthesis.dim = static_cast<int>(syn.integer("dim", 0));
  syn.require(cfg.synthesis.dim >= 0, "dim", "must be >= 1 (or 0 for the default)");

  if (root.has("tomography")) {
    Section t(j.at("tomography"), "tomography", {"n_c", "s_max", "second_rotation_phase", "branch_tolerance"});
    cfg.tomography.n_c = static_cast<int>(t.integer("n_c", 12));
    t.require(cfg.tomography.n_c >= 1, "n_c", "must be >= 1");
    cfg.tomography.s_max = static_cast<int>(t.integer("s_max", -1));
    t.require(cfg.tomography.s_max >= -1 && cfg.tomography.s_max <= cfg.tomography.n_c, "s_max",
              "must lie in [0, n_c] (or -1 for n_c)");
    cfg.tomography.second_rotation_phase = t.number("second_rotation_phase", kPi / 3);
    t.require(std::abs(std::sin(cfg.tomography.second_rotation_phase)) > 1e-6, "second_rotation_phase",
              "must not be a multiple of pi (it would not separate the arcsin branches)");
    cfg.tomography.branch_tolerance = t.number("branch_tolerance", 0.05);
    t.require(cfg.tomography.branch_tolerance > 0.0, "branch_tolerance", "must be > 0");
  }

  if (root.has("scan")) {
    Section s(j.at("scan"), "scan",
              {"gamma_mod", "phase_count", "samples_per_phase", "eta", "seed", "exact_mode", "n_max", "omega_b", "g",
               "rotation_samples", "project_to_cutoff"});
    auto& sc = cfg.scan;
    sc.gamma_mod = s.number("gamma_mod", 1.2);
    s.require(sc.gamma_mod > 0.0, "gamma_mod", "must be > 0 (|gamma| = 0 carries no phase information)");
    sc.phase_count = static_cast<int>(s.integer("phase_count", 0));
    sc.samples_per_phase = s.integer("samples_per_phase", 1'000'000);
    sc.eta = s.number("eta", 1.0);
    s.require(sc.eta > 0.0 && sc.eta <= 1.0, "eta", "must lie in (0, 1]");
    if (s.has("seed")) {
      s.require(s.raw("seed").is_number_unsigned() ||
                    (s.raw("seed").is_number_integer() && s.raw("seed").get<std::int64_t>() >= 0),
                "seed", "expected a non-negative integer");
      sc.seed = s.raw("seed").get<std::uint64_t>();
    }
    sc.exact_mode = s.get<bool>("exact_mode", false);
    s.require(sc.exact_mode || sc.samples_per_phase >= 1, "samples_per_phase", "must be >= 1");
    sc.n_max = static_cast<int>(s.integer("n_max", 0));
    sc.omega_b = s.number("omega_b", 1.0);
    s.require(sc.omega_b > 0.0, "omega_b", "must be > 0");
    sc.g = s.number("g", 2.00231930436);
    s.require(sc.g != 2.0, "g", "g = 2 makes (n, spin) levels indistinguishable");
    sc.rotation_samples = s.integer("rotation_samples", 0);
    s.require(sc.rotation_samples >= 0, "rotation_samples", "must be >= 0");
    sc.project_to_cutoff = s.get<bool>("project_to_cutoff", false);
    s.require(sc.n_max == 0 || sc.n_max >= cfg.tomography.n_c, "n_max", "must be >= tomography.n_c");
    s.require(sc.phase_count == 0 || sc.phase_count >= 2 * cfg.s_max() + 1, "phase_count",
              "must be >= 2 s_max + 1 = " + std::to_string(2 * cfg.s_max() + 1));
  }

  if (root.has("output")) {
    Section o(j.at("output"), "output", {"grid"});
    if (o.has("grid")) {
      Section g(o.raw("grid"), "output.grid", {"re_min", "re_max", "im_min", "im_max", "points"});
      auto& gs = cfg.output.grid;
      gs.re_min = g.number("re_min", -3.0);
      gs.re_max = g.number("re_max", 3.0);
      gs.im_min = g.number("im_min", -3.0);
      gs.im_max = g.number("im_max", 3.0);
      gs.points = static_cast<int>(g.integer("points", 61));
      g.require(gs.re_min < gs.re_max, "re_max", "must exceed re_min");
      g.require(gs.im_min < gs.im_max, "im_max", "must exceed im_min");
      g.require(gs.points >= 2 && gs.points <= 2001, "points", "must lie in [2, 2001]");
    }
  }
  cfg.raw = j;
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

int PipelineConfig::dim() const {
  if (synthesis.dim > 0) return synthesis.dim;
  return default_dimension(synthesis.alpha ? *synthesis.alpha : synthesis.pulse->alpha());
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string PipelineConfig::hash() const { return sha256_hex(raw.dump()); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [stage, path] : outputs) outs.push_back({{"stage", stage}, {"path", path}});
  return {{"config_hash", config_hash},
          {"seed", seed},
          {"version", version},
          {"started", started},
          {"finished", finished},
          {"outputs", outs},
          {"completed_stages", completed_stages},
          {"failure", failure ? nlohmann::json(*failure) : nlohmann::json(nullptr)}};
}

namespace {

BlockDensity vacuum_up_density(int dim) {
  BlockDensity rho(dim);
  rho.block(0, 0)(0, 0) = 1.0;
  return rho;
}

BlockDensity to_cat_form(const BlockDensity& rho) {
  return spin_rotation(spin_rotation(rho, kPi / 2, kPi / 2), kPi, 0.0);
}

}  // namespace

SynthesisOutput run_synthesis(const PipelineConfig& cfg) {
  const int dim = cfg.dim();
  const bool cat = cfg.synthesis.form == "cat";
  SynthesisOutput out;
  nlohmann::json& summary = out.summary;
  if (cfg.synthesis.alpha) {
    const cplx alpha = *cfg.synthesis.alpha;
    const CoherentState probe = coherent_state(alpha, dim);
    summary["coherent_norm_deficit"] = probe.norm_deficit;
    if (probe.truncation_warning) summary["warnings"].push_back("coherent-state norm deficit exceeds 1e-8 at this dimension");
    out.state = cat ? synthesize_cat(alpha, dim) : synthesize_entangled(alpha, dim);
    summary["alpha"] = to_json(alpha);
  } else {
    const PulseConfig& pulse = *cfg.synthesis.pulse;
    const BlockDensity rho0 = vacuum_up_density(dim);
    BlockDensity traced = gaussian_traced_entangle(rho0, pulse);
    BlockDensity ideal = ideal_entangle(rho0, pulse.alpha());
    if (cat) {
      traced = to_cat_form(traced);
      ideal = to_cat_form(ideal);
    }
    summary["alpha"] = to_json(pulse.alpha());
    summary["pulse"] = to_json(pulse);
    summary["fidelity_to_ideal"] = fidelity(ideal.full(), traced.full());
    out.state = traced;
  }
  const BlockDensity rho = as_density(out.state);
  summary["form"] = cfg.synthesis.form;
  summary["dim"] = dim;
  summary["spin_entropy"] = spin_entropy(rho);
  summary["mean_excitation"] = mean_excitation(rho);
  summary["trace_rho11"] = rho.block(0, 0).trace().real();
  summary["trace_rho22"] = rho.block(1, 1).trace().real();
  return out;
}

double project_to_cutoff(BlockDensity& rho, int n_c) {
  const double before = rho.trace();
  BlockDensity cut = rho.resized(std::min(n_c + 1, rho.dim()));
  const double after = cut.trace();
  if (!(after > 0.0)) throw NumericalError("project_to_cutoff: no weight inside the cutoff space");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) cut.block(i, j) *= before / after;
  rho = cut;
  return before - after;
}

PhaseScanDataset run_scan(const BlockDensity& rho, const PipelineConfig& cfg) {
  ScanSettings scan;
  scan.gamma_mod = cfg.scan.gamma_mod;
  scan.phases = uniform_phases(cfg.phase_count());
  scan.samples_per_phase = cfg.scan.samples_per_phase;
  scan.seed = cfg.scan.seed;
  scan.exact_mode = cfg.scan.exact_mode;
  BottleConfig bottle;
  bottle.omega_b = cfg.scan.omega_b;
  bottle.g = cfg.scan.g;
  bottle.eta = cfg.scan.eta;
  bottle.n_max = cfg.n_max();
  return run_phase_scan(rho, scan, bottle);
}

RotationData run_rotations(const BlockDensity& rho, const PipelineConfig& cfg) {
  const std::int64_t samples =
      cfg.scan.exact_mode ? 0 : (cfg.scan.rotation_samples > 0 ? cfg.scan.rotation_samples : cfg.scan.samples_per_phase);
  return measure_rotations(rho, cfg.tomography.second_rotation_phase, samples, cfg.scan.seed);
}

ReconstructionReport run_reconstruction(const PhaseScanDataset& data, const std::optional<RotationData>& rotations,
                                        const PipelineConfig& cfg, const std::optional<BlockDensity>& truth) {
  ReconstructionOptions opts;
  opts.n_c = cfg.tomography.n_c;
  opts.s_max = cfg.s_max();
  opts.theta.branch_tolerance = cfg.tomography.branch_tolerance;
  opts.grid = cfg.output.grid;
  return reconstruct(data, rotations, opts, truth);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const StatisticalError*>(&e)) return 4;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
  return 1;
}

namespace {

class Run {
 public:
  Run(const PipelineConfig& cfg, fs::path out) : out_(std::move(out)) {
    manifest_.config_hash = cfg.hash();
    manifest_.seed = cfg.scan.seed;
    manifest_.version = kVersion;
    manifest_.started = utc_now();
    fs::create_directories(out_);
  }

  void write(const std::string& stage, const std::string& name, const std::string& text) {
    write_text_file((out_ / name).string(), text);
    manifest_.outputs.emplace_back(stage, name);
  }
  void done(const std::string& stage) { manifest_.completed_stages.push_back(stage); }

  int finish(int code, const std::optional<std::string>& failure = std::nullopt) {
    manifest_.failure = failure;
    manifest_.finished = utc_now();
    write_text_file((out_ / "manifest.json").string(), manifest_.to_json().dump(2) + "\n");
    return code;
  }

  template <typename Fn>
  int guarded(Fn&& body) {
    try {
      return body();
    } catch (const std::exception& e) {
      return finish(exit_code_for(e), std::string(e.what()));
    }
  }

 private:
  fs::path out_;
  RunManifest manifest_;
};

void write_synthesis(Run& run, const SynthesisOutput& syn) {
  run.write("synthesize", "state.json", state_file_json(syn.state).dump(2) + "\n");
  run.write("synthesize", "synthesis_summary.json", syn.summary.dump(2) + "\n");
  run.done("synthesize");
}

void write_scan(Run& run, const PhaseScanDataset& data, const RotationData& rot, const BlockDensity& measured) {
  run.write("scan", "dataset.json", data.to_json().dump() + "\n");
  run.write("scan", "dataset.csv", data.to_csv());
  run.write("scan", "rotation.json", rot.to_json().dump(2) + "\n");
  run.write("scan", "truth.json", state_file_json(measured).dump() + "\n");
  run.done("scan");
}

int write_report(Run& run, const ReconstructionReport& rep, bool rotations_given) {
  run.write("reconstruct", "report.json", rep.to_json().dump(2) + "\n");
  std::string log;
  for (const auto& line : rep.diagnostics) log += line + "\n";
  run.write("reconstruct", "diagnostics.log", log);
  static const char* names[3] = {"11", "22", "12"};
  const auto emit = [&](const std::optional<WignerSet>& set, const std::string& prefix) {
    if (!set) return;
    for (int b = 0; b < 3; ++b) {
      if (set->tilde[b].re_axis.empty()) continue;
      run.write("reconstruct", prefix + "_" + names[b] + ".csv", set->normalized[b].to_csv());
      run.write("reconstruct", prefix + "_tilde_" + names[b] + ".csv", set->tilde[b].to_csv());
    }
  };
  emit(rep.wigner, "wigner_rec");
  emit(rep.wigner_truth, "wigner_true");
  run.done("reconstruct");
  return rotations_given && !rep.theta ? 4 : 0;
}

}  // namespace

int cmd_synthesize(const PipelineConfig& cfg, const fs::path& out) {
  Run run(cfg, out);
  return run.guarded([&] {
    write_synthesis(run, run_synthesis(cfg));
    return run.finish(0);
  });
}

namespace {

BlockDensity measured_state(BlockDensity rho, const PipelineConfig& cfg) {
  if (cfg.scan.project_to_cutoff) project_to_cutoff(rho, cfg.tomography.n_c);
  return rho;
}

}  // namespace

int cmd_scan(const fs::path& state_file, const PipelineConfig& cfg, const fs::path& out) {
  StateVariant state;
  try {
    state = state_from_file_json(nlohmann::json::parse(read_text_file(state_file.string())));
  } catch (const std::exception& e) {
    throw ConfigError(state_file.string() + ": " + e.what());
  }
  Run run(cfg, out);
  return run.guarded([&] {
    const BlockDensity rho = measured_state(as_density(state), cfg);
    write_scan(run, run_scan(rho, cfg), run_rotations(rho, cfg), rho);
    return run.finish(0);
  });
}

int cmd_reconstruct(const fs::path& dataset_file, const std::optional<fs::path>& rotation_file,
                    const std::optional<fs::path>& truth_file, const PipelineConfig& cfg, const fs::path& out) {
  PhaseScanDataset data;
  std::optional<RotationData> rot;
  std::optional<BlockDensity> truth;
  const auto parse = [](const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); };
  try {
    data = PhaseScanDataset::from_json(parse(dataset_file));
    if (rotation_file) rot = RotationData::from_json(parse(*rotation_file));
    if (truth_file) truth = as_density(state_from_file_json(parse(*truth_file)));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("input files: ") + e.what());
  }
  Run run(cfg, out);
  return run.guarded([&] {
    const ReconstructionReport rep = run_reconstruction(data, rot, cfg, truth);
    return run.finish(write_report(run, rep, rot.has_value()));
  });
}

int cmd_pipeline(const PipelineConfig& cfg, const fs::path& out) {
  Run run(cfg, out);
  return run.guarded([&] {
    const SynthesisOutput syn = run_synthesis(cfg);
    write_synthesis(run, syn);
    const BlockDensity rho = measured_state(as_density(syn.state), cfg);
    const PhaseScanDataset data = run_scan(rho, cfg);
    const RotationData rot = run_rotations(rho, cfg);
    write_scan(run, data, rot, rho);
    const ReconstructionReport rep = run_reconstruction(data, rot, cfg, rho);
    return run.finish(write_report(run, rep, true));
  });
}

}  // namespace cattomo
