// Command-line driver: synthesize -> scan -> reconstruct, or all at once.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cattomo/errors.hpp"
#include "cattomo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cattomo;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--seed", c.seed, "override scan.seed");
}

PipelineConfig load(const Common& c) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(c.config));
  } catch (const std::exception& e) {
    throw ConfigError(c.config + ": " + e.what());
  }
  if (c.seed) {
    if (!j.contains("scan")) j["scan"] = nlohmann::json::object();
    j["scan"]["seed"] = *c.seed;
  }
  return PipelineConfig::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-cyclotron cat-state synthesis and tomography"};
  app.require_subcommand(1);

  Common syn_opts, scan_opts, rec_opts, pipe_opts;
  std::string state_file, dataset_file;
  std::optional<std::string> rotation_file, truth_file;

  auto* syn = app.add_subcommand("synthesize", "prepare the spin-cyclotron state");
  add_common(syn, syn_opts);
  auto* scan = app.add_subcommand("scan", "simulate the displaced magnetic-bottle measurement");
  add_common(scan, scan_opts);
  scan->add_option("--state", state_file, "state file written by synthesize")->required()->check(CLI::ExistingFile);
  auto* rec = app.add_subcommand("reconstruct", "tomographic reconstruction from a phase-scan dataset");
  add_common(rec, rec_opts);
  rec->add_option("--dataset", dataset_file, "dataset.json written by scan")->required()->check(CLI::ExistingFile);
  rec->add_option("--rotation", rotation_file, "rotation.json (spin populations after rotations)");
  rec->add_option("--truth", truth_file, "state file to score the reconstruction against");
  auto* pipe = app.add_subcommand("pipeline", "run every stage");
  add_common(pipe, pipe_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (syn->parsed()) return cmd_synthesize(load(syn_opts), syn_opts.out);
    if (scan->parsed()) return cmd_scan(state_file, load(scan_opts), scan_opts.out);
    if (rec->parsed()) {
      const auto opt_path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
        if (s) return fs::path(*s);
        return std::nullopt;
      };
      return cmd_reconstruct(dataset_file, opt_path(rotation_file), opt_path(truth_file), load(rec_opts), rec_opts.out);
    }
    return cmd_pipeline(load(pipe_opts), pipe_opts.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
