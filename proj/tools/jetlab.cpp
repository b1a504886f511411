#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "jetlab/harness.hpp"

using namespace jetlab;

namespace {

int config_failure(const std::string& mode, const std::string& message, const RunOptions& opt) {
  std::cerr << "jetlab: " << message << "\n";
  if (!opt.out_dir && !std::getenv("JETLAB_OUT_DIR")) return 2;
  RunManifest man;
  man.mode = mode;
  man.version = tool_version();
  man.out_dir = resolve_out_dir(opt, "");
  man.error_code = "config";
  man.error_message = message;
  std::filesystem::create_directories(man.out_dir);
  std::ofstream(std::filesystem::path(man.out_dir) / "manifest.json") << man.to_json().dump(2) << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jetlab: jet-calculus and holonomic approximation experiments"};
  std::string mode, config_path, out_dir;
  double grid_scale = 0.0;
  bool exact = false;
  app.add_flag_callback("--version", [] {
    std::cout << "jetlab " << tool_version() << "\n";
    throw CLI::Success();
  }, "Print the tool version");
  app.add_flag_callback("--schema", [] {
    std::cout << config_schema().dump(2) << "\n";
    throw CLI::Success();
  }, "Print the config JSON schema");
  app.add_option("mode", mode, "Experiment mode")->check(CLI::IsMember(experiment_modes()));
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (overrides JETLAB_OUT_DIR and the config)");
  app.add_option("--grid-scale", grid_scale, "Multiplier for sampling densities")->check(CLI::PositiveNumber);
  app.add_flag("--exact", exact, "Exact rational reconstruction check (decompose)");
  CLI11_PARSE(app, argc, argv);

  if (mode.empty() || config_path.empty()) {
    std::cerr << "jetlab: a mode and --config are required\n" << app.help();
    return 2;
  }
  RunOptions opt;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (grid_scale > 0.0) opt.grid_scale = grid_scale;
  opt.exact = exact;

  ExperimentConfig cfg;
  try {
    std::ifstream f(config_path);
    json j = json::parse(f);
    if (j.is_object() && !j.contains("mode")) j["mode"] = mode;
    cfg = parse_config(j);
  } catch (const std::exception& e) {
    return config_failure(mode, e.what(), opt);
  }
  if (cfg.mode != mode)
    return config_failure(mode, "config mode '" + cfg.mode + "' does not match command '" + mode + "'", opt);

  RunManifest man = run_experiment(cfg, opt);
  std::cout << "mode " << man.mode << ", config " << man.config_hash << ", output " << man.out_dir << "\n";
  for (const auto& c : man.checks) std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << "\n";
  if (man.error_code) std::cerr << "jetlab: " << man.error_code.value() << ": " << man.error_message.value_or("") << "\n";
  return man.exit_code();
}
