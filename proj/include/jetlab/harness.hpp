#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jetlab/serialize.hpp"
#include "jetlab/verify.hpp"

namespace jetlab {

// Field given as one expression (a scalar field), a JSON array of
// expressions (one per output component), or JSON text of either.
Field parse_field_expression(const json& j, int in_dim, const std::string& path = "$");

struct ExperimentConfig {
  std::string mode;
  int m = 0;
  int n = 0;
  int r = 0;
  int k = 0;
  int q = 0;
  int l = 0;
  double eps = 0.0;
  double delta = 0.0;
  double lambda = 0.1;
  std::optional<double> theta;
  std::vector<StageParams> schedule;
  double grid_scale = 1.0;
  bool defect_check = true;
  bool resolution_check = true;
  std::uint64_t seed = 0;
  std::string out_dir;
  // The config exactly as read; hashed and stored with the outputs.
  json raw;
};

const std::vector<std::string>& experiment_modes();
json config_schema();

// Schema and dimension/order checks; throws Error("config", ...) with the
// offending key path. Field specifications are parsed here as well.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& path);

// 64-bit FNV-1a over the compact dump of the config (keys sorted).
std::uint64_t config_hash(const json& config);
std::string hash_hex(std::uint64_t h);

struct RunOptions {
  // Precedence: out_dir, then JETLAB_OUT_DIR, then the config's output.dir,
  // then ./jetlab_out.
  std::optional<std::string> out_dir;
  std::optional<double> grid_scale;
  // decompose only: reconstruction residual in exact rationals.
  bool exact = false;
};

struct CheckSummary {
  std::string name;
  bool passed = true;
  double value = 0.0;
};

struct RunManifest {
  std::string mode;
  std::string config_hash;
  std::string version;
  std::string started;
  std::string finished;
  std::string out_dir;
  std::vector<std::string> files;
  std::vector<CheckSummary> checks;
  bool structural_ok = true;
  std::optional<std::string> error_code;
  std::optional<std::string> error_message;

  // 0: every structural check passed; 1: a structural check failed;
  // 2: configuration or operation error.
  int exit_code() const;
  json to_json() const;
};

std::string tool_version();
std::string resolve_out_dir(const RunOptions& opt, const std::string& config_dir);

// Writes the config, the JSON report and CSV tables, then manifest.json.
// Operation errors are caught and recorded in the manifest.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace jetlab
