#pragma once

#include <string>

#include <json.hpp>

#include "cdegan/common.hpp"
#include "cdegan/evolution.hpp"

namespace cdegan {

struct KdeSpec {
  int resolution = 200;
  double bandwidth = 0.1;
};

// Everything a run needs beyond the evolution hyper-parameters: architecture
// choice, data specs, output plumbing, and evaluation settings.
struct ExperimentConfig {
  std::string arch = "mlp3";
  TrainConfig train;
  GaussianRingSpec ring;
  NoiseSpec noise;
  uint64_t seed = 1;
  std::string out_dir = "out";
  int64_t metrics_interval = 100;
  int64_t checkpoint_interval = 0;  // 0 = final checkpoint only
  int eval_samples = 512;
  double threshold_sigmas = 3.0;
  KdeSpec kde;
  bool stop_on_coverage = false;
  double stop_hq = 0.8;
};

// Sets one key. Accepts the short algorithm letters (T, K, J, I, M, N, B)
// as well as spelled-out names; dotted keys reach nested specs
// (adam.alpha, ring.sigma, kde.resolution, ...). Unknown keys throw
// ConfigError naming the key.
void apply_assignment(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

// "KEY=VAL" as passed to --override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Plain-text config: key = value lines, # comments, optional [section]
// headers that prefix the keys that follow. A file whose first non-space
// character is '{' is parsed as JSON instead; a top-level "config" member
// (as written to summary.json) is used when present.
ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& cfg);

// Flat key -> value object mirroring the assignment vocabulary, so a dumped
// config can be fed back through config_from_json unchanged.
nlohmann::json resolved_config(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

MlpSpec generator_spec(const ExperimentConfig& cfg);
MlpSpec discriminator_spec(const ExperimentConfig& cfg);

TrainSetup make_setup(const ExperimentConfig& cfg);

}  // namespace cdegan
