#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "radloc/baselines/benchmark.hpp"
#include "radloc/cae/cae.hpp"
#include "radloc/env/config.hpp"
#include "radloc/estimator/estimator.hpp"
#include "radloc/obs/observations.hpp"
#include "radloc/ppo/policy.hpp"
#include "radloc/ppo/trainer.hpp"

namespace radloc::io {

// Everything a CLI run needs, as one JSON document with blocks env, obs,
// policy, train, cae, estimator and benchmark plus a global seed.
struct RunConfig {
  std::uint64_t seed = 0;
  env::EnvConfig env;
  obs::ObservationConfig obs;
  ppo::PolicyConfig policy;
  ppo::TrainConfig train;
  // 9-action ablation (declarations removed).
  bool odmtl = false;

  cae::CaeConfig cae;
  std::size_t cae_dataset_size = 5000;

  estimator::EstimatorConfig estimator;
  estimator::DatasetOptions estimator_dataset;
  // "actor" (trained checkpoint) or "sweep" (scripted driver).
  std::string estimator_policy = "actor";

  baselines::BenchmarkConfig benchmark;
};

// Overlays the JSON text on the defaults. Throws ConfigError on unknown
// keys, wrong types or invalid values.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Copies shared values into the blocks that repeat them (grid size, window,
// embedding size, seeds, ablation) and validates every block.
void finalize(RunConfig& config);

// Fully resolved config; parse_run_config(to_json(c)) reproduces c.
std::string to_json(const RunConfig& config);

}  // namespace radloc::io
