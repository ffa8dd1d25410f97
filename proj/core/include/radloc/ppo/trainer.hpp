#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radloc/cae/cae.hpp"
#include "radloc/ppo/evaluate.hpp"
#include "radloc/ppo/ppo.hpp"

namespace radloc::ppo {

struct TrainConfig {
  PpoConfig ppo;
  // Environment steps per update cycle, summed over all environments.
  long horizon = 4000;
  long total_steps = 30'000'000;
  long eval_every = 40'000;
  long eval_steps = 4'000;
  // Lock-stepped rollout environments; must divide the horizon.
  int n_envs = 1;
  // Multiplies rewards seen by the learner; reported rewards stay unscaled.
  double reward_scale = 1.0;
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config, const env::EnvConfig& env_config);

// One evaluation point.
struct MetricsRow {
  long step = 0;
  EvalMetrics eval;
  // Mean losses of the latest update; empty before the first update.
  std::optional<UpdateStats> update;
};

// Metrics CSV: step, episodic reward/length/cost means, one success-rate
// column per scenario, then loss_clip, loss_vf, entropy.
std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

struct TrainHooks {
  // After each evaluation (including the initial one at step 0).
  std::function<void(const MetricsRow&, const ActorCritic&)> on_eval;
  // After each update cycle.
  std::function<void(long step, const UpdateStats&, const std::vector<EpisodeRecord>&)> on_update;
};

struct TrainResult {
  ActorCritic model;
  std::vector<MetricsRow> rows;
  long steps = 0;
  // Set when training stopped on a non-finite loss; `model` is then the last
  // finite parameters.
  std::optional<std::string> error;
};

// Rollout / GAE / update cycles until total_steps, with greedy evaluation
// every eval_every steps on a dedicated environment.
TrainResult train(const env::EnvConfig& env_config, const obs::ObservationConfig& obs_config,
                  const PolicyConfig& policy_config, const TrainConfig& config,
                  std::shared_ptr<const cae::Encoder> encoder, const TrainHooks& hooks = {});

}  // namespace radloc::ppo
