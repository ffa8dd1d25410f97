#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "radloc/cae/cae.hpp"
#include "radloc/env/search_env.hpp"
#include "radloc/ppo/policy.hpp"

namespace radloc::ppo {

// Summary of one finished episode.
struct EpisodeRecord {
  env::Scenario scenario = env::Scenario::reachable;
  env::Outcome outcome = env::Outcome::none;
  // Unscaled team reward summed over the episode.
  double reward = 0.0;
  int length = 0;
  // Movement actions taken by the whole team.
  int cost = 0;
};

// True when the outcome solves the scenario: found, or correctly declared.
bool solved(const EpisodeRecord& e);

// Experience of E lock-stepped environments with N agents each over T steps.
// Sample (t, e, j) lives at index (t * E + e) * N + j.
struct RolloutBuffer {
  std::size_t steps = 0;
  std::size_t n_envs = 0;
  std::size_t n_agents = 0;
  int n_actions = 0;
  nn::Shape map_shape;
  std::size_t embedding_size = 0;

  std::vector<float> maps;
  std::vector<float> embeddings;
  std::vector<std::uint8_t> masks;
  std::vector<int> actions;
  std::vector<float> log_probs;
  std::vector<float> values;
  // Per (t, e): scaled team reward and episode-ended flag.
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  // Per (e, j): critic value of the observation after the last step.
  std::vector<double> bootstrap;

  std::size_t size() const { return steps * n_envs * n_agents; }
  std::size_t index(std::size_t t, std::size_t e, std::size_t j) const {
    return (t * n_envs + e) * n_agents + j;
  }
  // Network inputs of the listed samples.
  ObsBatch gather(std::span<const std::size_t> samples) const;
  std::vector<std::uint8_t> gather_masks(std::span<const std::size_t> samples) const;
};

// Owns E environments that persist across update cycles, so episodes span
// horizon boundaries. Environments auto-reset on done.
class RolloutCollector {
 public:
  RolloutCollector(const env::EnvConfig& env_config, const obs::ObservationConfig& obs_config,
                   std::shared_ptr<const cae::Encoder> encoder, int n_envs, std::uint64_t seed,
                   double reward_scale = 1.0);

  // Steps every environment `steps_per_env` times with actions sampled from
  // the masked actor distribution.
  RolloutBuffer collect(const ActorCritic& model, std::size_t steps_per_env);

  // Episodes that ended during the last collect().
  const std::vector<EpisodeRecord>& finished() const { return finished_; }
  int n_envs() const { return static_cast<int>(envs_.size()); }

 private:
  std::vector<env::SearchEnvironment> envs_;
  std::vector<std::vector<obs::ReducedObservation>> current_;
  std::vector<EpisodeRecord> running_;
  std::vector<EpisodeRecord> finished_;
  Rng rng_;
  double reward_scale_;
};

}  // namespace radloc::ppo
