#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "radloc/env/policy.hpp"
#include "radloc/ppo/rollout.hpp"

namespace radloc::ppo {

struct ScenarioMetrics {
  int episodes = 0;
  double success_rate = 0.0;
  double timeout_rate = 0.0;
  double wrong_declaration_rate = 0.0;
  double length_mean = 0.0;
  double cost_mean = 0.0;
};

// Averages over episodes completed within the step budget.
struct EvalMetrics {
  int episodes = 0;
  double reward_mean = 0.0;
  double length_mean = 0.0;
  double cost_mean = 0.0;
  double wrong_declaration_rate = 0.0;
  std::array<ScenarioMetrics, env::kNumScenarios> scenarios{};
  std::vector<EpisodeRecord> records;
};

EvalMetrics summarize(const std::vector<EpisodeRecord>& records);

// Episode k is reset with derive_seed(seed, Stream::eval, k), so every policy
// and every evaluation point sees the same episode sequence.
std::uint64_t eval_episode_seed(std::uint64_t seed, std::uint64_t episode);

// Runs `policy` for `steps` environment steps (the unfinished tail episode
// is dropped).
EvalMetrics run_policy_steps(env::SearchEnvironment& env, env::Policy& policy, long steps,
                             std::uint64_t seed);

// Runs exactly `episodes` complete episodes.
EvalMetrics run_policy_episodes(env::SearchEnvironment& env, env::Policy& policy, int episodes,
                                std::uint64_t seed);

// Greedy masked-argmax evaluation of the actor.
EvalMetrics evaluate_policy(const ActorCritic& model, env::SearchEnvironment& env, long eval_steps,
                            std::uint64_t seed);

}  // namespace radloc::ppo
