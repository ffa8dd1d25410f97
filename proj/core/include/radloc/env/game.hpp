#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/env/actions.hpp"
#include "radloc/env/config.hpp"
#include "radloc/env/grid.hpp"
#include "radloc/env/physics.hpp"
#include "radloc/reward/distance_field.hpp"
#include "radloc/reward/team_reward.hpp"

namespace radloc::env {

enum class Outcome : int {
  none = 0,
  success,
  wrong_declaration,
  timeout,
  declared_nonexistent,
  declared_unreachable,
};

const char* to_string(Outcome o);

struct EnvState {
  Grid grid;
  Scenario scenario = Scenario::reachable;
  TargetSpec target;
  std::vector<Cell> agents;
  int step = 0;
  // BFS field from the target; empty when there is no target.
  reward::DistanceField distance;
  int min_distance = reward::kUnreachable;
  bool done = false;
  Outcome outcome = Outcome::none;
};

struct StepInfo {
  Scenario scenario = Scenario::reachable;
  Outcome outcome = Outcome::none;
  int moved = 0;
  int min_distance = reward::kUnreachable;
  reward::FlagOutcome flags = reward::FlagOutcome::none;
  // Counts collected by each agent at its post-step cell.
  std::vector<std::int64_t> readings;
};

struct GameStep {
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Move(d) is masked iff its destination is outside the grid or an obstacle;
// Idle is always available; declarations unless `allow_declarations` is off.
ActionMask action_mask(const EnvState& state, int agent, bool allow_declarations = true);

// Sampled count for one agent at its current cell.
std::int64_t sample_cpm(const EnvState& state, int agent, double mu, double constant, Rng& rng);

// The partially observable search game: layout, target, agents, joint-action
// stepping, declarations, rewards and termination. Owns its random stream.
class Game {
 public:
  explicit Game(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  int n_agents() const { return config_.n_agents; }

  // New random episode; returns the initial per-agent readings.
  std::vector<std::int64_t> reset();
  // Reseed then reset, for paired episode sequences.
  std::vector<std::int64_t> reset(std::uint64_t episode_seed);
  // Start from an explicit state (tests, replay). Distance field and
  // min_distance are recomputed.
  std::vector<std::int64_t> reset_to(EnvState state);

  // Throws ContractViolation for a masked action, a wrong action count, or
  // stepping a finished episode.
  GameStep step(std::span<const Action> joint_action);

  ActionMask action_mask(int agent) const;

 private:
  std::vector<std::int64_t> sample_all();
  EnvState generate_episode();

  EnvConfig config_;
  Rng rng_;
  EnvState state_;
};

}  // namespace radloc::env
