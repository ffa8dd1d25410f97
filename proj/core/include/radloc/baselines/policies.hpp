#pragma once

#include <cstdint>
#include <vector>

#include "radloc/env/policy.hpp"
#include "radloc/ppo/policy.hpp"

namespace radloc::baselines {

// Action that moves from `from` to the adjacent cell `to`.
env::Action step_toward_neighbor(env::Cell from, env::Cell to);

// First step of a shortest 8-connected free-space path from `from` to `to`;
// Idle when already there or unreachable.
env::Action first_step(const env::Grid& grid, env::Cell from, env::Cell to);

// Pre-planned coverage: the grid's columns are split into N vertical strips,
// one per agent; each agent walks its strip column by column in alternating
// directions, skipping obstacles and cells any teammate already visited, and
// travels along BFS shortest paths to its next waypoint. Never declares.
class UniformSweepPolicy : public env::Policy {
 public:
  void begin_episode(const env::SearchEnvironment& env) override;
  std::vector<env::Action> act(const env::SearchEnvironment& env,
                               const std::vector<obs::ReducedObservation>& observations) override;
  const char* name() const override { return "uniform"; }

  // Waypoint order of one agent's strip (obstacles excluded).
  static std::vector<env::Cell> strip_waypoints(const env::Grid& grid, int agent, int n_agents);
  bool finished(int agent) const {
    return cursor_[static_cast<std::size_t>(agent)] >=
           plans_[static_cast<std::size_t>(agent)].size();
  }

 private:
  std::vector<std::vector<env::Cell>> plans_;
  std::vector<std::size_t> cursor_;
};

// Uniform over available movement actions (Idle only when boxed in).
class RandomPolicy : public env::Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::vector<env::Action> act(const env::SearchEnvironment& env,
                               const std::vector<obs::ReducedObservation>& observations) override;
  const char* name() const override { return "random"; }

 private:
  Rng rng_;
};

// Scripted dataset driver: sweeps like UniformSweepPolicy, and after
// `declare_after` steps without success every agent declares unreachable if
// the team has seen any counts, nonexistent otherwise.
class SweepThenDeclarePolicy : public env::Policy {
 public:
  explicit SweepThenDeclarePolicy(int declare_after = 30) : declare_after_(declare_after) {}
  void begin_episode(const env::SearchEnvironment& env) override { sweep_.begin_episode(env); }
  std::vector<env::Action> act(const env::SearchEnvironment& env,
                               const std::vector<obs::ReducedObservation>& observations) override;
  const char* name() const override { return "sweep-declare"; }

 private:
  UniformSweepPolicy sweep_;
  int declare_after_;
};

// Prior-method ablation: 9 actions (moves and Idle), declarations disabled;
// all three scenarios still occur.
void apply_odmtl_mode(env::EnvConfig& env_config, ppo::PolicyConfig& policy_config);

}  // namespace radloc::baselines
