#include "radloc/baselines/policies.hpp"

#include <algorithm>
#include <deque>

#include "radloc/common/error.hpp"

namespace radloc::baselines {

env::Action step_toward_neighbor(env::Cell from, env::Cell to) {
  const env::Cell delta{to.row - from.row, to.col - from.col};
  for (int d = 1; d <= env::kDirections; ++d) {
    if (env::move_offset(d) == delta) return env::move_action(d);
  }
  return env::Action::idle;
}

env::Action first_step(const env::Grid& grid, env::Cell from, env::Cell to) {
  if (from == to || !grid.is_free(to)) return env::Action::idle;
  // BFS from the goal so the first step is read off the source's neighbors.
  std::vector<int> dist(grid.cell_count(), -1);
  std::deque<env::Cell> queue{to};
  dist[grid.index(to)] = 0;
  while (!queue.empty() && dist[grid.index(from)] < 0) {
    const auto c = queue.front();
    queue.pop_front();
    for (const auto& o : env::kNeighborOffsets) {
      const env::Cell n{c.row + o.row, c.col + o.col};
      if (grid.is_free(n) && dist[grid.index(n)] < 0) {
        dist[grid.index(n)] = dist[grid.index(c)] + 1;
        queue.push_back(n);
      }
    }
  }
  const int here = dist[grid.index(from)];
  if (here < 0) return env::Action::idle;
  for (int d = 1; d <= env::kDirections; ++d) {
    const auto o = env::move_offset(d);
    const env::Cell n{from.row + o.row, from.col + o.col};
    if (grid.is_free(n) && dist[grid.index(n)] == here - 1) return env::move_action(d);
  }
  return env::Action::idle;
}

std::vector<env::Cell> UniformSweepPolicy::strip_waypoints(const env::Grid& grid, int agent,
                                                           int n_agents) {
  const int w = grid.width(), h = grid.height();
  const int c0 = agent * w / n_agents, c1 = (agent + 1) * w / n_agents;
  std::vector<env::Cell> out;
  for (int c = c0; c < c1; ++c) {
    const bool down = (c - c0) % 2 == 0;
    for (int i = 0; i < h; ++i) {
      const env::Cell cell{down ? i : h - 1 - i, c};
      if (!grid.is_obstacle(cell)) out.push_back(cell);
    }
  }
  return out;
}

void UniformSweepPolicy::begin_episode(const env::SearchEnvironment& env) {
  const auto& grid = env.state().grid;
  const auto labels = env::label_components(grid);
  plans_.assign(static_cast<std::size_t>(env.n_agents()), {});
  cursor_.assign(static_cast<std::size_t>(env.n_agents()), 0);
  for (int a = 0; a < env.n_agents(); ++a) {
    const int comp = labels[grid.index(env.state().agents[static_cast<std::size_t>(a)])];
    for (const auto& c : strip_waypoints(grid, a, env.n_agents())) {
      // Cells sealed off from the agent cannot be swept.
      if (labels[grid.index(c)] == comp) plans_[static_cast<std::size_t>(a)].push_back(c);
    }
  }
}

std::vector<env::Action> UniformSweepPolicy::act(const env::SearchEnvironment& env,
                                                 const std::vector<obs::ReducedObservation>&) {
  if (plans_.size() != static_cast<std::size_t>(env.n_agents())) begin_episode(env);
  const auto& grid = env.state().grid;
  const auto& visits = env.maps().visits;
  std::vector<env::Action> actions;
  for (int a = 0; a < env.n_agents(); ++a) {
    const auto at = env.state().agents[static_cast<std::size_t>(a)];
    auto& plan = plans_[static_cast<std::size_t>(a)];
    auto& k = cursor_[static_cast<std::size_t>(a)];
    while (k < plan.size() && (plan[k] == at || visits[grid.index(plan[k])] > 0)) ++k;
    actions.push_back(k < plan.size() ? first_step(grid, at, plan[k]) : env::Action::idle);
  }
  return actions;
}

std::vector<env::Action> RandomPolicy::act(const env::SearchEnvironment& env,
                                           const std::vector<obs::ReducedObservation>&) {
  std::vector<env::Action> actions;
  for (int a = 0; a < env.n_agents(); ++a) {
    const auto mask = env.action_mask(a);
    std::vector<int> moves;
    for (int d = 0; d < env::kDirections; ++d) {
      if (mask[static_cast<std::size_t>(d)]) moves.push_back(d);
    }
    actions.push_back(moves.empty()
                          ? env::Action::idle
                          : env::action_from_index(moves[static_cast<std::size_t>(
                                uniform_int(rng_, 0, static_cast<int>(moves.size()) - 1))]));
  }
  return actions;
}

std::vector<env::Action> SweepThenDeclarePolicy::act(
    const env::SearchEnvironment& env, const std::vector<obs::ReducedObservation>& observations) {
  if (env.state().step < declare_after_ || !env.config().allow_declarations) {
    return sweep_.act(env, observations);
  }
  const auto decl = env.maps().readings_max > 0 ? env::Action::declare_unreachable
                                                : env::Action::declare_nonexistent;
  return std::vector<env::Action>(static_cast<std::size_t>(env.n_agents()), decl);
}

void apply_odmtl_mode(env::EnvConfig& env_config, ppo::PolicyConfig& policy_config) {
  env_config.allow_declarations = false;
  policy_config.n_actions = env::kNumActionsNoDeclare;
}

}  // namespace radloc::baselines
