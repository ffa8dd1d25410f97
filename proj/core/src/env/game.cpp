#include "radloc/env/game.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "radloc/common/error.hpp"
#include "radloc/env/layout.hpp"

namespace radloc::env {

Cell move_offset(int direction) {
  if (direction < 1 || direction > kDirections) {
    throw ContractViolation("movement direction must lie in 1..8");
  }
  const double theta = 2.0 * std::numbers::pi * direction / kDirections;
  return {-static_cast<int>(std::lround(std::sin(theta))),
          static_cast<int>(std::lround(std::cos(theta)))};
}

std::string to_string(Action a) {
  if (is_move(a)) return "move_" + std::to_string(direction_of(a));
  if (a == Action::idle) return "idle";
  if (a == Action::declare_nonexistent) return "declare_nonexistent";
  return "declare_unreachable";
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::reachable:
      return "reachable";
    case Scenario::unreachable:
      return "unreachable";
    case Scenario::nonexistent:
      return "nonexistent";
  }
  return "unknown";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::none:
      return "none";
    case Outcome::success:
      return "success";
    case Outcome::wrong_declaration:
      return "wrong-declaration";
    case Outcome::timeout:
      return "timeout";
    case Outcome::declared_nonexistent:
      return "declared-nonexistent";
    case Outcome::declared_unreachable:
      return "declared-unreachable";
  }
  return "unknown";
}

void validate(const EnvConfig& c) {
  if (c.height < 3 || c.width < 3) throw ConfigError("grid must be at least 3x3");
  if (!(c.cell_size_m > 0)) throw ConfigError("cell_size_m must be positive");
  if (c.n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (c.n_agents >= c.height * c.width) throw ConfigError("too many agents for the grid");
  if (!(c.strength_min > 0) || c.strength_max < c.strength_min) {
    throw ConfigError("strength range must satisfy 0 < strength_min <= strength_max");
  }
  if (!(c.mu >= 0)) throw ConfigError("mu must be nonnegative");
  double total = 0;
  for (double p : c.scenario_probs) {
    if (!(p >= 0)) throw ConfigError("scenario probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw ConfigError("scenario probabilities must sum to 1");
  if (c.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (!(c.penalty >= 0)) throw ConfigError("penalty must be nonnegative");
  if (c.layout.density_min < 0 || c.layout.density_max > 0.9 ||
      c.layout.density_max < c.layout.density_min) {
    throw ConfigError("layout density range must satisfy 0 <= min <= max <= 0.9");
  }
  if (c.layout.sealed_room_min < 1 || c.layout.sealed_room_max < c.layout.sealed_room_min) {
    throw ConfigError("sealed room size range invalid");
  }
}

ActionMask action_mask(const EnvState& state, int agent, bool allow_declarations) {
  ActionMask mask{};
  const Cell at = state.agents.at(static_cast<std::size_t>(agent));
  for (int d = 1; d <= kDirections; ++d) {
    const Cell off = move_offset(d);
    mask[index(move_action(d))] = state.grid.is_free({at.row + off.row, at.col + off.col});
  }
  mask[index(Action::idle)] = true;
  mask[index(Action::declare_nonexistent)] = allow_declarations;
  mask[index(Action::declare_unreachable)] = allow_declarations;
  return mask;
}

std::int64_t sample_cpm(const EnvState& state, int agent, double mu, double constant, Rng& rng) {
  const double mean = cpm_mean(state.grid, state.target,
                               state.agents.at(static_cast<std::size_t>(agent)), mu, constant);
  return sample_poisson(mean, rng);
}

Game::Game(EnvConfig config) : config_(config), rng_(config.seed) { validate(config_); }

std::vector<std::int64_t> Game::reset() { return reset_to(generate_episode()); }

std::vector<std::int64_t> Game::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  return reset();
}

std::vector<std::int64_t> Game::reset_to(EnvState state) {
  if (static_cast<int>(state.agents.size()) != config_.n_agents) {
    throw ConfigError("state agent count does not match config");
  }
  for (const auto& a : state.agents) {
    if (!state.grid.is_free(a)) throw ConfigError("agent placed outside free space");
  }
  state.distance = state.target.exists
                       ? reward::bfs_distance_field(state.grid, state.target.position)
                       : reward::DistanceField{};
  state.target.reachable =
      state.target.exists && state.distance.min_over(state.agents) != reward::kUnreachable;
  state.min_distance = state.distance.min_over(state.agents);
  state.step = 0;
  state.done = false;
  state.outcome = Outcome::none;
  state_ = std::move(state);
  return sample_all();
}

EnvState Game::generate_episode() {
  const auto& c = config_;
  const double u = uniform01(rng_);
  Scenario scenario = Scenario::nonexistent;
  if (u < c.scenario_probs[0]) {
    scenario = Scenario::reachable;
  } else if (u < c.scenario_probs[0] + c.scenario_probs[1]) {
    scenario = Scenario::unreachable;
  }

  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    EnvState s;
    s.scenario = scenario;
    s.grid = generate_layout(c.height, c.width, c.cell_size_m, c.layout, rng_);
    std::vector<Cell> room_cells;
    if (scenario == Scenario::unreachable) {
      room_cells = add_sealed_room(s.grid, c.layout, rng_).interior();
    }

    int n_components = 0;
    const auto label = label_components(s.grid, &n_components);
    std::vector<int> sizes(static_cast<std::size_t>(n_components), 0);
    for (int l : label) {
      if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    }
    // Agents start in the largest component that is not the sealed room.
    int room_label = room_cells.empty() ? -1 : label[s.grid.index(room_cells.front())];
    int best = -1;
    for (int l = 0; l < n_components; ++l) {
      if (l == room_label) continue;
      if (best < 0 || sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(best)]) {
        best = l;
      }
    }
    if (best < 0) continue;
    std::vector<Cell> pool;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (label[i] == best) pool.push_back(s.grid.cell_at(i));
    }
    const int needed = c.n_agents + (scenario == Scenario::reachable ? 1 : 0);
    if (static_cast<int>(pool.size()) < needed) continue;

    // Partial Fisher-Yates over the pool.
    for (int i = 0; i < needed; ++i) {
      const int j = uniform_int(rng_, i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    int next = 0;
    if (scenario == Scenario::reachable) {
      s.target.exists = true;
      s.target.position = pool[static_cast<std::size_t>(next++)];
    } else if (scenario == Scenario::unreachable) {
      s.target.exists = true;
      s.target.position = room_cells[static_cast<std::size_t>(
          uniform_int(rng_, 0, static_cast<int>(room_cells.size()) - 1))];
    }
    if (s.target.exists) {
      s.target.strength = c.strength_min + (c.strength_max - c.strength_min) * uniform01(rng_);
    }
    for (int a = 0; a < c.n_agents; ++a) s.agents.push_back(pool[static_cast<std::size_t>(next++)]);
    return s;
  }
  throw ConfigError("could not place agents and target after " + std::to_string(kMaxAttempts) +
                    " layout attempts");
}

std::vector<std::int64_t> Game::sample_all() {
  std::vector<std::int64_t> readings(state_.agents.size());
  for (std::size_t a = 0; a < readings.size(); ++a) {
    readings[a] = sample_cpm(state_, static_cast<int>(a), config_.mu, config_.cpm_constant, rng_);
  }
  return readings;
}

ActionMask Game::action_mask(int agent) const {
  return env::action_mask(state_, agent, config_.allow_declarations);
}

GameStep Game::step(std::span<const Action> joint_action) {
  if (state_.done) throw ContractViolation("step called on a finished episode; reset first");
  if (static_cast<int>(joint_action.size()) != config_.n_agents) {
    throw ContractViolation("joint action needs one action per agent");
  }
  for (int a = 0; a < config_.n_agents; ++a) {
    const auto act = joint_action[static_cast<std::size_t>(a)];
    if (index(act) < 0 || index(act) >= kNumActions || !action_mask(a)[index(act)]) {
      throw ContractViolation("agent " + std::to_string(a) + " submitted masked action " +
                              to_string(act));
    }
  }

  GameStep out;
  auto& info = out.info;
  info.scenario = state_.scenario;

  int declare_nonexistent = 0, declare_unreachable = 0;
  for (int a = 0; a < config_.n_agents; ++a) {
    const auto act = joint_action[static_cast<std::size_t>(a)];
    auto& pos = state_.agents[static_cast<std::size_t>(a)];
    if (is_move(act)) {
      const Cell off = move_offset(direction_of(act));
      pos = {pos.row + off.row, pos.col + off.col};
      ++info.moved;
    } else if (act == Action::declare_nonexistent) {
      ++declare_nonexistent;
    } else if (act == Action::declare_unreachable) {
      ++declare_unreachable;
    }
  }
  ++state_.step;

  // Strict majority makes a declaration binding.
  const auto majority = [this](int votes) { return 2 * votes > config_.n_agents; };
  Outcome outcome = Outcome::none;
  if (majority(declare_nonexistent)) {
    const bool right = state_.scenario == Scenario::nonexistent;
    info.flags = right ? reward::FlagOutcome::correct : reward::FlagOutcome::incorrect;
    outcome = right ? Outcome::declared_nonexistent : Outcome::wrong_declaration;
  } else if (majority(declare_unreachable)) {
    const bool right = state_.scenario == Scenario::unreachable;
    info.flags = right ? reward::FlagOutcome::correct : reward::FlagOutcome::incorrect;
    outcome = right ? Outcome::declared_unreachable : Outcome::wrong_declaration;
  } else if (state_.scenario == Scenario::reachable &&
             std::find(state_.agents.begin(), state_.agents.end(), state_.target.position) !=
                 state_.agents.end()) {
    outcome = Outcome::success;
  } else if (state_.step >= config_.max_steps) {
    outcome = Outcome::timeout;
  }

  const int prev_min = state_.min_distance;
  state_.min_distance = state_.distance.min_over(state_.agents);
  info.min_distance = state_.min_distance;
  out.reward =
      reward::team_reward(info.flags, info.moved, state_.min_distance, prev_min, config_.penalty);

  state_.outcome = outcome;
  state_.done = outcome != Outcome::none;
  info.outcome = outcome;
  out.done = state_.done;
  info.readings = sample_all();
  return out;
}

}  // namespace radloc::env
