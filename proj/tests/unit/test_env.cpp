#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "radloc/common/error.hpp"
#include "radloc/env/game.hpp"
#include "radloc/env/layout.hpp"
#include "radloc/env/physics.hpp"

using namespace radloc;
using namespace radloc::env;

namespace {

EnvConfig small_config(int n_agents = 2) {
  EnvConfig c;
  c.height = 10;
  c.width = 10;
  c.n_agents = n_agents;
  c.seed = 5;
  return c;
}

EnvState open_state(int h, int w, Scenario scenario, Cell target, std::vector<Cell> agents) {
  EnvState s;
  s.grid = Grid(h, w);
  s.scenario = scenario;
  s.target.exists = scenario != Scenario::nonexistent;
  s.target.position = target;
  s.target.strength = 1e9;
  s.agents = std::move(agents);
  return s;
}

std::vector<Action> repeat(Action a, int n) {
  return std::vector<Action>(static_cast<std::size_t>(n), a);
}

}  // namespace

TEST_CASE("move offsets follow the compass convention") {
  CHECK(move_offset(8) == Cell{0, 1});
  CHECK(move_offset(1) == Cell{-1, 1});
  CHECK(move_offset(2) == Cell{-1, 0});
  CHECK(move_offset(4) == Cell{0, -1});
  CHECK(move_offset(6) == Cell{1, 0});
  CHECK(move_offset(7) == Cell{1, 1});
  std::set<Cell> all;
  for (int d = 1; d <= kDirections; ++d) all.insert(move_offset(d));
  CHECK(all.size() == 8);
  CHECK_FALSE(all.contains(Cell{0, 0}));
}

TEST_CASE("line obstacle count on a 5x5 fixture") {
  Grid g(5, 5);
  for (int i = 1; i < 4; ++i) g.set_obstacle({i, i});
  CHECK(line_obstacle_count(g, {0, 0}, {4, 4}) == 3);
  CHECK(line_obstacle_count(g, {0, 4}, {4, 0}) == 1);
  CHECK(line_obstacle_count(g, {0, 0}, {0, 4}) == 0);
  // Endpoints never count.
  CHECK(line_obstacle_count(g, {1, 1}, {3, 3}) == 1);
  const auto line = bresenham_line({0, 0}, {2, 4});
  CHECK(line.front() == Cell{0, 0});
  CHECK(line.back() == Cell{2, 4});
  CHECK(line.size() == 5);
  CHECK(bresenham_line({3, 1}, {3, 1}).size() == 1);
}

TEST_CASE("component labels split an 8-connected grid at a solid wall") {
  Grid g(4, 5);
  for (int r = 0; r < 4; ++r) g.set_obstacle({r, 2});
  int count = 0;
  const auto labels = label_components(g, &count);
  CHECK(count == 2);
  CHECK(labels[g.index({0, 2})] == -1);
  CHECK(labels[g.index({0, 0})] != labels[g.index({0, 4})]);
  // A diagonal gap is passable.
  g.set_obstacle({1, 2}, false);
  label_components(g, &count);
  CHECK(count == 1);
}

TEST_CASE("cpm mean follows the inverse-square law with attenuation") {
  Grid g(1, 8, 10.0);
  g.set_obstacle({0, 2});
  g.set_obstacle({0, 3});
  TargetSpec t{true, {0, 5}, 2e6, true};
  CHECK(cpm_mean(g, t, {0, 0}, 0.1) == doctest::Approx(2e6 / 2500.0 * std::exp(-0.2)));
  CHECK(cpm_mean(g, t, {0, 4}, 0.1) == doctest::Approx(2e6 / 100.0));
  // Standing on the source uses one cell size as the distance floor.
  CHECK(cpm_mean(g, t, {0, 5}, 0.1, 3.0) == doctest::Approx(3.0 * 2e6 / 100.0));
  t.exists = false;
  CHECK(cpm_mean(g, t, {0, 0}, 0.1) == 0.0);
  Rng rng(1);
  CHECK(sample_poisson(0.0, rng) == 0);
}

TEST_CASE("episode generation respects the scenario contract") {
  auto c = small_config(3);
  Game game(c);
  std::array<int, kNumScenarios> counts{};
  const int n = 3000;
  for (int i = 0; i < n; ++i) {
    game.reset();
    const auto& s = game.state();
    ++counts[static_cast<std::size_t>(s.scenario)];
    std::set<Cell> distinct(s.agents.begin(), s.agents.end());
    REQUIRE(distinct.size() == s.agents.size());
    for (auto a : s.agents) REQUIRE(s.grid.is_free(a));
    switch (s.scenario) {
      case Scenario::reachable:
        REQUIRE(s.target.exists);
        REQUIRE(s.target.reachable);
        REQUIRE(s.grid.is_free(s.target.position));
        REQUIRE_FALSE(distinct.contains(s.target.position));
        REQUIRE(s.min_distance < reward::kUnreachable);
        break;
      case Scenario::unreachable:
        REQUIRE(s.target.exists);
        REQUIRE_FALSE(s.target.reachable);
        REQUIRE(s.min_distance == reward::kUnreachable);
        break;
      case Scenario::nonexistent:
        REQUIRE_FALSE(s.target.exists);
        break;
    }
  }
  const double p = 1.0 / 3, sd = std::sqrt(n * p * (1 - p));
  for (int k : counts) CHECK(std::abs(k - n * p) < 3 * sd);
}

TEST_CASE("scenario probabilities are honored when skewed") {
  auto c = small_config();
  c.scenario_probs = {0.5, 0.0, 0.5};
  Game game(c);
  for (int i = 0; i < 200; ++i) {
    game.reset();
    CHECK(game.state().scenario != Scenario::unreachable);
  }
}

TEST_CASE("reset with the same seed reproduces the episode") {
  Game a(small_config()), b(small_config());
  for (std::uint64_t s : {1ull, 99ull, 12345ull}) {
    const auto ra = a.reset(s);
    const auto rb = b.reset(s);
    CHECK(ra == rb);
    CHECK(a.state().grid == b.state().grid);
    CHECK(a.state().agents == b.state().agents);
    CHECK(a.state().target.position == b.state().target.position);
    CHECK(a.state().scenario == b.state().scenario);
  }
}

TEST_CASE("action masks block walls and grid edges") {
  auto s = open_state(5, 5, Scenario::reachable, {4, 4}, {{0, 0}});
  s.grid.set_obstacle({1, 1});
  const auto m = action_mask(s, 0);
  // Only south and east are open from the corner; the diagonal is a wall.
  for (int d = 1; d <= kDirections; ++d) {
    const Cell off = move_offset(d);
    const bool open = off == Cell{1, 0} || off == Cell{0, 1};
    CHECK(m[index(move_action(d))] == open);
  }
  CHECK(m[index(Action::idle)]);
  CHECK(m[index(Action::declare_nonexistent)]);
  CHECK(m[index(Action::declare_unreachable)]);
  const auto no_decl = action_mask(s, 0, false);
  CHECK_FALSE(no_decl[index(Action::declare_nonexistent)]);
  CHECK_FALSE(no_decl[index(Action::declare_unreachable)]);
  CHECK(no_decl[index(Action::idle)]);
}

TEST_CASE("step rejects masked actions, wrong arity and finished episodes") {
  auto c = small_config(1);
  c.max_steps = 1;
  Game g(c);
  g.reset_to(open_state(10, 10, Scenario::reachable, {5, 5}, {{0, 0}}));
  CHECK_THROWS_AS(g.step(std::vector<Action>{move_action(2)}), ContractViolation);
  CHECK_THROWS_AS(g.step(std::vector<Action>{Action::idle, Action::idle}), ContractViolation);
  g.step(std::vector<Action>{Action::idle});
  CHECK(g.state().done);
  CHECK_THROWS_AS(g.step(std::vector<Action>{Action::idle}), ContractViolation);
  CHECK_THROWS_AS(g.reset_to(open_state(10, 10, Scenario::reachable, {5, 5}, {{0, 0}, {1, 1}})),
                  ConfigError);
}

TEST_CASE("declarations bind only on a strict majority") {
  auto c = small_config(4);
  Game g(c);
  auto state = open_state(10, 10, Scenario::nonexistent, {0, 0}, {{0, 0}, {0, 2}, {2, 0}, {2, 2}});
  g.reset_to(state);
  std::vector<Action> two = {Action::declare_nonexistent, Action::declare_nonexistent, Action::idle,
                             Action::idle};
  auto r = g.step(two);
  CHECK_FALSE(r.done);
  CHECK(r.info.flags == reward::FlagOutcome::none);
  std::vector<Action> three = {Action::declare_nonexistent, Action::declare_nonexistent,
                               Action::declare_nonexistent, Action::idle};
  r = g.step(three);
  CHECK(r.done);
  CHECK(r.info.outcome == Outcome::declared_nonexistent);
  CHECK(r.info.flags == reward::FlagOutcome::correct);
  CHECK(r.reward == -1.0);

  g.reset_to(state);
  r = g.step(std::vector<Action>{Action::declare_unreachable, Action::declare_unreachable,
                                 Action::declare_unreachable, Action::idle});
  CHECK(r.info.outcome == Outcome::wrong_declaration);
  CHECK(r.reward == -500.0);
}

TEST_CASE("rewards track movement and the minimum distance") {
  auto c = small_config(2);
  Game g(c);
  g.reset_to(open_state(10, 10, Scenario::reachable, {0, 9}, {{0, 0}, {9, 0}}));
  CHECK(g.state().min_distance == 9);
  // Agent 0 moves east (closer), agent 1 idles.
  auto r = g.step(std::vector<Action>{move_action(8), Action::idle});
  CHECK(r.reward == 0.0);
  CHECK(r.info.moved == 1);
  CHECK(r.info.min_distance == 8);
  // Both move away.
  r = g.step(std::vector<Action>{move_action(4), move_action(2)});
  CHECK(r.reward == -3.0);
  // Both idle: no progress.
  r = g.step(repeat(Action::idle, 2));
  CHECK(r.reward == -1.0);
}

TEST_CASE("reaching the target ends a reachable episode with success") {
  auto c = small_config(1);
  Game g(c);
  g.reset_to(open_state(10, 10, Scenario::reachable, {0, 1}, {{0, 0}}));
  const auto r = g.step(std::vector<Action>{move_action(8)});
  CHECK(r.done);
  CHECK(r.info.outcome == Outcome::success);
  CHECK(r.reward == 0.0);
}

TEST_CASE("episodes time out at max_steps") {
  auto c = small_config(2);
  c.max_steps = 3;
  Game g(c);
  g.reset_to(open_state(10, 10, Scenario::unreachable, {9, 9}, {{0, 0}, {0, 1}}));
  for (int t = 1; t <= 3; ++t) {
    const auto r = g.step(repeat(Action::idle, 2));
    CHECK(r.done == (t == 3));
    if (t == 3) CHECK(r.info.outcome == Outcome::timeout);
  }
}

TEST_CASE("nonexistent targets read zero everywhere") {
  auto c = small_config(3);
  c.scenario_probs = {0, 0, 1};
  Game g(c);
  for (int e = 0; e < 20; ++e) {
    auto readings = g.reset();
    for (auto v : readings) CHECK(v == 0);
    Rng rng(e);
    while (!g.state().done) {
      std::vector<Action> joint;
      for (int a = 0; a < 3; ++a) {
        const auto m = g.action_mask(a);
        int k;
        do k = uniform_int(rng, 0, kNumActions - 3);
        while (!m[static_cast<std::size_t>(k)]);
        joint.push_back(action_from_index(k));
      }
      const auto r = g.step(joint);
      for (auto v : r.info.readings) REQUIRE(v == 0);
    }
  }
}

TEST_CASE("sealed rooms are closed rings") {
  Rng rng(3);
  LayoutConfig lc;
  for (int i = 0; i < 50; ++i) {
    Grid g(12, 12);
    const auto room = add_sealed_room(g, lc, rng);
    const auto inside = room.interior();
    REQUIRE_FALSE(inside.empty());
    const auto field = reward::bfs_distance_field(g, inside.front());
    for (std::size_t k = 0; k < g.cell_count(); ++k) {
      const Cell c = g.cell_at(k);
      const bool in_room = std::find(inside.begin(), inside.end(), c) != inside.end();
      if (!g.is_obstacle(c)) REQUIRE((field.at(c) != reward::kUnreachable) == in_room);
    }
  }
  Grid tiny(2, 2);
  CHECK_THROWS_AS(add_sealed_room(tiny, lc, rng), ConfigError);
}

TEST_CASE("generated layouts stay near the requested density") {
  Rng rng(8);
  LayoutConfig lc;
  lc.density_min = lc.density_max = 0.15;
  double total = 0;
  for (int i = 0; i < 50; ++i) {
    const auto g = generate_layout(20, 20, 10.0, lc, rng);
    total += static_cast<double>(g.obstacle_count()) / g.cell_count();
  }
  CHECK(total / 50 == doctest::Approx(0.15).epsilon(0.2));
  lc.density_min = lc.density_max = 0.0;
  CHECK(generate_layout(20, 20, 10.0, lc, rng).obstacle_count() == 0);
}

TEST_CASE("config validation rejects bad values") {
  auto c = small_config();
  c.n_agents = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.scenario_probs = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.max_steps = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.strength_min = 2e9;
  CHECK_THROWS_AS(validate(c), ConfigError);
}
