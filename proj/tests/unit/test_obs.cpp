#include <doctest.h>

#include <cmath>

#include "radloc/common/error.hpp"
#include "radloc/obs/observations.hpp"

using namespace radloc;
using namespace radloc::obs;
using env::Cell;

namespace {

Map2D counting_map(int h, int w) {
  Map2D m(h, w);
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = static_cast<float>(i + 1);
  return m;
}

}  // namespace

TEST_CASE("default assignment is five local maps and four global maps") {
  const auto a = default_assignment();
  REQUIRE(a.size() == 9);
  int local = 0;
  for (const auto& v : a) local += v.scope == Scope::local;
  CHECK(local == 5);
  for (const auto& v : a) {
    if (v.scope == Scope::global) CHECK(v.channel != Channel::layout);
  }
}

TEST_CASE("local windows pad outside the grid") {
  const auto m = counting_map(3, 3);
  const auto w = local_window(m, {0, 0}, 3, -1.0f);
  CHECK(w.at(0, 0) == -1.0f);
  CHECK(w.at(0, 2) == -1.0f);
  CHECK(w.at(2, 0) == -1.0f);
  CHECK(w.at(1, 1) == 1.0f);
  CHECK(w.at(2, 2) == 5.0f);
  const auto centered = local_window(m, {1, 1}, 3);
  CHECK(centered.values == m.values);
  CHECK_THROWS_AS(local_window(m, {0, 0}, 4), ConfigError);
  CHECK_THROWS_AS(local_window(m, {0, 0}, 1), ConfigError);
}

TEST_CASE("bilinear downsampling") {
  Map2D m(2, 2);
  m.values = {0, 1, 1, 0};
  CHECK(global_downsample(m, 1).at(0, 0) == doctest::Approx(0.5));
  // Same size is the identity.
  const auto c = counting_map(5, 5);
  CHECK(global_downsample(c, 5).values == c.values);
  // Corner samples land on corners; a linear ramp stays linear.
  Map2D tall(9, 9);
  for (int r = 0; r < 9; ++r) {
    for (int col = 0; col < 9; ++col) tall.at(r, col) = static_cast<float>(col);
  }
  const auto d = global_downsample(tall, 3);
  CHECK(d.at(0, 0) == doctest::Approx(0));
  CHECK(d.at(1, 1) == doctest::Approx(4));
  CHECK(d.at(2, 2) == doctest::Approx(8));
  // Upsampling a constant stays constant.
  Map2D k(3, 3, 0.25f);
  for (float v : global_downsample(k, 7).values) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("map updates and per-agent views") {
  env::Grid g(4, 4);
  g.set_obstacle({3, 3});
  auto maps = make_maps(g);
  CHECK(maps.layout[g.index({3, 3})] == 1.0f);
  std::vector<Cell> pos = {{0, 0}, {0, 0}, {2, 1}};
  std::vector<std::int64_t> readings = {4, 4, 9};
  update_maps(maps, pos, readings);
  CHECK(maps.visits[g.index({0, 0})] == 2.0f);
  CHECK(maps.visits[g.index({2, 1})] == 1.0f);
  CHECK(maps.readings[g.index({2, 1})] == 9.0f);
  CHECK(maps.readings_max == 9.0);
  readings = {1, 1, 9};
  update_maps(maps, pos, readings);
  // Latest reading overwrites, max is kept.
  CHECK(maps.readings[g.index({0, 0})] == 1.0f);
  CHECK(maps.readings_max == 9.0);

  const auto loc = location_map(maps, 2);
  CHECK(loc.at(2, 1) == 1.0f);
  CHECK(loc.at(0, 0) == 0.0f);
  const auto team = team_map(maps, 2);
  CHECK(team.at(0, 0) == 1.0f);
  CHECK(team.at(2, 1) == 0.0f);
  const auto team0 = team_map(maps, 0);
  CHECK(team0.at(2, 1) == 1.0f);

  const auto n = normalize(maps, 0);
  CHECK(maps.visits[g.index({0, 0})] == 4.0f);
  CHECK(n.visits.at(0, 0) == doctest::Approx(1.0));
  CHECK(n.visits.at(2, 1) == doctest::Approx(0.5));
  CHECK(n.readings.at(2, 1) == doctest::Approx(1.0));
  CHECK(n.readings.at(0, 0) == doctest::Approx(std::log(2.0) / std::log(10.0)));
  for (const auto* m : {&n.location, &n.team, &n.visits, &n.readings, &n.layout}) {
    for (float v : m->values) CHECK((v >= 0.0f && v <= 1.0f));
  }
}

TEST_CASE("fresh maps normalize to zeros") {
  env::Grid g(3, 3);
  auto maps = make_maps(g);
  std::vector<Cell> pos = {{1, 1}};
  std::vector<std::int64_t> zero = {0};
  update_maps(maps, pos, zero);
  const auto n = normalize(maps, 0);
  for (float v : n.readings.values) CHECK(v == 0.0f);
}

TEST_CASE("range scaling spans the readings seen this episode") {
  env::Grid g(3, 3);
  auto maps = make_maps(g);
  std::vector<Cell> pos = {{0, 0}, {1, 1}};
  std::vector<std::int64_t> r = {3, 3};
  update_maps(maps, pos, r);
  // Equal readings: every visited cell is at the top of the range.
  auto n = normalize(maps, 0, ReadingsScale::episode_range);
  CHECK(n.readings.at(0, 0) == 1.0f);
  CHECK(n.readings.at(1, 1) == 1.0f);
  CHECK(n.readings.at(2, 2) == 0.0f);

  pos = {{0, 1}, {2, 2}};
  r = {15, 63};
  update_maps(maps, pos, r);
  CHECK(maps.readings_min == 3.0);
  n = normalize(maps, 0, ReadingsScale::episode_range);
  CHECK(n.readings.at(0, 0) == 0.0f);
  CHECK(n.readings.at(2, 2) == 1.0f);
  CHECK(n.readings.at(0, 1) == doctest::Approx(std::log(4.0) / std::log(16.0)));
  CHECK(n.readings.at(1, 0) == 0.0f);
  // The default scale is unchanged by tracking the minimum.
  CHECK(normalize(maps, 0).readings.at(0, 1) == doctest::Approx(std::log(16.0) / std::log(64.0)));

  CHECK(readings_scale_from_string(to_string(ReadingsScale::episode_range)) ==
        ReadingsScale::episode_range);
  CHECK_THROWS_AS(readings_scale_from_string("linear"), ConfigError);
}

TEST_CASE("reduced observations have the documented shape") {
  env::Grid g(10, 10);
  auto maps = make_maps(g);
  std::vector<Cell> pos = {{0, 0}, {5, 5}};
  std::vector<std::int64_t> r = {3, 7};
  update_maps(maps, pos, r);
  ObservationConfig cfg;
  cfg.window = 5;
  cfg.embedding_size = 4;
  std::vector<float> emb = {0.1f, 0.2f, 0.3f, 0.4f};
  const auto o = assemble_reduced(maps, 0, emb, cfg);
  REQUIRE(o.maps.shape() == nn::Shape{9, 5, 5});
  CHECK(o.flatten().size() == 9 * 25 + 4);
  CHECK(o.embedding == emb);
  // The layout window pads with obstacles at the grid edge.
  std::size_t layout_k = 0;
  const auto a = default_assignment();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == MapView{Channel::layout, Scope::local}) layout_k = k;
  }
  CHECK(o.maps[layout_k * 25 + 0] == 1.0f);
  CHECK(o.maps[layout_k * 25 + 24] == 0.0f);
  CHECK_THROWS_AS(assemble_reduced(maps, 0, emb, ObservationConfig{4, 4}), ConfigError);
  CHECK_THROWS_AS(assemble_reduced(maps, 0, static_cast<const cae::Encoder*>(nullptr), cfg),
                  ConfigError);
}

TEST_CASE("observation config validation") {
  ObservationConfig cfg;
  CHECK_NOTHROW(validate(cfg, 20, 20));
  cfg.window = 8;
  CHECK_THROWS_AS(validate(cfg, 20, 20), ConfigError);
  cfg.window = 7;
  cfg.embedding_size = 0;
  CHECK_THROWS_AS(validate(cfg, 20, 20), ConfigError);
}
