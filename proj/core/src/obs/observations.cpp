#include "radloc/obs/observations.hpp"

#include <algorithm>
#include <cmath>

#include "radloc/cae/cae.hpp"
#include "radloc/common/error.hpp"

namespace radloc::obs {

std::string to_string(ReadingsScale scale) {
  return scale == ReadingsScale::episode_range ? "episode_range" : "episode_max";
}

ReadingsScale readings_scale_from_string(const std::string& name) {
  if (name == "episode_max") return ReadingsScale::episode_max;
  if (name == "episode_range") return ReadingsScale::episode_range;
  throw ConfigError("unknown readings scale '" + name + "'");
}

std::string to_string(MapView view) {
  static const char* names[] = {"location", "team", "visits", "readings", "layout"};
  return std::string(view.scope == Scope::local ? "local_" : "global_") +
         names[static_cast<int>(view.channel)];
}

std::vector<MapView> default_assignment() {
  return {
      {Channel::location, Scope::local},  {Channel::team, Scope::local},
      {Channel::visits, Scope::local},    {Channel::readings, Scope::local},
      {Channel::layout, Scope::local},    {Channel::location, Scope::global},
      {Channel::team, Scope::global},     {Channel::visits, Scope::global},
      {Channel::readings, Scope::global},
  };
}

void validate(const ObservationConfig& config, int grid_height, int grid_width) {
  if (config.window <= 1 || config.window % 2 == 0) {
    throw ConfigError("observation window must be odd and > 1");
  }
  if (config.window >= std::min(grid_height, grid_width)) {
    throw ConfigError("observation window must be smaller than the grid");
  }
  if (config.assignment.empty()) throw ConfigError("observation assignment is empty");
  if (config.embedding_size < 1) throw ConfigError("embedding size must be positive");
}

ObservationMaps make_maps(const env::Grid& grid) {
  ObservationMaps m;
  m.height = grid.height();
  m.width = grid.width();
  m.visits.assign(grid.cell_count(), 0.0f);
  m.readings.assign(grid.cell_count(), 0.0f);
  m.layout.resize(grid.cell_count());
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    m.layout[i] = grid.obstacle_mask()[i] ? 1.0f : 0.0f;
  }
  return m;
}

void update_maps(ObservationMaps& maps, std::span<const env::Cell> positions,
                 std::span<const std::int64_t> readings) {
  if (positions.size() != readings.size()) {
    throw ConfigError("update_maps: one reading per agent required");
  }
  maps.positions.assign(positions.begin(), positions.end());
  for (std::size_t a = 0; a < positions.size(); ++a) {
    const auto idx = static_cast<std::size_t>(positions[a].row) * maps.width + positions[a].col;
    maps.visits[idx] += 1.0f;
    const auto r = static_cast<double>(readings[a]);
    maps.readings[idx] = static_cast<float>(r);
    maps.readings_max = std::max(maps.readings_max, r);
    maps.readings_min = std::min(maps.readings_min, r);
  }
}

Map2D location_map(const ObservationMaps& maps, int agent) {
  Map2D m(maps.height, maps.width);
  const auto& p = maps.positions.at(static_cast<std::size_t>(agent));
  m.at(p.row, p.col) = 1.0f;
  return m;
}

Map2D team_map(const ObservationMaps& maps, int agent) {
  Map2D m(maps.height, maps.width);
  for (std::size_t a = 0; a < maps.positions.size(); ++a) {
    if (static_cast<int>(a) == agent) continue;
    m.at(maps.positions[a].row, maps.positions[a].col) = 1.0f;
  }
  return m;
}

Map2D local_window(const Map2D& map, env::Cell center, int n, float pad) {
  if (n <= 1 || n % 2 == 0) throw ConfigError("local window size must be odd and > 1");
  Map2D out(n, n, pad);
  const int half = n / 2;
  for (int r = 0; r < n; ++r) {
    const int sr = center.row - half + r;
    if (sr < 0 || sr >= map.height) continue;
    for (int c = 0; c < n; ++c) {
      const int sc = center.col - half + c;
      if (sc < 0 || sc >= map.width) continue;
      out.at(r, c) = map.at(sr, sc);
    }
  }
  return out;
}

namespace {

struct Tap {
  int lo, hi;
  float frac;
};

std::vector<Tap> taps(int src, int n) {
  std::vector<Tap> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pos = n == 1 ? (src - 1) / 2.0 : static_cast<double>(i) * (src - 1) / (n - 1);
    const int lo = std::min(static_cast<int>(std::floor(pos)), src - 1);
    const int hi = std::min(lo + 1, src - 1);
    t[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(pos - lo)};
  }
  return t;
}

}  // namespace

Map2D global_downsample(const Map2D& map, int n) {
  if (n < 1) throw ConfigError("downsample size must be positive");
  const auto ty = taps(map.height, n);
  const auto tx = taps(map.width, n);
  Map2D out(n, n);
  for (int r = 0; r < n; ++r) {
    const auto& y = ty[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      const auto& x = tx[static_cast<std::size_t>(c)];
      const float top = map.at(y.lo, x.lo) * (1 - x.frac) + map.at(y.lo, x.hi) * x.frac;
      const float bottom = map.at(y.hi, x.lo) * (1 - x.frac) + map.at(y.hi, x.hi) * x.frac;
      out.at(r, c) = top * (1 - y.frac) + bottom * y.frac;
    }
  }
  return out;
}

const Map2D& NormalizedMaps::get(Channel c) const {
  switch (c) {
    case Channel::location:
      return location;
    case Channel::team:
      return team;
    case Channel::visits:
      return visits;
    case Channel::readings:
      return readings;
    case Channel::layout:
      return layout;
  }
  throw InternalError("unknown channel");
}

NormalizedMaps normalize(const ObservationMaps& maps, int agent, ReadingsScale scale) {
  NormalizedMaps out;
  out.location = location_map(maps, agent);
  out.team = team_map(maps, agent);

  out.visits = Map2D(maps.height, maps.width);
  const float vmax =
      maps.visits.empty() ? 0.0f : *std::max_element(maps.visits.begin(), maps.visits.end());
  if (vmax > 0) {
    for (std::size_t i = 0; i < maps.visits.size(); ++i)
      out.visits.values[i] = maps.visits[i] / vmax;
  }

  out.readings = Map2D(maps.height, maps.width);
  if (maps.readings_max > 0) {
    const double hi = std::log1p(maps.readings_max);
    const double lo = scale == ReadingsScale::episode_range ? std::log1p(maps.readings_min) : 0.0;
    for (std::size_t i = 0; i < maps.readings.size(); ++i) {
      if (maps.visits[i] == 0) continue;
      const double v =
          hi > lo ? (std::log1p(static_cast<double>(maps.readings[i])) - lo) / (hi - lo) : 1.0;
      out.readings.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }

  out.layout = Map2D(maps.height, maps.width);
  out.layout.values = maps.layout;
  return out;
}

std::vector<float> ReducedObservation::flatten() const {
  std::vector<float> out(maps.values().begin(), maps.values().end());
  out.insert(out.end(), embedding.begin(), embedding.end());
  return out;
}

ReducedObservation assemble_reduced(const ObservationMaps& maps, int agent,
                                    std::span<const float> embedding,
                                    const ObservationConfig& config) {
  validate(config, maps.height, maps.width);
  if (static_cast<int>(embedding.size()) != config.embedding_size) {
    throw ConfigError("layout embedding has " + std::to_string(embedding.size()) +
                      " floats, expected " + std::to_string(config.embedding_size));
  }
  const int n = config.window;
  const auto norm = normalize(maps, agent, config.readings_scale);
  const auto center = maps.positions.at(static_cast<std::size_t>(agent));

  ReducedObservation obs;
  obs.maps = nn::Tensor(
      {config.assignment.size(), static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  for (std::size_t k = 0; k < config.assignment.size(); ++k) {
    const auto view = config.assignment[k];
    const Map2D& src = norm.get(view.channel);
    const float pad = view.channel == Channel::layout ? 1.0f : 0.0f;
    const Map2D reduced =
        view.scope == Scope::local ? local_window(src, center, n, pad) : global_downsample(src, n);
    std::copy(reduced.values.begin(), reduced.values.end(), obs.maps.data() + k * plane);
  }
  obs.embedding.assign(embedding.begin(), embedding.end());
  return obs;
}

ReducedObservation assemble_reduced(const ObservationMaps& maps, int agent,
                                    const cae::Encoder* encoder, const ObservationConfig& config) {
  if (encoder == nullptr) throw ConfigError("assemble_reduced: no layout encoder available");
  Map2D layout(maps.height, maps.width);
  layout.values = maps.layout;
  const auto embedding = encoder->encode(layout);
  return assemble_reduced(maps, agent, embedding, config);
}

}  // namespace radloc::obs
