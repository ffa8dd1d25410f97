#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radloc/env/grid.hpp"
#include "radloc/nn/tensor.hpp"

namespace radloc::cae {
class Encoder;
}

namespace radloc::obs {

// Row-major h x w float map.
struct Map2D {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Map2D() = default;
  Map2D(int h, int w, float fill = 0.0f)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}
  float at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  float& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
};

enum class Channel : int { location = 0, team, visits, readings, layout };
enum class Scope : int { local = 0, global };

struct MapView {
  Channel channel;
  Scope scope;
  friend bool operator==(const MapView&, const MapView&) = default;
};

std::string to_string(MapView view);

// Reduced-map assignment: local windows of all five maps followed by global
// downsamples of location, team, visits and readings. The layout's global
// view is carried by the autoencoder embedding instead.
std::vector<MapView> default_assignment();

// How log readings are scaled into [0, 1]:
//   episode_max    log(1 + r) / log(1 + r_max)
//   episode_range  (log(1 + r) - log(1 + r_min)) / (log(1 + r_max) - log(1 + r_min)),
//                  1 at every visited cell while all readings are equal
// r_min and r_max are the extremes seen so far in the episode.
enum class ReadingsScale : int { episode_max = 0, episode_range };

std::string to_string(ReadingsScale scale);
ReadingsScale readings_scale_from_string(const std::string& name);

struct ObservationConfig {
  int window = 7;
  int embedding_size = 128;
  std::vector<MapView> assignment = default_assignment();
  ReadingsScale readings_scale = ReadingsScale::episode_max;
};

void validate(const ObservationConfig& config, int grid_height, int grid_width);

// Shared team maps for one episode; per-agent location and team maps are
// derived from `positions`.
struct ObservationMaps {
  int height = 0;
  int width = 0;
  std::vector<env::Cell> positions;
  std::vector<float> visits;
  // Latest reading per visited cell.
  std::vector<float> readings;
  // Largest reading seen this episode.
  double readings_max = 0.0;
  // Smallest reading seen this episode (infinity before the first).
  double readings_min = std::numeric_limits<double>::infinity();
  // 1 = obstacle.
  std::vector<float> layout;
};

ObservationMaps make_maps(const env::Grid& grid);

// Per-step accumulation after movement: positions replaced, visit counts
// incremented once per agent on each cell, readings overwritten with the
// latest count at each agent's cell.
void update_maps(ObservationMaps& maps, std::span<const env::Cell> positions,
                 std::span<const std::int64_t> readings);

Map2D location_map(const ObservationMaps& maps, int agent);
// Current teammate positions (self excluded).
Map2D team_map(const ObservationMaps& maps, int agent);

// n x n window centered on `center`; out-of-grid cells take `pad`.
// Throws ConfigError for even or n <= 1.
Map2D local_window(const Map2D& map, env::Cell center, int n, float pad = 0.0f);

// Bilinear resampling onto an n x n corner-aligned grid (a single output
// sample sits at the map center).
Map2D global_downsample(const Map2D& map, int n);

// Normalized full-resolution maps for one agent, all values in [0, 1].
struct NormalizedMaps {
  Map2D location, team, visits, readings, layout;
  const Map2D& get(Channel c) const;
};

// Visits divided by their max (all-zero stays zero); readings scaled per
// `scale`, unvisited cells 0; binary maps unchanged.
NormalizedMaps normalize(const ObservationMaps& maps, int agent,
                         ReadingsScale scale = ReadingsScale::episode_max);

// Policy input for one agent: `maps` is [assignment.size(), n, n].
struct ReducedObservation {
  nn::Tensor maps;
  std::vector<float> embedding;

  // Maps followed by the embedding: 9 n^2 + 128 floats by default.
  std::vector<float> flatten() const;
};

ReducedObservation assemble_reduced(const ObservationMaps& maps, int agent,
                                    std::span<const float> embedding,
                                    const ObservationConfig& config);

// Encodes the layout map first; throws ConfigError when encoder is null.
ReducedObservation assemble_reduced(const ObservationMaps& maps, int agent,
                                    const cae::Encoder* encoder, const ObservationConfig& config);

}  // namespace radloc::obs
