#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "radloc/env/grid.hpp"

namespace radloc::reward {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// BFS hop distance from a target cell to every cell (8-connected, unit
// cost); obstacles and disconnected cells hold kUnreachable.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int height, int width, std::vector<int> distances);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return distances_.empty(); }
  int at(env::Cell c) const { return distances_[static_cast<std::size_t>(c.row) * width_ + c.col]; }
  const std::vector<int>& values() const { return distances_; }

  // Minimum over the given cells; kUnreachable when the field is empty (no
  // target) or every cell is disconnected.
  int min_over(const std::vector<env::Cell>& cells) const;

  friend bool operator==(const DistanceField&, const DistanceField&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> distances_;
};

// Throws ConfigError when the target is outside the grid or on an obstacle.
DistanceField bfs_distance_field(const env::Grid& grid, env::Cell target);

}  // namespace radloc::reward
