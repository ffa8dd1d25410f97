#include "radloc/reward/distance_field.hpp"

#include <algorithm>

#include "radloc/common/error.hpp"

namespace radloc::reward {

DistanceField::DistanceField(int height, int width, std::vector<int> distances)
    : height_(height), width_(width), distances_(std::move(distances)) {
  if (distances_.size() != static_cast<std::size_t>(height) * width) {
    throw ConfigError("distance field size does not match grid");
  }
}

int DistanceField::min_over(const std::vector<env::Cell>& cells) const {
  if (empty()) return kUnreachable;
  int best = kUnreachable;
  for (const auto& c : cells) best = std::min(best, at(c));
  return best;
}

DistanceField bfs_distance_field(const env::Grid& grid, env::Cell target) {
  if (!grid.in_bounds(target)) throw ConfigError("BFS target outside the grid");
  if (grid.is_obstacle(target)) throw ConfigError("BFS target lies on an obstacle");
  std::vector<int> dist(grid.cell_count(), kUnreachable);
  std::vector<env::Cell> frontier{target}, next;
  dist[grid.index(target)] = 0;
  int depth = 0;
  while (!frontier.empty()) {
    ++depth;
    for (const auto& c : frontier) {
      for (const auto& d : env::kNeighborOffsets) {
        const env::Cell n{c.row + d.row, c.col + d.col};
        if (!grid.is_free(n)) continue;
        auto& slot = dist[grid.index(n)];
        if (slot != kUnreachable) continue;
        slot = depth;
        next.push_back(n);
      }
    }
    frontier.swap(next);
    next.clear();
  }
  return DistanceField(grid.height(), grid.width(), std::move(dist));
}

}  // namespace radloc::reward
