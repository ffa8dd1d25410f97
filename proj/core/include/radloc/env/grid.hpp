#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace radloc::env {

// Grid cell; row grows downward (south), col grows rightward (east).
struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// h x w occupancy grid with a physical cell size in meters.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, double cell_size_m = 10.0);

  int height() const { return height_; }
  int width() const { return width_; }
  double cell_size() const { return cell_size_; }
  std::size_t cell_count() const { return obstacles_.size(); }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx / width_), static_cast<int>(idx % width_)};
  }

  bool is_obstacle(Cell c) const { return obstacles_[index(c)] != 0; }
  // In-grid and not an obstacle.
  bool is_free(Cell c) const { return in_bounds(c) && !is_obstacle(c); }
  void set_obstacle(Cell c, bool blocked = true) { obstacles_[index(c)] = blocked ? 1 : 0; }

  const std::vector<std::uint8_t>& obstacle_mask() const { return obstacles_; }
  std::size_t obstacle_count() const;
  std::vector<Cell> free_cells() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  double cell_size_ = 10.0;
  std::vector<std::uint8_t> obstacles_;
};

// 8-neighborhood offsets in the order used for BFS expansion.
inline constexpr Cell kNeighborOffsets[8] = {{0, 1},  {-1, 1}, {-1, 0}, {-1, -1},
                                             {0, -1}, {1, -1}, {1, 0},  {1, 1}};

// Connected-component label per cell (8-connected over free cells); -1 for
// obstacles. Returns the number of components through `count`.
std::vector<int> label_components(const Grid& grid, int* count = nullptr);

// Cells visited by the Bresenham line from a to b, both endpoints included.
std::vector<Cell> bresenham_line(Cell a, Cell b);

// Obstacle cells traversed by the discrete a->b line, endpoints excluded.
int line_obstacle_count(const Grid& grid, Cell a, Cell b);

}  // namespace radloc::env
