#include "radloc/env/grid.hpp"

#include <cstdlib>
#include <deque>

#include "radloc/common/error.hpp"

namespace radloc::env {

Grid::Grid(int height, int width, double cell_size_m)
    : height_(height), width_(width), cell_size_(cell_size_m) {
  if (height < 1 || width < 1) throw ConfigError("grid dimensions must be positive");
  if (!(cell_size_m > 0)) throw ConfigError("cell size must be positive");
  obstacles_.assign(static_cast<std::size_t>(height) * width, 0);
}

std::size_t Grid::obstacle_count() const {
  std::size_t n = 0;
  for (auto o : obstacles_) n += o;
  return n;
}

std::vector<Cell> Grid::free_cells() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    if (!obstacles_[i]) out.push_back(cell_at(i));
  }
  return out;
}

std::vector<int> label_components(const Grid& grid, int* count) {
  std::vector<int> label(grid.cell_count(), -1);
  int next = 0;
  std::deque<Cell> queue;
  for (std::size_t i = 0; i < label.size(); ++i) {
    const Cell start = grid.cell_at(i);
    if (grid.is_obstacle(start) || label[i] >= 0) continue;
    label[i] = next;
    queue.push_back(start);
    while (!queue.empty()) {
      const Cell c = queue.front();
      queue.pop_front();
      for (const auto& d : kNeighborOffsets) {
        const Cell n{c.row + d.row, c.col + d.col};
        if (!grid.is_free(n) || label[grid.index(n)] >= 0) continue;
        label[grid.index(n)] = next;
        queue.push_back(n);
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

std::vector<Cell> bresenham_line(Cell a, Cell b) {
  std::vector<Cell> cells;
  int x0 = a.col, y0 = a.row;
  const int x1 = b.col, y1 = b.row;
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    cells.push_back({y0, x0});
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return cells;
}

int line_obstacle_count(const Grid& grid, Cell a, Cell b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b)) {
    throw ConfigError("line_obstacle_count: endpoints must lie inside the grid");
  }
  if (a == b) return 0;
  const auto cells = bresenham_line(a, b);
  int k = 0;
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) k += grid.is_obstacle(cells[i]) ? 1 : 0;
  return k;
}

}  // namespace radloc::env
