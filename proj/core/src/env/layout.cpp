#include "radloc/env/layout.hpp"

#include <algorithm>
#include <cmath>

#include "radloc/common/error.hpp"

namespace radloc::env {

namespace {

void set_if_inside(Grid& g, Cell c, bool blocked) {
  if (g.in_bounds(c)) g.set_obstacle(c, blocked);
}

void add_wall(Grid& g, Rng& rng) {
  const bool horizontal = uniform01(rng) < 0.5;
  const int span = horizontal ? g.width() : g.height();
  const int len = uniform_int(rng, std::min(3, span), std::max(3, span / 2));
  const int row = uniform_int(rng, 0, g.height() - 1);
  const int col = uniform_int(rng, 0, g.width() - 1);
  std::vector<Cell> cells;
  for (int i = 0; i < len; ++i) {
    cells.push_back(horizontal ? Cell{row, col + i} : Cell{row + i, col});
  }
  for (const auto& c : cells) set_if_inside(g, c, true);
  if (len >= 5) {
    const int gap = uniform_int(rng, 1, 2);
    const int at = uniform_int(rng, 1, len - 1 - gap);
    for (int i = at; i < at + gap; ++i) set_if_inside(g, cells[i], false);
  }
}

void add_room(Grid& g, Rng& rng) {
  const int max_inner = std::max(2, std::min(g.height(), g.width()) / 3);
  const int ih = uniform_int(rng, 2, max_inner);
  const int iw = uniform_int(rng, 2, max_inner);
  const int top = uniform_int(rng, -1, g.height() - 2);
  const int left = uniform_int(rng, -1, g.width() - 2);
  const int bottom = top + ih + 1, right = left + iw + 1;
  std::vector<Cell> ring;
  for (int c = left; c <= right; ++c) {
    ring.push_back({top, c});
    ring.push_back({bottom, c});
  }
  for (int r = top + 1; r < bottom; ++r) {
    ring.push_back({r, left});
    ring.push_back({r, right});
  }
  for (const auto& c : ring) set_if_inside(g, c, true);
  // Doors on non-corner ring cells.
  const int doors = uniform_int(rng, 1, 2);
  for (int d = 0; d < doors; ++d) {
    const int side = uniform_int(rng, 0, 3);
    Cell door;
    if (side == 0) door = {top, uniform_int(rng, left + 1, right - 1)};
    if (side == 1) door = {bottom, uniform_int(rng, left + 1, right - 1)};
    if (side == 2) door = {uniform_int(rng, top + 1, bottom - 1), left};
    if (side == 3) door = {uniform_int(rng, top + 1, bottom - 1), right};
    set_if_inside(g, door, false);
  }
}

void add_block(Grid& g, Rng& rng) {
  const int bh = uniform_int(rng, 1, 3), bw = uniform_int(rng, 1, 3);
  const int top = uniform_int(rng, 0, g.height() - 1);
  const int left = uniform_int(rng, 0, g.width() - 1);
  for (int r = top; r < top + bh; ++r) {
    for (int c = left; c < left + bw; ++c) set_if_inside(g, {r, c}, true);
  }
}

}  // namespace

Grid generate_layout(int height, int width, double cell_size_m, const LayoutConfig& config,
                     Rng& rng) {
  Grid grid(height, width, cell_size_m);
  const double density =
      config.density_min + (config.density_max - config.density_min) * uniform01(rng);
  const auto target = static_cast<std::size_t>(std::lround(density * grid.cell_count()));
  for (int attempt = 0; attempt < 400 && grid.obstacle_count() < target; ++attempt) {
    const int kind = uniform_int(rng, 0, 2);
    if (kind == 0) add_wall(grid, rng);
    if (kind == 1) add_room(grid, rng);
    if (kind == 2) add_block(grid, rng);
  }
  return grid;
}

std::vector<Cell> SealedRoom::interior() const {
  std::vector<Cell> cells;
  for (int r = top; r < top + inner_height; ++r) {
    for (int c = left; c < left + inner_width; ++c) cells.push_back({r, c});
  }
  return cells;
}

SealedRoom add_sealed_room(Grid& grid, const LayoutConfig& config, Rng& rng) {
  const int max_h = std::min(config.sealed_room_max, grid.height() - 2);
  const int max_w = std::min(config.sealed_room_max, grid.width() - 2);
  const int min_side = std::max(1, config.sealed_room_min);
  if (max_h < min_side || max_w < min_side) {
    throw ConfigError("grid too small for a sealed room");
  }
  SealedRoom room;
  room.inner_height = uniform_int(rng, min_side, max_h);
  room.inner_width = uniform_int(rng, min_side, max_w);
  room.top = uniform_int(rng, 1, grid.height() - room.inner_height - 1);
  room.left = uniform_int(rng, 1, grid.width() - room.inner_width - 1);
  for (int r = room.top - 1; r <= room.top + room.inner_height; ++r) {
    for (int c = room.left - 1; c <= room.left + room.inner_width; ++c) {
      const bool inside = r >= room.top && r < room.top + room.inner_height && c >= room.left &&
                          c < room.left + room.inner_width;
      grid.set_obstacle({r, c}, !inside);
    }
  }
  return room;
}

}  // namespace radloc::env
