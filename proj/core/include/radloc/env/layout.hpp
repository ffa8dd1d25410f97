#pragma once

#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/env/config.hpp"
#include "radloc/env/grid.hpp"

namespace radloc::env {

// Random obstacle layout: straight wall segments with door gaps, room
// outlines with doors, and small solid blocks, added until the sampled
// density is reached.
Grid generate_layout(int height, int width, double cell_size_m, const LayoutConfig& config,
                     Rng& rng);

// Axis-aligned closed ring of obstacles around a cleared interior.
struct SealedRoom {
  int top = 0;   // first interior row
  int left = 0;  // first interior col
  int inner_height = 0;
  int inner_width = 0;
  std::vector<Cell> interior() const;
};

// Carves a sealed room into `grid`. Throws ConfigError when the grid is too
// small to hold one.
SealedRoom add_sealed_room(Grid& grid, const LayoutConfig& config, Rng& rng);

}  // namespace radloc::env
