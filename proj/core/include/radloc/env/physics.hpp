#pragma once

#include <cstdint>

#include "radloc/common/rng.hpp"
#include "radloc/env/grid.hpp"

namespace radloc::env {

struct TargetSpec {
  bool exists = false;
  Cell position;
  double strength = 0.0;
  bool reachable = false;
};

// Expected counts per minute at `detector`:
//   C * S / max(d^2, cell_size^2) * exp(-mu * k)
// with d the center-to-center distance in meters and k the obstacle cells
// crossed by the detector->target line. Zero when there is no target.
double cpm_mean(const Grid& grid, const TargetSpec& target, Cell detector, double mu,
                double constant = 1.0);

// Poisson draw around cpm_mean.
std::int64_t sample_poisson(double mean, Rng& rng);

}  // namespace radloc::env
