#include "radloc/env/physics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace radloc::env {

double cpm_mean(const Grid& grid, const TargetSpec& target, Cell detector, double mu,
                double constant) {
  if (!target.exists) return 0.0;
  const double dr = (detector.row - target.position.row) * grid.cell_size();
  const double dc = (detector.col - target.position.col) * grid.cell_size();
  const double d2 = std::max(dr * dr + dc * dc, grid.cell_size() * grid.cell_size());
  const int k = line_obstacle_count(grid, detector, target.position);
  return constant * target.strength / d2 * std::exp(-mu * k);
}

std::int64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

}  // namespace radloc::env
