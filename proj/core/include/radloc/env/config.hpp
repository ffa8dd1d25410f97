#pragma once

#include <array>
#include <cstdint>

namespace radloc::env {

enum class Scenario : int { reachable = 0, unreachable = 1, nonexistent = 2 };
inline constexpr int kNumScenarios = 3;

const char* to_string(Scenario s);

struct LayoutConfig {
  // Obstacle fraction is drawn uniformly from [density_min, density_max]
  // per layout.
  double density_min = 0.0;
  double density_max = 0.2;
  // Interior side length range of the sealed room that hides an
  // unreachable target.
  int sealed_room_min = 1;
  int sealed_room_max = 3;
};

struct EnvConfig {
  int height = 100;
  int width = 100;
  double cell_size_m = 10.0;
  int n_agents = 4;
  double strength_min = 1e9;
  double strength_max = 1e9;
  double mu = 0.1;
  // Reachable, unreachable, nonexistent.
  std::array<double, kNumScenarios> scenario_probs{1.0 / 3, 1.0 / 3, 1.0 / 3};
  int max_steps = 100;
  // Wrong-declaration penalty Q.
  double penalty = 500.0;
  // Proportionality constant of the inverse-square count rate.
  double cpm_constant = 1.0;
  // When false, the two declaration actions are always masked (9-action
  // ablation).
  bool allow_declarations = true;
  LayoutConfig layout;
  std::uint64_t seed = 0;
};

// Throws ConfigError describing the first invalid field.
void validate(const EnvConfig& config);

}  // namespace radloc::env
