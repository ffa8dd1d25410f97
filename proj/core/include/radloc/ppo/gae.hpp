#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace radloc::ppo {

struct Advantages {
  std::vector<double> advantages;
  // Value targets: advantage + value estimate.
  std::vector<double> returns;
};

// GAE over one time-ordered sequence of a single actor. dones[t] marks that
// the episode ended after step t (no bootstrap across it); `bootstrap` is the
// value of the state following the last step, used only when that step is
// not terminal.
Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const std::uint8_t> dones, double bootstrap, double gamma,
                       double lambda);

}  // namespace radloc::ppo
