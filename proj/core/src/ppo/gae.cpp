#include "radloc/ppo/gae.hpp"

#include "radloc/common/error.hpp"

namespace radloc::ppo {

Advantages compute_gae(std::span<const double> rewards, std::span<const double> values,
                       std::span<const std::uint8_t> dones, double bootstrap, double gamma,
                       double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T) {
    throw ContractViolation("compute_gae: rewards, values and dones differ in length");
  }
  Advantages out;
  out.advantages.assign(T, 0.0);
  out.returns.assign(T, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap;
  for (std::size_t i = T; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + values[i];
    next_value = values[i];
  }
  return out;
}

}  // namespace radloc::ppo
