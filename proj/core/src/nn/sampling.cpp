#include "radloc/nn/sampling.hpp"

#include <cmath>

#include "radloc/common/error.hpp"

namespace radloc::nn {

std::size_t categorical_sample(std::span<const float> probs, Rng& rng) {
  if (probs.empty()) throw ConfigError("categorical_sample: empty distribution");
  double total = 0;
  for (float p : probs) {
    if (!(p >= 0.0f) || !std::isfinite(p)) {
      throw ConfigError("categorical_sample: probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (total == 0.0) throw ConfigError("categorical_sample: all-zero distribution");
  if (std::abs(total - 1.0) > 1e-5) {
    throw ConfigError("categorical_sample: probabilities sum to " + std::to_string(total));
  }
  const double u = uniform01(rng) * total;
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0f) continue;
    last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t greedy_argmax(std::span<const float> probs) {
  if (probs.empty()) throw ConfigError("greedy_argmax: empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

}  // namespace radloc::nn
