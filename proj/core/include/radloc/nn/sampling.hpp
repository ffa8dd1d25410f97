#pragma once

#include <cstddef>
#include <span>

#include "radloc/common/rng.hpp"

namespace radloc::nn {

// Draws index i with probability probs[i]. Requires nonnegative entries
// summing to 1 within 1e-5; throws ConfigError otherwise (including the
// all-zero case).
std::size_t categorical_sample(std::span<const float> probs, Rng& rng);

// Most probable index; ties resolve to the lowest index.
std::size_t greedy_argmax(std::span<const float> probs);

}  // namespace radloc::nn
