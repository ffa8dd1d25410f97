#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace radloc {

using Rng = std::mt19937_64;

// Named sub-streams fanned out from the single global seed.
enum class Stream : std::uint64_t {
  env = 1,
  rollout = 2,
  init = 3,
  shuffle = 4,
  eval = 5,
  dataset = 6,
  layout = 7,
  benchmark = 8,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based splitting: the seed of (stream, index) depends only on the
// root seed and that pair, so adding workers leaves other streams untouched.
std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

// Uniform double in [0, 1) using the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [lo, hi] (inclusive).
int uniform_int(Rng& rng, int lo, int hi);

// Fisher-Yates with uniform_int, so orderings do not depend on the standard
// library's distribution implementations.
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace radloc
