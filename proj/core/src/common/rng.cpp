#include "radloc/common/rng.hpp"

namespace radloc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(root);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
  return splitmix64(s ^ (index * 0x8cb92ba72f3d8dd7ULL + 1));
}

int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return lo + static_cast<int>(draw % span);
}

}  // namespace radloc
