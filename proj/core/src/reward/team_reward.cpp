#include "radloc/reward/team_reward.hpp"

namespace radloc::reward {

double team_reward(FlagOutcome flags, int moved, int min_distance, int prev_min_distance,
                   double penalty) {
  if (flags == FlagOutcome::incorrect) return -penalty;
  if (min_distance < prev_min_distance) return -static_cast<double>(moved) + 1.0;
  return -static_cast<double>(moved) - 1.0;
}

}  // namespace radloc::reward
