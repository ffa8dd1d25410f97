#pragma once

namespace radloc::reward {

// Whether a binding (strict-majority) declaration happened this step and, if
// so, whether it matched the scenario.
enum class FlagOutcome { none, correct, incorrect };

inline constexpr double kDefaultPenalty = 500.0;

// Team-shared shaped reward:
//   -Q        if a majority declaration is incorrect
//   -v + 1    else if the team's minimum BFS distance to the target shrank
//   -v - 1    otherwise
// Unreachable distances (kUnreachable) never compare as an improvement.
double team_reward(FlagOutcome flags, int moved, int min_distance, int prev_min_distance,
                   double penalty = kDefaultPenalty);

}  // namespace radloc::reward
