#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "radloc/env/grid.hpp"

namespace radloc::env {

// Discrete movement directions (D in theta = 2*pi*d/D).
inline constexpr int kDirections = 8;
inline constexpr int kNumActions = 11;
// Action space without the two declaration actions.
inline constexpr int kNumActionsNoDeclare = 9;

// Indices 0..7 are Move(d) for d = 1..8; then Idle and the two declarations.
enum class Action : std::uint8_t {
  move_1 = 0,
  move_2,
  move_3,
  move_4,
  move_5,
  move_6,
  move_7,
  move_8,
  idle,
  declare_nonexistent,
  declare_unreachable,
};

using ActionMask = std::array<bool, kNumActions>;

inline constexpr int index(Action a) { return static_cast<int>(a); }
inline constexpr Action action_from_index(int i) { return static_cast<Action>(i); }
inline constexpr bool is_move(Action a) { return index(a) < kDirections; }
inline constexpr bool is_declaration(Action a) {
  return a == Action::declare_nonexistent || a == Action::declare_unreachable;
}
inline constexpr Action move_action(int direction) { return static_cast<Action>(direction - 1); }
// Direction d in 1..D of a move action.
inline constexpr int direction_of(Action a) { return index(a) + 1; }

// Cell offset for direction d: theta = 2*pi*d/D with east = 0 and north =
// pi/2, rounded onto the 8-neighborhood.
Cell move_offset(int direction);

std::string to_string(Action a);

}  // namespace radloc::env
