#pragma once

#include <vector>

#include "radloc/env/actions.hpp"
#include "radloc/env/search_env.hpp"

namespace radloc::env {

// Decision rule for the whole team. `observations` is empty when the
// environment runs without an encoder.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const SearchEnvironment& env) { (void)env; }
  virtual std::vector<Action> act(const SearchEnvironment& env,
                                  const std::vector<obs::ReducedObservation>& observations) = 0;
  virtual const char* name() const = 0;
};

}  // namespace radloc::env
