#pragma once

#include <memory>
#include <span>
#include <vector>

#include "radloc/cae/cae.hpp"
#include "radloc/env/game.hpp"
#include "radloc/obs/observations.hpp"

namespace radloc::env {

struct StepResult {
  std::vector<obs::ReducedObservation> observations;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Game plus the team's observation maps: every reset/step returns each
// agent's reduced observation. Without an encoder, observations are skipped
// (scripted policies only need the state).
class SearchEnvironment {
 public:
  SearchEnvironment(EnvConfig config, obs::ObservationConfig obs_config,
                    std::shared_ptr<const cae::Encoder> encoder);

  const EnvConfig& config() const { return game_.config(); }
  const obs::ObservationConfig& observation_config() const { return obs_config_; }
  const EnvState& state() const { return game_.state(); }
  const obs::ObservationMaps& maps() const { return maps_; }
  int n_agents() const { return game_.n_agents(); }
  bool observes() const { return encoder_ != nullptr; }
  const std::vector<float>& embedding() const { return embedding_; }

  std::vector<obs::ReducedObservation> reset();
  std::vector<obs::ReducedObservation> reset(std::uint64_t episode_seed);
  std::vector<obs::ReducedObservation> reset_to(EnvState state);
  StepResult step(std::span<const Action> joint_action);

  ActionMask action_mask(int agent) const { return game_.action_mask(agent); }
  std::vector<obs::ReducedObservation> observe() const;

 private:
  std::vector<obs::ReducedObservation> start(const std::vector<std::int64_t>& readings);

  Game game_;
  obs::ObservationConfig obs_config_;
  std::shared_ptr<const cae::Encoder> encoder_;
  obs::ObservationMaps maps_;
  std::vector<float> embedding_;
};

}  // namespace radloc::env
