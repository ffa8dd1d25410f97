#include "radloc/env/search_env.hpp"

#include "radloc/common/error.hpp"

namespace radloc::env {

SearchEnvironment::SearchEnvironment(EnvConfig config, obs::ObservationConfig obs_config,
                                     std::shared_ptr<const cae::Encoder> encoder)
    : game_(config), obs_config_(std::move(obs_config)), encoder_(std::move(encoder)) {
  if (encoder_) {
    obs::validate(obs_config_, config.height, config.width);
    if (encoder_->height() != config.height || encoder_->width() != config.width) {
      throw ConfigError("encoder input size does not match the environment grid");
    }
    if (static_cast<int>(encoder_->embedding_size()) != obs_config_.embedding_size) {
      throw ConfigError("encoder embedding size does not match observation config");
    }
  }
}

std::vector<obs::ReducedObservation> SearchEnvironment::start(
    const std::vector<std::int64_t>& readings) {
  maps_ = obs::make_maps(game_.state().grid);
  obs::update_maps(maps_, game_.state().agents, readings);
  embedding_ = encoder_ ? encoder_->encode(game_.state().grid) : std::vector<float>{};
  return observe();
}

std::vector<obs::ReducedObservation> SearchEnvironment::reset() { return start(game_.reset()); }

std::vector<obs::ReducedObservation> SearchEnvironment::reset(std::uint64_t episode_seed) {
  return start(game_.reset(episode_seed));
}

std::vector<obs::ReducedObservation> SearchEnvironment::reset_to(EnvState state) {
  return start(game_.reset_to(std::move(state)));
}

std::vector<obs::ReducedObservation> SearchEnvironment::observe() const {
  std::vector<obs::ReducedObservation> out;
  if (!encoder_) return out;
  out.reserve(static_cast<std::size_t>(n_agents()));
  for (int a = 0; a < n_agents(); ++a) {
    out.push_back(obs::assemble_reduced(maps_, a, embedding_, obs_config_));
  }
  return out;
}

StepResult SearchEnvironment::step(std::span<const Action> joint_action) {
  StepResult r;
  auto g = game_.step(joint_action);
  obs::update_maps(maps_, game_.state().agents, g.info.readings);
  r.reward = g.reward;
  r.done = g.done;
  r.info = std::move(g.info);
  r.observations = observe();
  return r;
}

}  // namespace radloc::env
