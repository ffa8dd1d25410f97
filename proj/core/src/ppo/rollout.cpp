#include "radloc/ppo/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "radloc/common/error.hpp"
#include "radloc/nn/sampling.hpp"

namespace radloc::ppo {

bool solved(const EpisodeRecord& e) {
  switch (e.scenario) {
    case env::Scenario::reachable:
      return e.outcome == env::Outcome::success;
    case env::Scenario::unreachable:
      return e.outcome == env::Outcome::declared_unreachable;
    case env::Scenario::nonexistent:
      return e.outcome == env::Outcome::declared_nonexistent;
  }
  return false;
}

ObsBatch RolloutBuffer::gather(std::span<const std::size_t> samples) const {
  nn::Shape ms{samples.size()};
  ms.insert(ms.end(), map_shape.begin(), map_shape.end());
  ObsBatch b{nn::Tensor(ms), nn::Tensor({samples.size(), embedding_size})};
  const std::size_t plane = nn::shape_size(map_shape);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy_n(maps.data() + samples[i] * plane, plane, b.maps.data() + i * plane);
    std::copy_n(embeddings.data() + samples[i] * embedding_size, embedding_size,
                b.embeddings.data() + i * embedding_size);
  }
  return b;
}

std::vector<std::uint8_t> RolloutBuffer::gather_masks(std::span<const std::size_t> samples) const {
  const auto A = static_cast<std::size_t>(n_actions);
  std::vector<std::uint8_t> out(samples.size() * A);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy_n(masks.data() + samples[i] * A, A, out.data() + i * A);
  }
  return out;
}

RolloutCollector::RolloutCollector(const env::EnvConfig& env_config,
                                   const obs::ObservationConfig& obs_config,
                                   std::shared_ptr<const cae::Encoder> encoder, int n_envs,
                                   std::uint64_t seed, double reward_scale)
    : rng_(make_rng(seed, Stream::rollout)), reward_scale_(reward_scale) {
  if (n_envs < 1) throw ConfigError("rollout needs at least one environment");
  if (!encoder) throw ConfigError("rollout collection needs a layout encoder");
  if (!(reward_scale > 0)) throw ConfigError("reward scale must be positive");
  for (int e = 0; e < n_envs; ++e) {
    auto c = env_config;
    c.seed = derive_seed(seed, Stream::env, static_cast<std::uint64_t>(e));
    envs_.emplace_back(c, obs_config, encoder);
  }
  for (auto& env : envs_) {
    current_.push_back(env.reset());
    running_.push_back({env.state().scenario});
  }
}

RolloutBuffer RolloutCollector::collect(const ActorCritic& model, std::size_t steps_per_env) {
  if (steps_per_env < 1) throw ConfigError("rollout horizon must be positive");
  finished_.clear();
  const std::size_t E = envs_.size();
  const auto N = static_cast<std::size_t>(envs_.front().n_agents());
  const int A = model.n_actions();
  const auto& first = current_.front().front();

  RolloutBuffer buf;
  buf.steps = steps_per_env;
  buf.n_envs = E;
  buf.n_agents = N;
  buf.n_actions = A;
  buf.map_shape = first.maps.shape();
  buf.embedding_size = first.embedding.size();
  const std::size_t total = buf.size(), plane = first.maps.size();
  buf.maps.resize(total * plane);
  buf.embeddings.resize(total * buf.embedding_size);
  buf.masks.reserve(total * static_cast<std::size_t>(A));
  buf.actions.resize(total);
  buf.log_probs.resize(total);
  buf.values.resize(total);
  buf.rewards.resize(steps_per_env * E);
  buf.dones.resize(steps_per_env * E);

  std::vector<obs::ReducedObservation> flat;
  flat.reserve(E * N);
  for (std::size_t t = 0; t < steps_per_env; ++t) {
    flat.clear();
    const std::size_t base = t * E * N;
    for (std::size_t e = 0; e < E; ++e) {
      for (std::size_t j = 0; j < N; ++j) {
        const auto& o = current_[e][j];
        std::copy_n(o.maps.data(), plane, buf.maps.data() + (base + e * N + j) * plane);
        std::copy_n(o.embedding.data(), buf.embedding_size,
                    buf.embeddings.data() + (base + e * N + j) * buf.embedding_size);
        append_mask(buf.masks, envs_[e].action_mask(static_cast<int>(j)), A);
        flat.push_back(o);
      }
    }
    const auto batch = make_batch(flat);
    const std::span<const std::uint8_t> step_masks(buf.masks.data() + base * A, E * N * A);
    const auto probs = action_probs(model, batch, step_masks);
    const auto values = state_values(model, batch);

    for (std::size_t e = 0; e < E; ++e) {
      std::vector<env::Action> joint(N);
      for (std::size_t j = 0; j < N; ++j) {
        const std::size_t i = e * N + j;
        std::span<const float> row(probs.data() + i * A, static_cast<std::size_t>(A));
        const auto a = nn::categorical_sample(row, rng_);
        joint[j] = env::action_from_index(static_cast<int>(a));
        buf.actions[base + i] = static_cast<int>(a);
        buf.log_probs[base + i] = std::log(row[a]);
        buf.values[base + i] = values[i];
      }
      auto r = envs_[e].step(joint);
      auto& ep = running_[e];
      ep.reward += r.reward;
      ep.length += 1;
      ep.cost += r.info.moved;
      buf.rewards[t * E + e] = r.reward * reward_scale_;
      buf.dones[t * E + e] = r.done ? 1 : 0;
      if (r.done) {
        ep.outcome = r.info.outcome;
        finished_.push_back(ep);
        current_[e] = envs_[e].reset();
        ep = EpisodeRecord{envs_[e].state().scenario};
      } else {
        current_[e] = std::move(r.observations);
      }
    }
  }

  flat.clear();
  for (const auto& obs : current_) flat.insert(flat.end(), obs.begin(), obs.end());
  const auto boot = state_values(model, make_batch(flat));
  buf.bootstrap.assign(boot.begin(), boot.end());
  return buf;
}

}  // namespace radloc::ppo
