#include "radloc/ppo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radloc/common/error.hpp"

namespace radloc::ppo {

void validate(const PpoConfig& c) {
  if (!(c.clip_epsilon > 0 && c.clip_epsilon < 1))
    throw ConfigError("clip epsilon must lie in (0, 1)");
  if (!(c.gamma >= 0 && c.gamma <= 1)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(c.lambda >= 0 && c.lambda <= 1)) throw ConfigError("lambda must lie in [0, 1]");
  if (c.epochs < 1) throw ConfigError("epochs per update must be >= 1");
  if (!(c.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (!(c.value_coef >= 0) || !(c.entropy_coef >= 0)) {
    throw ConfigError("loss coefficients must be nonnegative");
  }
  if (!(c.max_grad_norm >= 0)) throw ConfigError("max grad norm must be nonnegative");
}

template <typename Scalar>
PolicyLoss<Scalar> policy_loss(const nn::NetworkSpec& actor_spec,
                               const nn::NetworkParams<Scalar>& actor,
                               const nn::BasicTensor<Scalar>& maps,
                               const nn::BasicTensor<Scalar>& embeddings,
                               std::span<const std::uint8_t> masks, std::span<const int> actions,
                               std::span<const double> old_log_probs,
                               std::span<const double> advantages, double clip_epsilon,
                               double entropy_coef) {
  auto fwd = nn::forward(actor_spec, actor, maps, &embeddings,
                         {.layer_end = actor_spec.layers.size() - 1, .keep_cache = true});
  const std::size_t B = fwd.output.dim(0), A = fwd.output.dim(1);
  if (masks.size() != B * A || actions.size() != B || old_log_probs.size() != B ||
      advantages.size() != B) {
    throw ConfigError("policy_loss: minibatch arrays differ in length");
  }
  PolicyLoss<Scalar> out;
  nn::BasicTensor<Scalar> upstream(fwd.output.shape());
  std::vector<Scalar> p(A);
  const double inv_b = 1.0 / static_cast<double>(B);
  std::size_t clipped = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const std::span<const Scalar> z(fwd.output.data() + b * A, A);
    masked_softmax<Scalar>(z, masks.subspan(b * A, A), p);
    const auto a = static_cast<std::size_t>(actions[b]);
    if (a >= A || !masks[b * A + a]) throw ContractViolation("policy_loss: action is masked");
    const double logp = std::log(static_cast<double>(p[a]));
    const double ratio = std::exp(logp - old_log_probs[b]);
    const double adv = advantages[b];
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    const double s1 = ratio * adv, s2 = clipped_ratio * adv;
    const bool unclipped = s1 <= s2;
    if (ratio < 1.0 - clip_epsilon || ratio > 1.0 + clip_epsilon) ++clipped;
    out.surrogate += std::min(s1, s2) * inv_b;

    double h = 0.0;
    for (std::size_t k = 0; k < A; ++k) {
      if (p[k] > 0) h -= static_cast<double>(p[k]) * std::log(static_cast<double>(p[k]));
    }
    out.entropy += h * inv_b;

    Scalar* g = upstream.data() + b * A;
    for (std::size_t k = 0; k < A; ++k) {
      const double pk = static_cast<double>(p[k]);
      double d = 0.0;
      if (unclipped) d += adv * ratio * ((k == a ? 1.0 : 0.0) - pk);
      if (pk > 0) d += entropy_coef * (-pk * (std::log(pk) + h));
      g[k] = static_cast<Scalar>(-d * inv_b);
    }
  }
  out.loss = -out.surrogate - entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  out.grads = nn::backward(actor_spec, actor, fwd.cache, upstream).grads;
  return out;
}

template <typename Scalar>
ValueLoss<Scalar> value_loss(const nn::NetworkSpec& critic_spec,
                             const nn::NetworkParams<Scalar>& critic,
                             const nn::BasicTensor<Scalar>& maps,
                             const nn::BasicTensor<Scalar>& embeddings,
                             std::span<const double> targets) {
  auto fwd = nn::forward(critic_spec, critic, maps, &embeddings);
  const std::size_t B = fwd.output.dim(0);
  if (targets.size() != B) throw ConfigError("value_loss: target count mismatch");
  ValueLoss<Scalar> out;
  nn::BasicTensor<Scalar> upstream(fwd.output.shape());
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double d = static_cast<double>(fwd.output[b]) - targets[b];
    out.loss += d * d * inv_b;
    upstream[b] = static_cast<Scalar>(2.0 * d * inv_b);
  }
  out.grads = nn::backward(critic_spec, critic, fwd.cache, upstream).grads;
  return out;
}

template PolicyLoss<float> policy_loss(const nn::NetworkSpec&, const nn::NetworkParams<float>&,
                                       const nn::Tensor&, const nn::Tensor&,
                                       std::span<const std::uint8_t>, std::span<const int>,
                                       std::span<const double>, std::span<const double>, double,
                                       double);
template PolicyLoss<double> policy_loss(const nn::NetworkSpec&, const nn::NetworkParams<double>&,
                                        const nn::Tensor64&, const nn::Tensor64&,
                                        std::span<const std::uint8_t>, std::span<const int>,
                                        std::span<const double>, std::span<const double>, double,
                                        double);
template ValueLoss<float> value_loss(const nn::NetworkSpec&, const nn::NetworkParams<float>&,
                                     const nn::Tensor&, const nn::Tensor&, std::span<const double>);
template ValueLoss<double> value_loss(const nn::NetworkSpec&, const nn::NetworkParams<double>&,
                                      const nn::Tensor64&, const nn::Tensor64&,
                                      std::span<const double>);

Advantages buffer_advantages(const RolloutBuffer& buf, double gamma, double lambda) {
  Advantages out;
  out.advantages.assign(buf.size(), 0.0);
  out.returns.assign(buf.size(), 0.0);
  std::vector<double> rewards(buf.steps), values(buf.steps);
  std::vector<std::uint8_t> dones(buf.steps);
  for (std::size_t e = 0; e < buf.n_envs; ++e) {
    for (std::size_t j = 0; j < buf.n_agents; ++j) {
      for (std::size_t t = 0; t < buf.steps; ++t) {
        rewards[t] = buf.rewards[t * buf.n_envs + e];
        dones[t] = buf.dones[t * buf.n_envs + e];
        values[t] = buf.values[buf.index(t, e, j)];
      }
      const auto seq =
          compute_gae(rewards, values, dones, buf.bootstrap[e * buf.n_agents + j], gamma, lambda);
      for (std::size_t t = 0; t < buf.steps; ++t) {
        out.advantages[buf.index(t, e, j)] = seq.advantages[t];
        out.returns[buf.index(t, e, j)] = seq.returns[t];
      }
    }
  }
  return out;
}

Optimizers make_optimizers(const ActorCritic& model, double learning_rate) {
  return {nn::make_adam(model.actor, learning_rate), nn::make_adam(model.critic, learning_rate)};
}

UpdateStats ppo_update(ActorCritic& model, Optimizers& optim, const RolloutBuffer& buffer,
                       const Advantages& advantages, const PpoConfig& config, Rng& rng) {
  validate(config);
  const std::size_t n = buffer.size();
  if (n == 0 || advantages.advantages.size() != n) {
    throw ConfigError("ppo_update: advantages do not match the buffer");
  }
  std::vector<double> adv = advantages.advantages;
  if (config.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }
  const std::size_t mb =
      config.minibatch_size > 0 ? config.minibatch_size : std::max<std::size_t>(1, n / 8);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  UpdateStats stats;
  std::size_t batches = 0;
  std::vector<int> actions;
  std::vector<double> old_logp, mb_adv, mb_ret;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t begin = 0; begin < n; begin += mb) {
      const std::span<const std::size_t> idx(order.data() + begin, std::min(mb, n - begin));
      const auto batch = buffer.gather(idx);
      const auto masks = buffer.gather_masks(idx);
      actions.clear();
      old_logp.clear();
      mb_adv.clear();
      mb_ret.clear();
      for (auto i : idx) {
        actions.push_back(buffer.actions[i]);
        old_logp.push_back(buffer.log_probs[i]);
        mb_adv.push_back(adv[i]);
        mb_ret.push_back(advantages.returns[i]);
      }
      auto pl =
          policy_loss<float>(model.actor_spec, model.actor, batch.maps, batch.embeddings, masks,
                             actions, old_logp, mb_adv, config.clip_epsilon, config.entropy_coef);
      auto vl =
          value_loss<float>(model.critic_spec, model.critic, batch.maps, batch.embeddings, mb_ret);
      if (!std::isfinite(pl.loss) || !std::isfinite(vl.loss)) {
        throw TrainingError("PPO loss became non-finite");
      }
      for (auto& g : vl.grads) {
        for (auto& v : g.weight.storage()) v *= static_cast<float>(config.value_coef);
        for (auto& v : g.bias.storage()) v *= static_cast<float>(config.value_coef);
      }
      if (config.max_grad_norm > 0) {
        stats.actor_grad_norm += nn::clip_grad_norm(pl.grads, config.max_grad_norm);
        stats.critic_grad_norm += nn::clip_grad_norm(vl.grads, config.max_grad_norm);
      } else {
        stats.actor_grad_norm += nn::grad_norm(pl.grads);
        stats.critic_grad_norm += nn::grad_norm(vl.grads);
      }
      nn::adam_step(model.actor, pl.grads, optim.actor);
      nn::adam_step(model.critic, vl.grads, optim.critic);
      stats.loss_clip += -pl.surrogate;
      stats.loss_vf += vl.loss;
      stats.entropy += pl.entropy;
      stats.clip_fraction += pl.clip_fraction;
      ++batches;
    }
  }
  const double inv = 1.0 / static_cast<double>(batches);
  stats.loss_clip *= inv;
  stats.loss_vf *= inv;
  stats.entropy *= inv;
  stats.clip_fraction *= inv;
  stats.actor_grad_norm *= inv;
  stats.critic_grad_norm *= inv;
  return stats;
}

}  // namespace radloc::ppo
