#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radloc/nn/adam.hpp"
#include "radloc/ppo/gae.hpp"
#include "radloc/ppo/policy.hpp"
#include "radloc/ppo/rollout.hpp"

namespace radloc::ppo {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 20;
  double learning_rate = 3e-4;
  // Value-loss and entropy coefficients.
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  // 0 selects (samples per update) / 8.
  std::size_t minibatch_size = 0;
  bool normalize_advantages = true;
  // Global gradient-norm clip per network; 0 disables.
  double max_grad_norm = 0.5;
};

void validate(const PpoConfig& config);

// Clipped-surrogate policy loss (negated, to be minimized) minus the entropy
// bonus, averaged over a minibatch, with gradients of the actor params.
template <typename Scalar>
struct PolicyLoss {
  double loss = 0.0;
  // Mean clipped surrogate objective (to be maximized).
  double surrogate = 0.0;
  // Mean entropy of the masked distributions.
  double entropy = 0.0;
  // Fraction of samples whose ratio left [1 - eps, 1 + eps].
  double clip_fraction = 0.0;
  nn::NetworkParams<Scalar> grads;
};

template <typename Scalar>
PolicyLoss<Scalar> policy_loss(const nn::NetworkSpec& actor_spec,
                               const nn::NetworkParams<Scalar>& actor,
                               const nn::BasicTensor<Scalar>& maps,
                               const nn::BasicTensor<Scalar>& embeddings,
                               std::span<const std::uint8_t> masks, std::span<const int> actions,
                               std::span<const double> old_log_probs,
                               std::span<const double> advantages, double clip_epsilon,
                               double entropy_coef);

template <typename Scalar>
struct ValueLoss {
  // Mean squared error against the value targets (unweighted).
  double loss = 0.0;
  nn::NetworkParams<Scalar> grads;
};

template <typename Scalar>
ValueLoss<Scalar> value_loss(const nn::NetworkSpec& critic_spec,
                             const nn::NetworkParams<Scalar>& critic,
                             const nn::BasicTensor<Scalar>& maps,
                             const nn::BasicTensor<Scalar>& embeddings,
                             std::span<const double> targets);

struct UpdateStats {
  double loss_clip = 0.0;
  double loss_vf = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
};

// Per-sample advantages and value targets for a buffer, sequence by sequence
// per (environment, agent).
Advantages buffer_advantages(const RolloutBuffer& buffer, double gamma, double lambda);

struct Optimizers {
  nn::AdamState<float> actor;
  nn::AdamState<float> critic;
};

Optimizers make_optimizers(const ActorCritic& model, double learning_rate);

// Epochs of shuffled minibatch Adam steps on the buffer. Throws
// TrainingError if a loss or gradient becomes non-finite; `model` is then
// left at its last finite state only if the caller kept a copy.
UpdateStats ppo_update(ActorCritic& model, Optimizers& optim, const RolloutBuffer& buffer,
                       const Advantages& advantages, const PpoConfig& config, Rng& rng);

}  // namespace radloc::ppo
