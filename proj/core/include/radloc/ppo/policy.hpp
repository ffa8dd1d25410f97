#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/env/actions.hpp"
#include "radloc/env/policy.hpp"
#include "radloc/nn/network.hpp"
#include "radloc/obs/observations.hpp"

namespace radloc::ppo {

struct PolicyConfig {
  int window = 7;
  int n_maps = 9;
  int embedding_size = 128;
  std::size_t conv1_channels = 16;
  std::size_t conv2_channels = 32;
  // Hidden FC width; 800 puts the actor at ~348k parameters.
  std::size_t hidden = 800;
  // 11, or 9 for the no-declaration ablation.
  int n_actions = env::kNumActions;
};

void validate(const PolicyConfig& config);

// conv 3x3 (pad 1) -> ReLU -> maxpool 2 -> conv 3x3 (pad 1) -> ReLU ->
// concat(embedding) -> FC -> ReLU -> FC(n_actions) -> softmax.
nn::NetworkSpec actor_spec(const PolicyConfig& config);
// Same trunk with a single linear value output.
nn::NetworkSpec critic_spec(const PolicyConfig& config);

struct ActorCritic {
  PolicyConfig config;
  nn::NetworkSpec actor_spec;
  nn::NetworkSpec critic_spec;
  nn::NetworkParams<float> actor;
  nn::NetworkParams<float> critic;

  int n_actions() const { return config.n_actions; }
};

// He-uniform init with the policy output layer scaled by 0.01.
ActorCritic make_actor_critic(const PolicyConfig& config, Rng& rng);

// Batched network inputs.
struct ObsBatch {
  nn::Tensor maps;        // [B, n_maps, n, n]
  nn::Tensor embeddings;  // [B, embedding]
  std::size_t size() const { return maps.empty() ? 0 : maps.dim(0); }
};

ObsBatch make_batch(const std::vector<obs::ReducedObservation>& observations);

// Softmax over unmasked entries; masked entries are exactly 0. `mask` holds
// one flag per logit. Throws ContractViolation when nothing is available.
template <typename Scalar>
void masked_softmax(std::span<const Scalar> logits, std::span<const std::uint8_t> mask,
                    std::span<Scalar> probs);

// Actor logits (the layer before the softmax), [B, n_actions].
nn::Tensor actor_logits(const ActorCritic& model, const ObsBatch& batch);
// Mask-renormalized action probabilities, [B, n_actions]. `masks` holds
// n_actions flags per row.
nn::Tensor action_probs(const ActorCritic& model, const ObsBatch& batch,
                        std::span<const std::uint8_t> masks);
// Critic values, one per row.
std::vector<float> state_values(const ActorCritic& model, const ObsBatch& batch);

// First n_actions entries of an environment mask.
void append_mask(std::vector<std::uint8_t>& out, const env::ActionMask& mask, int n_actions);

// Actor-driven team policy: each agent acts on its own observation with the
// shared parameters; greedy argmax or sampling.
class ActorPolicy : public env::Policy {
 public:
  ActorPolicy(const ActorCritic& model, bool greedy, std::uint64_t seed = 0);
  std::vector<env::Action> act(const env::SearchEnvironment& env,
                               const std::vector<obs::ReducedObservation>& observations) override;
  const char* name() const override { return greedy_ ? "actor-greedy" : "actor-sample"; }

 private:
  const ActorCritic* model_;
  bool greedy_;
  Rng rng_;
};

}  // namespace radloc::ppo
