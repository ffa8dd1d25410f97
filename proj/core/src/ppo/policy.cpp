#include "radloc/ppo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radloc/common/error.hpp"
#include "radloc/nn/sampling.hpp"

namespace radloc::ppo {

void validate(const PolicyConfig& c) {
  if (c.window <= 1 || c.window % 2 == 0) throw ConfigError("policy window must be odd and > 1");
  if (c.n_maps < 1 || c.embedding_size < 1)
    throw ConfigError("policy input sizes must be positive");
  if (c.hidden < 1 || c.conv1_channels < 1 || c.conv2_channels < 1) {
    throw ConfigError("policy layer widths must be positive");
  }
  if (c.n_actions != env::kNumActions && c.n_actions != env::kNumActionsNoDeclare) {
    throw ConfigError("policy action count must be 11 or 9");
  }
}

namespace {

nn::NetworkSpec trunk_spec(const PolicyConfig& c) {
  validate(c);
  const auto n = static_cast<std::size_t>(c.window);
  const auto pooled = n / 2;
  nn::NetworkSpec s;
  s.input_shape = {static_cast<std::size_t>(c.n_maps), n, n};
  s.aux_size = static_cast<std::size_t>(c.embedding_size);
  const std::size_t flat = c.conv2_channels * pooled * pooled;
  s.layers = {
      nn::conv2d("conv1", static_cast<std::size_t>(c.n_maps), c.conv1_channels, 3, 1, 1),
      nn::relu(),
      nn::maxpool2d(2),
      nn::conv2d("conv2", c.conv1_channels, c.conv2_channels, 3, 1, 1),
      nn::relu(),
      nn::concat(flat, s.aux_size),
      nn::dense("fc1", flat + s.aux_size, c.hidden),
      nn::relu(),
  };
  return s;
}

}  // namespace

nn::NetworkSpec actor_spec(const PolicyConfig& c) {
  auto s = trunk_spec(c);
  s.layers.push_back(nn::dense("fc2", c.hidden, static_cast<std::size_t>(c.n_actions)));
  s.layers.push_back(nn::softmax());
  nn::validate(s);
  return s;
}

nn::NetworkSpec critic_spec(const PolicyConfig& c) {
  auto s = trunk_spec(c);
  s.layers.push_back(nn::dense("fc2", c.hidden, 1));
  nn::validate(s);
  return s;
}

ActorCritic make_actor_critic(const PolicyConfig& config, Rng& rng) {
  ActorCritic m;
  m.config = config;
  m.actor_spec = actor_spec(config);
  m.critic_spec = critic_spec(config);
  m.actor = nn::init_params(m.actor_spec, rng, 0.01);
  m.critic = nn::init_params(m.critic_spec, rng, 1.0);
  return m;
}

ObsBatch make_batch(const std::vector<obs::ReducedObservation>& observations) {
  if (observations.empty()) throw ConfigError("make_batch: no observations");
  const auto& first = observations.front();
  nn::Shape ms{observations.size()};
  ms.insert(ms.end(), first.maps.shape().begin(), first.maps.shape().end());
  ObsBatch b{nn::Tensor(ms), nn::Tensor({observations.size(), first.embedding.size()})};
  const std::size_t plane = first.maps.size(), emb = first.embedding.size();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (o.maps.size() != plane || o.embedding.size() != emb) {
      throw ConfigError("make_batch: observations differ in shape");
    }
    std::copy_n(o.maps.data(), plane, b.maps.data() + i * plane);
    std::copy_n(o.embedding.data(), emb, b.embeddings.data() + i * emb);
  }
  return b;
}

template <typename Scalar>
void masked_softmax(std::span<const Scalar> logits, std::span<const std::uint8_t> mask,
                    std::span<Scalar> probs) {
  Scalar mx = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) mx = std::max(mx, logits[i]);
  }
  if (mx == -std::numeric_limits<Scalar>::infinity()) {
    throw ContractViolation("masked_softmax: every action is masked");
  }
  Scalar sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = mask[i] ? std::exp(logits[i] - mx) : Scalar{0};
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
}

template void masked_softmax(std::span<const float>, std::span<const std::uint8_t>,
                             std::span<float>);
template void masked_softmax(std::span<const double>, std::span<const std::uint8_t>,
                             std::span<double>);

nn::Tensor actor_logits(const ActorCritic& model, const ObsBatch& batch) {
  return nn::forward(model.actor_spec, model.actor, batch.maps, &batch.embeddings,
                     {.layer_end = model.actor_spec.layers.size() - 1, .keep_cache = false})
      .output;
}

nn::Tensor action_probs(const ActorCritic& model, const ObsBatch& batch,
                        std::span<const std::uint8_t> masks) {
  auto logits = actor_logits(model, batch);
  const auto A = static_cast<std::size_t>(model.n_actions());
  if (masks.size() != batch.size() * A) throw ConfigError("action_probs: mask size mismatch");
  nn::Tensor probs(logits.shape());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    masked_softmax<float>(std::span<const float>(logits.data() + b * A, A), masks.subspan(b * A, A),
                          std::span<float>(probs.data() + b * A, A));
  }
  return probs;
}

std::vector<float> state_values(const ActorCritic& model, const ObsBatch& batch) {
  return nn::forward(model.critic_spec, model.critic, batch.maps, &batch.embeddings,
                     {.keep_cache = false})
      .output.storage();
}

void append_mask(std::vector<std::uint8_t>& out, const env::ActionMask& mask, int n_actions) {
  for (int i = 0; i < n_actions; ++i) out.push_back(mask[static_cast<std::size_t>(i)] ? 1 : 0);
}

ActorPolicy::ActorPolicy(const ActorCritic& model, bool greedy, std::uint64_t seed)
    : model_(&model), greedy_(greedy), rng_(seed) {}

std::vector<env::Action> ActorPolicy::act(
    const env::SearchEnvironment& env, const std::vector<obs::ReducedObservation>& observations) {
  if (static_cast<int>(observations.size()) != env.n_agents()) {
    throw ConfigError("ActorPolicy needs one observation per agent (is an encoder attached?)");
  }
  const int A = model_->n_actions();
  std::vector<std::uint8_t> masks;
  for (int a = 0; a < env.n_agents(); ++a) append_mask(masks, env.action_mask(a), A);
  const auto probs = action_probs(*model_, make_batch(observations), masks);
  std::vector<env::Action> actions;
  for (int a = 0; a < env.n_agents(); ++a) {
    std::span<const float> row(probs.data() + static_cast<std::size_t>(a) * A,
                               static_cast<std::size_t>(A));
    const auto idx = greedy_ ? nn::greedy_argmax(row) : nn::categorical_sample(row, rng_);
    actions.push_back(env::action_from_index(static_cast<int>(idx)));
  }
  return actions;
}

}  // namespace radloc::ppo
