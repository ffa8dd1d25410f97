#include <doctest.h>

#include <cmath>
#include <numeric>

#include "radloc/cae/cae.hpp"
#include "radloc/common/error.hpp"
#include "radloc/nn/adam.hpp"
#include "radloc/nn/sampling.hpp"
#include "radloc/ppo/evaluate.hpp"
#include "radloc/ppo/gae.hpp"
#include "radloc/ppo/ppo.hpp"
#include "radloc/ppo/rollout.hpp"
#include "radloc/ppo/trainer.hpp"
#include "support/ppo_check.hpp"

using namespace radloc;
using namespace radloc::ppo;

namespace {

std::shared_ptr<const cae::Encoder> tiny_encoder(int h, int w, int emb, Rng& rng) {
  cae::CaeConfig c;
  c.height = h;
  c.width = w;
  c.embedding_size = emb;
  c.encoder_channels = {2, 2, 2};
  c.hidden = 8;
  const auto spec = cae::encoder_spec(c);
  return std::make_shared<cae::Encoder>(spec, nn::init_params(spec, rng));
}

struct TinySetup {
  env::EnvConfig env;
  obs::ObservationConfig obs;
  PolicyConfig policy;
  std::shared_ptr<const cae::Encoder> encoder;
};

TinySetup tiny_setup() {
  TinySetup s;
  s.env.height = s.env.width = 8;
  s.env.n_agents = 2;
  s.env.max_steps = 20;
  s.obs.window = 5;
  s.obs.embedding_size = 4;
  s.policy.window = 5;
  s.policy.embedding_size = 4;
  s.policy.conv1_channels = 4;
  s.policy.conv2_channels = 4;
  s.policy.hidden = 16;
  Rng rng(1);
  s.encoder = tiny_encoder(8, 8, 4, rng);
  return s;
}

}  // namespace

TEST_CASE("GAE with lambda 0 is the one-step TD error") {
  std::vector<double> r = {1, -2, 0.5}, v = {0.3, 0.1, -0.4};
  std::vector<std::uint8_t> d = {0, 0, 0};
  const auto a = compute_gae(r, v, d, 2.0, 0.9, 0.0);
  CHECK(a.advantages[0] == doctest::Approx(1 + 0.9 * 0.1 - 0.3));
  CHECK(a.advantages[1] == doctest::Approx(-2 + 0.9 * -0.4 - 0.1));
  CHECK(a.advantages[2] == doctest::Approx(0.5 + 0.9 * 2.0 + 0.4));
  for (std::size_t t = 0; t < 3; ++t)
    CHECK(a.returns[t] == doctest::Approx(a.advantages[t] + v[t]));
}

TEST_CASE("GAE with lambda 1 and gamma 1 is return minus value") {
  std::vector<double> r = {1, 2, 3, 4}, v = {5, 6, 7, 8};
  std::vector<std::uint8_t> d = {0, 1, 0, 0};
  const auto a = compute_gae(r, v, d, 10.0, 1.0, 1.0);
  CHECK(a.advantages[0] == doctest::Approx(3 - 5));
  CHECK(a.advantages[1] == doctest::Approx(2 - 6));
  CHECK(a.advantages[2] == doctest::Approx(3 + 4 + 10 - 7));
  CHECK(a.advantages[3] == doctest::Approx(4 + 10 - 8));
  // A terminal last step ignores the bootstrap.
  d.back() = 1;
  CHECK(compute_gae(r, v, d, 10.0, 1.0, 1.0).advantages[3] == doctest::Approx(4 - 8));
  std::vector<double> short_v = {1};
  CHECK_THROWS_AS(compute_gae(r, short_v, d, 0, 1, 1), ContractViolation);
}

TEST_CASE("masked softmax zeroes masked entries exactly") {
  std::vector<float> logits = {100, 1, -3, 2};
  std::vector<std::uint8_t> mask = {0, 1, 0, 1};
  std::vector<float> p(4);
  masked_softmax<float>(logits, mask, p);
  CHECK(p[0] == 0.0f);
  CHECK(p[2] == 0.0f);
  CHECK(p[1] + p[3] == doctest::Approx(1.0));
  CHECK(p[3] / p[1] == doctest::Approx(std::exp(1.0)));
  std::vector<std::uint8_t> none = {0, 0, 0, 0};
  CHECK_THROWS_AS(masked_softmax<float>(logits, none, p), ContractViolation);
}

TEST_CASE("end-to-end loss gradients match finite differences") {
  Rng rng(21);
  for (int i = 0; i < 3; ++i) {
    const auto r = testing::check_actor_loss_gradients(rng);
    CHECK(r.policy < 1e-3);
    CHECK(r.value < 1e-4);
  }
}

TEST_CASE("clipped surrogate cases") {
  const auto c = testing::tiny_policy_config();
  const auto spec = actor_spec(c);
  Rng rng(4);
  auto params = nn::cast_params<double>(nn::init_params(spec, rng));
  auto f = testing::random_loss_fixture(c, spec, params, 4, rng);
  // Recompute exact current log-probs so every ratio is 1.
  const auto logits = nn::forward(spec, params, f.maps, &f.embeddings,
                                  {.layer_end = spec.layers.size() - 1, .keep_cache = false})
                          .output;
  const auto k = static_cast<std::size_t>(c.n_actions);
  for (std::size_t b = 0; b < 4; ++b) {
    std::vector<double> p(k);
    masked_softmax<double>(std::span(logits.data() + b * k, k),
                           std::span(f.masks.data() + b * k, k), p);
    f.old_log_probs[b] = std::log(p[static_cast<std::size_t>(f.actions[b])]);
  }
  auto at_one = policy_loss<double>(spec, params, f.maps, f.embeddings, f.masks, f.actions,
                                    f.old_log_probs, f.advantages, 0.2, 0.0);
  const double mean_adv = std::accumulate(f.advantages.begin(), f.advantages.end(), 0.0) / 4;
  CHECK(at_one.surrogate == doctest::Approx(mean_adv));
  CHECK(at_one.loss == doctest::Approx(-mean_adv));
  CHECK(at_one.clip_fraction == 0.0);

  // Ratio far above 1 + eps with positive advantage: clipped, zero gradient.
  auto hi = f;
  for (std::size_t b = 0; b < 4; ++b) {
    hi.old_log_probs[b] -= 1.0;
    hi.advantages[b] = 1.0;
  }
  auto clipped = policy_loss<double>(spec, params, hi.maps, hi.embeddings, hi.masks, hi.actions,
                                     hi.old_log_probs, hi.advantages, 0.2, 0.0);
  CHECK(clipped.surrogate == doctest::Approx(1.2));
  CHECK(clipped.clip_fraction == 1.0);
  CHECK(nn::grad_norm(clipped.grads) == 0.0);

  // Same ratio with negative advantage: the unclipped term is the minimum.
  for (auto& a : hi.advantages) a = -1.0;
  auto unclipped = policy_loss<double>(spec, params, hi.maps, hi.embeddings, hi.masks, hi.actions,
                                       hi.old_log_probs, hi.advantages, 0.2, 0.0);
  CHECK(unclipped.surrogate == doctest::Approx(-std::exp(1.0)));
  CHECK(nn::grad_norm(unclipped.grads) > 0.0);

  // Ratio below 1 - eps with negative advantage is clipped too.
  auto lo = f;
  for (std::size_t b = 0; b < 4; ++b) {
    lo.old_log_probs[b] += 1.0;
    lo.advantages[b] = -1.0;
  }
  auto low = policy_loss<double>(spec, params, lo.maps, lo.embeddings, lo.masks, lo.actions,
                                 lo.old_log_probs, lo.advantages, 0.2, 0.0);
  CHECK(low.surrogate == doctest::Approx(-0.8));
  CHECK(nn::grad_norm(low.grads) == 0.0);
}

TEST_CASE("a bandit policy converges to the best arm") {
  auto c = testing::tiny_policy_config();
  const auto spec = actor_spec(c);
  Rng rng(9);
  auto params = nn::init_params(spec, rng, 0.01);
  auto opt = nn::make_adam(params, 1e-2);
  const std::size_t batch = 64, k = static_cast<std::size_t>(c.n_actions);
  const auto n = static_cast<std::size_t>(c.window);
  nn::Tensor maps({batch, static_cast<std::size_t>(c.n_maps), n, n});
  maps.fill(0.5f);
  nn::Tensor emb({batch, static_cast<std::size_t>(c.embedding_size)});
  emb.fill(0.25f);
  std::vector<std::uint8_t> masks(batch * k, 1);
  const int best = 3;
  double p_best = 0;
  int update = 0;
  for (; update < 200; ++update) {
    const auto probs = nn::forward(spec, params, maps, &emb, {.keep_cache = false}).output;
    p_best = probs[best];
    if (p_best > 0.99) break;
    std::vector<int> actions(batch);
    std::vector<double> logp(batch), rewards(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      actions[b] =
          static_cast<int>(nn::categorical_sample(std::span(probs.data() + b * k, k), rng));
      logp[b] = std::log(static_cast<double>(probs[b * k + static_cast<std::size_t>(actions[b])]));
      rewards[b] = actions[b] == best ? 1.0 : 0.0;
    }
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / batch;
    for (auto& r : rewards) r -= mean;
    for (int epoch = 0; epoch < 4; ++epoch) {
      auto l = policy_loss<float>(spec, params, maps, emb, masks, actions, logp, rewards, 0.2, 0.0);
      nn::adam_step(params, l.grads, opt);
    }
  }
  INFO("updates ", update, " p_best ", p_best);
  CHECK(p_best > 0.99);
}

TEST_CASE("uniform logits sample every action uniformly") {
  std::vector<float> probs(env::kNumActions);
  std::vector<float> logits(env::kNumActions, 0.0f);
  std::vector<std::uint8_t> mask(env::kNumActions, 1);
  masked_softmax<float>(logits, mask, probs);
  Rng rng(17);
  const int n = 55000;
  std::vector<int> counts(env::kNumActions, 0);
  for (int i = 0; i < n; ++i) ++counts[nn::categorical_sample(probs, rng)];
  const double p = 1.0 / env::kNumActions, sd = std::sqrt(n * p * (1 - p));
  for (int k : counts) CHECK(std::abs(k - n * p) < 3 * sd);
}

TEST_CASE("rollout buffers have the documented layout") {
  const auto s = tiny_setup();
  Rng rng(2);
  auto model = make_actor_critic(s.policy, rng);
  RolloutCollector col(s.env, s.obs, s.encoder, 3, 5);
  const auto buf = col.collect(model, 30);
  CHECK(buf.size() == 30 * 3 * 2);
  CHECK(buf.actions.size() == buf.size());
  CHECK(buf.rewards.size() == 30 * 3);
  CHECK(buf.bootstrap.size() == 3 * 2);
  CHECK(buf.maps.size() == buf.size() * 9 * 25);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    REQUIRE(buf.masks[i * 11 + static_cast<std::size_t>(buf.actions[i])] == 1);
    REQUIRE(std::isfinite(buf.log_probs[i]));
    REQUIRE(buf.log_probs[i] <= 0.0f);
  }
  // max_steps 20 over 30 steps forces at least one finished episode per env.
  int dones = 0;
  for (auto d : buf.dones) dones += d;
  CHECK(dones >= 3);
  CHECK(col.finished().size() == static_cast<std::size_t>(dones));
  for (const auto& e : col.finished()) CHECK(e.length <= 20);

  const auto adv = buffer_advantages(buf, 0.99, 0.95);
  CHECK(adv.advantages.size() == buf.size());
  Rng again(2);
  auto model2 = make_actor_critic(s.policy, again);
  RolloutCollector col2(s.env, s.obs, s.encoder, 3, 5);
  const auto buf2 = col2.collect(model2, 30);
  CHECK(buf2.actions == buf.actions);
  CHECK(buf2.rewards == buf.rewards);
  CHECK(buf2.maps == buf.maps);
}

TEST_CASE("per-agent GAE sequences stay separate") {
  RolloutBuffer b;
  b.steps = 2;
  b.n_envs = 1;
  b.n_agents = 2;
  b.values = {1, 10, 2, 20};
  b.rewards = {1, 1};
  b.dones = {0, 0};
  b.bootstrap = {3, 30};
  const auto a = buffer_advantages(b, 1.0, 1.0);
  CHECK(a.advantages[b.index(0, 0, 0)] == doctest::Approx(1 + 1 + 3 - 1));
  CHECK(a.advantages[b.index(0, 0, 1)] == doctest::Approx(1 + 1 + 30 - 10));
  CHECK(a.advantages[b.index(1, 0, 1)] == doctest::Approx(1 + 30 - 20));
}

TEST_CASE("a PPO update is deterministic and finite") {
  const auto s = tiny_setup();
  auto run = [&] {
    Rng rng(3);
    auto model = make_actor_critic(s.policy, rng);
    RolloutCollector col(s.env, s.obs, s.encoder, 2, 8);
    const auto buf = col.collect(model, 32);
    PpoConfig pc;
    pc.epochs = 3;
    auto optim = make_optimizers(model, pc.learning_rate);
    Rng shuffle(4);
    const auto stats =
        ppo_update(model, optim, buf, buffer_advantages(buf, pc.gamma, pc.lambda), pc, shuffle);
    return std::make_pair(model, stats);
  };
  const auto [m1, s1] = run();
  const auto [m2, s2] = run();
  CHECK(m1.actor == m2.actor);
  CHECK(m1.critic == m2.critic);
  CHECK(s1.loss_vf == s2.loss_vf);
  CHECK(std::isfinite(s1.loss_clip));
  CHECK(s1.entropy > 0.0);
  CHECK(s1.actor_grad_norm > 0.0);
}

TEST_CASE("training runs end to end with eval rows") {
  const auto s = tiny_setup();
  TrainConfig tc;
  tc.horizon = 64;
  tc.total_steps = 128;
  tc.eval_every = 64;
  tc.eval_steps = 40;
  tc.n_envs = 2;
  tc.ppo.epochs = 2;
  tc.seed = 11;
  const auto r = train(s.env, s.obs, s.policy, tc, s.encoder, {});
  CHECK_FALSE(r.error);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].step == 0);
  CHECK_FALSE(r.rows[0].update);
  CHECK(r.rows[2].step == 128);
  CHECK(r.rows[2].update);
  CHECK(metrics_csv_header().rfind("step,", 0) == 0);
  const auto line0 = metrics_csv_line(r.rows[0]);
  CHECK(line0.substr(line0.size() - 3) == ",,,");
  tc.horizon = 63;
  CHECK_THROWS_AS(train(s.env, s.obs, s.policy, tc, s.encoder, {}), ConfigError);
}

TEST_CASE("evaluation counts scenarios and seeds episodes") {
  const auto s = tiny_setup();
  Rng rng(6);
  auto model = make_actor_critic(s.policy, rng);
  env::SearchEnvironment env(s.env, s.obs, s.encoder);
  const auto m = evaluate_policy(model, env, 60, 7);
  int n = 0;
  for (const auto& sc : m.scenarios) n += sc.episodes;
  CHECK(n == m.episodes);
  for (const auto& r : m.records) CHECK((r.length >= 1 && r.length <= 20));
  env::SearchEnvironment env2(s.env, s.obs, s.encoder);
  const auto m2 = evaluate_policy(model, env2, 60, 7);
  CHECK(m2.reward_mean == m.reward_mean);
  CHECK(eval_episode_seed(7, 0) != eval_episode_seed(7, 1));
}
