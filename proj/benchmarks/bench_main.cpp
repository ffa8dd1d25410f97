// Microbenchmarks for the hot paths of training and evaluation.

#include <benchmark/benchmark.h>

#include "radloc/cae/cae.hpp"
#include "radloc/env/game.hpp"
#include "radloc/env/layout.hpp"
#include "radloc/env/search_env.hpp"
#include "radloc/nn/network.hpp"
#include "radloc/ppo/policy.hpp"
#include "radloc/reward/distance_field.hpp"

using namespace radloc;

namespace {

ppo::ObsBatch random_batch(const ppo::PolicyConfig& c, std::size_t batch, Rng& rng) {
  const auto n = static_cast<std::size_t>(c.window);
  ppo::ObsBatch b{nn::Tensor({batch, static_cast<std::size_t>(c.n_maps), n, n}),
                  nn::Tensor({batch, static_cast<std::size_t>(c.embedding_size)})};
  for (auto& v : b.maps.values()) v = static_cast<float>(uniform01(rng));
  for (auto& v : b.embeddings.values()) v = static_cast<float>(uniform01(rng));
  return b;
}

void BM_ActorForward(benchmark::State& state) {
  Rng rng(1);
  const ppo::PolicyConfig c;
  const auto model = ppo::make_actor_critic(c, rng);
  const auto batch = random_batch(c, static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    auto out = nn::forward(model.actor_spec, model.actor, batch.maps, &batch.embeddings,
                           {.keep_cache = false});
    benchmark::DoNotOptimize(out.output.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorForward)->Arg(1)->Arg(64)->Arg(256);

void BM_ActorForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const ppo::PolicyConfig c;
  const auto model = ppo::make_actor_critic(c, rng);
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto batch = random_batch(c, b, rng);
  const nn::Tensor upstream({b, static_cast<std::size_t>(c.n_actions)}, 1.0f);
  for (auto _ : state) {
    const auto fwd = nn::forward(model.actor_spec, model.actor, batch.maps, &batch.embeddings);
    auto grads = nn::backward(model.actor_spec, model.actor, fwd.cache, upstream);
    benchmark::DoNotOptimize(grads.grads.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorForwardBackward)->Arg(64)->Arg(256);

void BM_GameStep(benchmark::State& state) {
  env::EnvConfig c;
  c.height = c.width = static_cast<int>(state.range(0));
  c.n_agents = 4;
  c.seed = 3;
  env::Game game(c);
  game.reset();
  const std::vector<env::Action> joint(4, env::Action::idle);
  for (auto _ : state) {
    if (game.state().done) game.reset();
    benchmark::DoNotOptimize(game.step(joint).reward);
  }
}
BENCHMARK(BM_GameStep)->Arg(20)->Arg(100);

void BM_SearchEnvironmentStep(benchmark::State& state) {
  env::EnvConfig c;
  c.height = c.width = 20;
  c.n_agents = 2;
  c.seed = 4;
  cae::CaeConfig cc;
  cc.height = cc.width = 20;
  Rng rng(4);
  const auto spec = cae::encoder_spec(cc);
  auto encoder = std::make_shared<cae::Encoder>(spec, nn::init_params(spec, rng));
  env::SearchEnvironment env(c, {}, encoder);
  env.reset();
  const std::vector<env::Action> joint(2, env::Action::idle);
  for (auto _ : state) {
    if (env.state().done) env.reset();
    benchmark::DoNotOptimize(env.step(joint).reward);
  }
}
BENCHMARK(BM_SearchEnvironmentStep);

void BM_DistanceField(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  env::LayoutConfig lc;
  Rng rng(5);
  const auto grid = env::generate_layout(size, size, 10.0, lc, rng);
  const auto target = grid.free_cells().front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reward::bfs_distance_field(grid, target).values().data());
  }
}
BENCHMARK(BM_DistanceField)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
