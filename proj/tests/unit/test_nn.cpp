#include <doctest.h>

#include <cmath>

#include "radloc/common/error.hpp"
#include "radloc/nn/adam.hpp"
#include "radloc/nn/network.hpp"
#include "radloc/nn/sampling.hpp"
#include "support/gradcheck.hpp"

using namespace radloc;
using namespace radloc::nn;

TEST_CASE("every layer kind passes 64-bit finite-difference checks") {
  auto rng = make_rng(11, Stream::init);
  for (auto kind : testing::kAllLayerKinds) {
    for (int i = 0; i < 20; ++i) {
      const auto spec = testing::random_layer_spec(kind, rng);
      const auto r = testing::check_network_gradients(spec, rng);
      INFO(to_string(kind), " config ", i);
      CHECK(r.worst() < 1e-4);
    }
  }
}

TEST_CASE("a conv-pool-concat-dense stack passes end-to-end gradient checks") {
  auto rng = make_rng(12, Stream::init);
  NetworkSpec s;
  s.input_shape = {2, 5, 5};
  s.aux_size = 3;
  s.layers = {conv2d("c1", 2, 3, 3, 1, 1),
              relu(),
              maxpool2d(2),
              conv2d("c2", 3, 2, 3, 1, 1),
              relu(),
              concat(8, 3),
              dense("f1", 11, 6),
              relu(),
              dense("f2", 6, 4),
              softmax()};
  CHECK(testing::check_network_gradients(s, rng, 3).worst() < 1e-4);
}

TEST_CASE("tensor shape contracts") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK_THROWS_AS(Tensor({2, 0}), ConfigError);
  CHECK_THROWS_AS(t.reshape({4, 2}), ConfigError);
  t.reshape({3, 2});
  CHECK(t.dim(0) == 3);
  CHECK(Tensor().empty());
}

TEST_CASE("forward rejects mismatched inputs and backward rejects stale caches") {
  NetworkSpec s;
  s.input_shape = {4};
  s.layers = {dense("a", 4, 3)};
  NetworkSpec other = s;
  other.layers = {dense("a", 4, 3), relu()};
  const auto p = make_params<float>(s);
  CHECK_THROWS_AS(forward(s, p, Tensor({2, 5})), ConfigError);
  auto f = forward(s, p, Tensor({2, 4}));
  CHECK_THROWS_AS(backward(other, p, f.cache, Tensor({2, 3})), InternalError);
  auto nocache = forward(s, p, Tensor({2, 4}), kNoAux, {.keep_cache = false});
  CHECK_THROWS_AS(backward(s, p, nocache.cache, Tensor({2, 3})), InternalError);
}

TEST_CASE("split_spec composes back to the full network") {
  auto rng = make_rng(3, Stream::init);
  NetworkSpec s;
  s.input_shape = {1, 4, 4};
  s.aux_size = 2;
  s.layers = {conv2d("c", 1, 2, 3, 1, 1), relu(),   concat(32, 2), dense("f1", 34, 5), relu(),
              dense("f2", 5, 3),          softmax()};
  const auto params = init_params(s, rng);
  const auto split = split_spec(s, 5);
  CHECK(split.trunk.aux_size == 2);
  CHECK(split.head.aux_size == 0);
  const auto k = param_blocks_before(s, 5);
  CHECK(k == 2);
  NetworkParams<float> trunk(params.begin(), params.begin() + k),
      head(params.begin() + k, params.end());
  Tensor x({2, 1, 4, 4}), aux({2, 2});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(std::sin(i * 0.7));
  aux[0] = 0.3f;
  aux[3] = -0.2f;
  const auto full = forward(s, params, x, &aux).output;
  const auto feat = forward(split.trunk, trunk, x, &aux).output;
  const auto out = forward(split.head, head, feat, kNoAux).output;
  CHECK(full == out);
}

TEST_CASE("Adam first step moves each weight by lr * g / (|g| + eps)") {
  NetworkSpec s;
  s.input_shape = {3};
  s.layers = {dense("a", 3, 2)};
  auto p = make_params<double>(s);
  auto g = make_params<double>(s);
  for (std::size_t i = 0; i < 6; ++i) {
    p[0].weight[i] = 0.1 * static_cast<double>(i);
    g[0].weight[i] = (i % 2 ? -1.0 : 1.0) * 0.01 * static_cast<double>(i + 1);
  }
  g[0].bias[1] = 5.0;
  auto before = p;
  auto st = make_adam(p, 1e-3);
  adam_step(p, g, st);
  for (std::size_t i = 0; i < 6; ++i) {
    const double gi = g[0].weight[i];
    CHECK(p[0].weight[i] ==
          doctest::Approx(before[0].weight[i] - 1e-3 * gi / (std::abs(gi) + 1e-8)).epsilon(1e-12));
  }
  CHECK(p[0].bias[0] == 0.0);
  CHECK(p[0].bias[1] == doctest::Approx(-1e-3).epsilon(1e-9));
}

TEST_CASE("Adam matches the textbook recurrences over several steps") {
  NetworkSpec s;
  s.input_shape = {2};
  s.layers = {dense("a", 2, 1)};
  auto p = make_params<double>(s);
  auto st = make_adam(p, 0.01);
  double theta = 0, m = 0, v = 0;
  for (int t = 1; t <= 5; ++t) {
    auto g = make_params<double>(s);
    const double gt = std::sin(t) + 0.5;
    g[0].weight[0] = gt;
    adam_step(p, g, st);
    m = 0.9 * m + 0.1 * gt;
    v = 0.999 * v + 0.001 * gt * gt;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    theta -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p[0].weight[0] == doctest::Approx(theta).epsilon(1e-9));
  }
}

TEST_CASE("Adam freezes untrainable blocks and rejects non-finite gradients") {
  NetworkSpec s;
  s.input_shape = {2};
  s.layers = {dense("a", 2, 2), dense("b", 2, 1)};
  auto p = make_params<float>(s);
  auto g = make_params<float>(s);
  g[0].weight.fill(1.0f);
  g[1].weight.fill(1.0f);
  auto st = make_adam(p, 0.1);
  adam_step(p, g, st, {false, true});
  CHECK(p[0].weight[0] == 0.0f);
  CHECK(p[1].weight[0] != 0.0f);
  g[1].weight[0] = std::nanf("");
  const auto keep = p;
  CHECK_THROWS_AS(adam_step(p, g, st), TrainingError);
  CHECK(p == keep);
}

TEST_CASE("gradient-norm clipping") {
  NetworkSpec s;
  s.input_shape = {2};
  s.layers = {dense("a", 2, 1)};
  auto g = make_params<double>(s);
  g[0].weight[0] = 3;
  g[0].weight[1] = 4;
  CHECK(clip_grad_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(grad_norm(g) == doctest::Approx(1.0));
  CHECK(g[0].weight[0] == doctest::Approx(0.6));
}

TEST_CASE("categorical sampling frequencies lie within 3 sigma") {
  const std::vector<float> probs{0.1f, 0.2f, 0.3f, 0.4f};
  auto rng = make_rng(5, Stream::rollout);
  const int n = 100000;
  std::vector<int> counts(4);
  for (int i = 0; i < n; ++i) ++counts[categorical_sample(probs, rng)];
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = probs[k], sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(counts[k] - n * p) < 3 * sigma);
  }
  const std::vector<float> zero(3, 0.0f), bad{0.5f, 0.6f};
  CHECK_THROWS_AS(categorical_sample(zero, rng), ConfigError);
  CHECK_THROWS_AS(categorical_sample(bad, rng), ConfigError);
  const std::vector<float> tie{0.4f, 0.4f, 0.2f};
  CHECK(greedy_argmax(tie) == 0);
}

TEST_CASE("param_count and flops_estimate") {
  NetworkSpec s;
  s.input_shape = {1, 4, 4};
  s.layers = {conv2d("c", 1, 2, 3, 1, 0), relu(), dense("f", 8, 3)};
  CHECK(param_count(s) == (2 * 9 + 2) + (3 * 8 + 3));
  CHECK(flops_estimate(s) == 2 * (2 * 2 * 2 * 9) + 2 * 24);
}

TEST_CASE("forward and backward repeat bit-exactly") {
  auto rng = make_rng(13, Stream::init);
  for (auto kind : testing::kAllLayerKinds) {
    for (int i = 0; i < 5; ++i) {
      const auto spec = testing::random_layer_spec(kind, rng);
      auto params = init_params(spec, rng);
      Shape in_shape{3};
      in_shape.insert(in_shape.end(), spec.input_shape.begin(), spec.input_shape.end());
      Tensor input(in_shape), aux;
      for (auto& v : input.values()) v = static_cast<float>(uniform01(rng));
      if (spec.aux_size > 0) {
        aux = Tensor({3, spec.aux_size});
        for (auto& v : aux.values()) v = static_cast<float>(uniform01(rng));
      }
      const Tensor* aux_ptr = spec.aux_size > 0 ? &aux : nullptr;
      auto run = [&] {
        auto f = forward(spec, params, input, aux_ptr);
        Tensor up(f.output.shape());
        up.fill(0.5f);
        auto b = backward(spec, params, f.cache, up);
        return std::make_pair(f.output, b.grads);
      };
      const auto a = run();
      const auto b = run();
      INFO(to_string(kind));
      CHECK(a.first == b.first);
      CHECK(a.second == b.second);
    }
  }
}
