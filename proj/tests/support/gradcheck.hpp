#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/nn/network.hpp"

namespace radloc::testing {

inline void fill_uniform(std::vector<double>& v, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& x : v) x = lo + (hi - lo) * uniform01(rng);
}

inline nn::Tensor64 random_tensor(const nn::Shape& shape, Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  nn::Tensor64 t(shape);
  fill_uniform(t.storage(), rng, lo, hi);
  return t;
}

// ||a - b|| / max(||a|| + ||b||, floor): scale-free and tolerant of
// all-zero gradients.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor = 1e-10) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), floor);
}

// Central differences of a scalar function over every entry of `x`.
inline std::vector<double> numeric_gradient(std::vector<double>& x,
                                            const std::function<double()>& f, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

struct GradCheck {
  double params = 0.0;
  double input = 0.0;
  double aux = 0.0;
  double worst() const { return std::max({params, input, aux}); }
};

// Checks d/d(params, input, aux) of sum(upstream * forward(...)).
inline GradCheck check_network_gradients(const nn::NetworkSpec& spec, Rng& rng,
                                         std::size_t batch = 2) {
  auto params = nn::make_params<double>(spec);
  for (auto& p : params) {
    fill_uniform(p.weight.storage(), rng, -0.5, 0.5);
    fill_uniform(p.bias.storage(), rng, -0.5, 0.5);
  }
  nn::Shape in_shape{batch};
  in_shape.insert(in_shape.end(), spec.input_shape.begin(), spec.input_shape.end());
  auto input = random_tensor(in_shape, rng);
  nn::Tensor64 aux;
  if (spec.aux_size > 0) aux = random_tensor({batch, spec.aux_size}, rng);
  const nn::Tensor64* aux_ptr = spec.aux_size > 0 ? &aux : nullptr;

  auto fwd = nn::forward(spec, params, input, aux_ptr);
  auto upstream = random_tensor(fwd.output.shape(), rng);
  const auto analytic = nn::backward(spec, params, fwd.cache, upstream);

  auto loss = [&]() {
    const auto out = nn::forward(spec, params, input, aux_ptr, {.keep_cache = false}).output;
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * upstream[i];
    return s;
  };

  GradCheck r;
  std::vector<double> a, n;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto gw = numeric_gradient(params[k].weight.storage(), loss);
    auto gb = numeric_gradient(params[k].bias.storage(), loss);
    a.insert(a.end(), analytic.grads[k].weight.storage().begin(),
             analytic.grads[k].weight.storage().end());
    a.insert(a.end(), analytic.grads[k].bias.storage().begin(),
             analytic.grads[k].bias.storage().end());
    n.insert(n.end(), gw.begin(), gw.end());
    n.insert(n.end(), gb.begin(), gb.end());
  }
  if (!a.empty()) r.params = relative_error(a, n);
  r.input = relative_error(analytic.input_grad.storage(), numeric_gradient(input.storage(), loss));
  if (aux_ptr)
    r.aux = relative_error(analytic.aux_grad.storage(), numeric_gradient(aux.storage(), loss));
  return r;
}

// A small random network exercising one layer kind.
inline nn::NetworkSpec random_layer_spec(nn::LayerKind kind, Rng& rng) {
  auto pick = [&](int lo, int hi) { return static_cast<std::size_t>(uniform_int(rng, lo, hi)); };
  nn::NetworkSpec s;
  switch (kind) {
    case nn::LayerKind::conv2d: {
      const auto c = pick(1, 3), k = pick(1, 3), stride = pick(1, 2), pad = pick(0, 1);
      s.input_shape = {c, pick(static_cast<int>(k), 6), pick(static_cast<int>(k), 6)};
      s.layers = {nn::conv2d("conv", c, pick(1, 4), k, stride, pad)};
      break;
    }
    case nn::LayerKind::maxpool2d: {
      const auto k = pick(2, 3);
      s.input_shape = {pick(1, 3), pick(static_cast<int>(k), 7), pick(static_cast<int>(k), 7)};
      s.layers = {nn::maxpool2d(k, pick(1, static_cast<int>(k)))};
      break;
    }
    case nn::LayerKind::dense: {
      s.input_shape = uniform_int(rng, 0, 1) ? nn::Shape{pick(1, 8)} : nn::Shape{2, pick(1, 2), 2};
      s.layers = {nn::dense("fc", nn::shape_size(s.input_shape), pick(1, 6))};
      break;
    }
    case nn::LayerKind::relu:
      s.input_shape = {pick(2, 9)};
      s.layers = {nn::relu()};
      break;
    case nn::LayerKind::sigmoid:
      s.input_shape = {pick(2, 9)};
      s.layers = {nn::sigmoid()};
      break;
    case nn::LayerKind::softmax:
      s.input_shape = {pick(2, 11)};
      s.layers = {nn::softmax()};
      break;
    case nn::LayerKind::reshape: {
      const auto a = pick(1, 3), b = pick(1, 3), c = pick(1, 3);
      s.input_shape = {a, b, c};
      s.layers = {nn::reshape({a * b * c}), nn::dense("fc", a * b * c, 3)};
      break;
    }
    case nn::LayerKind::upsample: {
      const auto c = pick(1, 2), h = pick(1, 3), w = pick(1, 3);
      s.input_shape = {c, h, w};
      s.layers = {nn::upsample(c, h + pick(0, 4), w + pick(0, 4))};
      break;
    }
    case nn::LayerKind::concat: {
      const auto k = pick(1, 5);
      s.input_shape = {k};
      s.aux_size = pick(1, 4);
      s.layers = {nn::concat(k, s.aux_size), nn::dense("fc", k + s.aux_size, pick(1, 4))};
      break;
    }
  }
  nn::validate(s);
  return s;
}

inline constexpr nn::LayerKind kAllLayerKinds[] = {
    nn::LayerKind::conv2d,  nn::LayerKind::maxpool2d, nn::LayerKind::dense,
    nn::LayerKind::relu,    nn::LayerKind::sigmoid,   nn::LayerKind::softmax,
    nn::LayerKind::reshape, nn::LayerKind::upsample,  nn::LayerKind::concat};

}  // namespace radloc::testing
