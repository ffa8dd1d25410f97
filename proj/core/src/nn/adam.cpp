#include "radloc/nn/adam.hpp"

#include <cmath>
#include <string>

#include "radloc/common/error.hpp"

namespace radloc::nn {

namespace {

template <typename Scalar>
void update(BasicTensor<Scalar>& p, const BasicTensor<Scalar>& g, BasicTensor<Scalar>& m,
            BasicTensor<Scalar>& v, double lr_t, double b1, double b2, double eps_t) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = g[i];
    const double mi = b1 * m[i] + (1.0 - b1) * gi;
    const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
    m[i] = static_cast<Scalar>(mi);
    v[i] = static_cast<Scalar>(vi);
    p[i] = static_cast<Scalar>(p[i] - lr_t * mi / (std::sqrt(vi) + eps_t));
  }
}

}  // namespace

template <typename Scalar>
void adam_step(NetworkParams<Scalar>& params, const NetworkParams<Scalar>& grads,
               AdamState<Scalar>& state, const std::vector<bool>& trainable) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw ConfigError("adam_step: gradient/moment block count does not match parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].weight.shape() != params[k].weight.shape() ||
        grads[k].bias.shape() != params[k].bias.shape()) {
      throw ConfigError("adam_step: gradient shape mismatch in block '" + params[k].name + "'");
    }
  }
  if (!all_finite(grads)) {
    for (const auto& g : grads) {
      for (auto v : g.weight.values()) {
        if (!std::isfinite(v)) throw TrainingError("non-finite gradient in '" + g.name + ".w'");
      }
      for (auto v : g.bias.values()) {
        if (!std::isfinite(v)) throw TrainingError("non-finite gradient in '" + g.name + ".b'");
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  // Folded bias correction: lr * mhat / (sqrt(vhat) + eps).
  const double lr_t = state.learning_rate * std::sqrt(bc2) / bc1;
  const double eps_t = state.epsilon * std::sqrt(bc2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!trainable.empty() && !trainable.at(k)) continue;
    update(params[k].weight, grads[k].weight, state.first_moment[k].weight,
           state.second_moment[k].weight, lr_t, state.beta1, state.beta2, eps_t);
    update(params[k].bias, grads[k].bias, state.first_moment[k].bias, state.second_moment[k].bias,
           lr_t, state.beta1, state.beta2, eps_t);
  }
}

template <typename Scalar>
double grad_norm(const NetworkParams<Scalar>& grads) {
  double sq = 0;
  for (const auto& g : grads) {
    for (auto v : g.weight.values()) sq += static_cast<double>(v) * v;
    for (auto v : g.bias.values()) sq += static_cast<double>(v) * v;
  }
  return std::sqrt(sq);
}

template <typename Scalar>
double clip_grad_norm(NetworkParams<Scalar>& grads, double max_norm) {
  const double norm = grad_norm(grads);
  if (max_norm > 0 && norm > max_norm && std::isfinite(norm)) {
    const auto scale = static_cast<Scalar>(max_norm / (norm + 1e-6));
    for (auto& g : grads) {
      for (auto& v : g.weight.values()) v *= scale;
      for (auto& v : g.bias.values()) v *= scale;
    }
  }
  return norm;
}

template void adam_step(NetworkParams<float>&, const NetworkParams<float>&, AdamState<float>&,
                        const std::vector<bool>&);
template void adam_step(NetworkParams<double>&, const NetworkParams<double>&, AdamState<double>&,
                        const std::vector<bool>&);
template double grad_norm(const NetworkParams<float>&);
template double grad_norm(const NetworkParams<double>&);
template double clip_grad_norm(NetworkParams<float>&, double);
template double clip_grad_norm(NetworkParams<double>&, double);

}  // namespace radloc::nn
