#pragma once

#include <cstdint>
#include <vector>

#include "radloc/nn/network.hpp"

namespace radloc::nn {

template <typename Scalar>
struct AdamState {
  NetworkParams<Scalar> first_moment;
  NetworkParams<Scalar> second_moment;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
AdamState<Scalar> make_adam(const NetworkParams<Scalar>& params, double learning_rate) {
  AdamState<Scalar> st;
  st.first_moment = zeros_like(params);
  st.second_moment = zeros_like(params);
  st.learning_rate = learning_rate;
  return st;
}

// One bias-corrected Adam update. `trainable`, when non-empty, selects the
// parameter blocks that may change; the others keep their values and
// moments. Throws TrainingError on a non-finite gradient before touching
// any state.
template <typename Scalar>
void adam_step(NetworkParams<Scalar>& params, const NetworkParams<Scalar>& grads,
               AdamState<Scalar>& state, const std::vector<bool>& trainable = {});

// Scales grads in place so their global L2 norm is at most max_norm and
// returns the norm before scaling.
template <typename Scalar>
double clip_grad_norm(NetworkParams<Scalar>& grads, double max_norm);

template <typename Scalar>
double grad_norm(const NetworkParams<Scalar>& grads);

}  // namespace radloc::nn
