#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/nn/layers.hpp"
#include "radloc/nn/tensor.hpp"

namespace radloc::nn {

// Weights and bias of one parametric layer (conv2d weight [Cout,Cin,kh,kw],
// dense weight [out,in]).
template <typename Scalar>
struct ParamBlock {
  std::string name;
  BasicTensor<Scalar> weight;
  BasicTensor<Scalar> bias;

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

// One block per parametric layer, in layer order.
template <typename Scalar>
using NetworkParams = std::vector<ParamBlock<Scalar>>;

template <typename Scalar>
std::size_t param_count(const NetworkParams<Scalar>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.weight.size() + p.bias.size();
  return n;
}

template <typename Scalar>
NetworkParams<Scalar> zeros_like(const NetworkParams<Scalar>& params) {
  NetworkParams<Scalar> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back(
        {p.name, BasicTensor<Scalar>(p.weight.shape()), BasicTensor<Scalar>(p.bias.shape())});
  }
  return out;
}

template <typename To, typename From>
NetworkParams<To> cast_params(const NetworkParams<From>& params) {
  NetworkParams<To> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back({p.name, p.weight.template cast<To>(), p.bias.template cast<To>()});
  }
  return out;
}

template <typename Scalar>
bool all_finite(const NetworkParams<Scalar>& params);

// Zero params in the layout `spec` expects.
template <typename Scalar>
NetworkParams<Scalar> make_params(const NetworkSpec& spec);

// He-uniform weights (limit sqrt(6 / fan_in)), zero biases. The last
// parametric layer's weights are multiplied by `final_layer_scale`.
NetworkParams<float> init_params(const NetworkSpec& spec, Rng& rng, double final_layer_scale = 1.0);

// Throws ConfigError unless params match spec block-for-block.
template <typename Scalar>
void check_params(const NetworkSpec& spec, const NetworkParams<Scalar>& params);

// Null auxiliary input for float networks without a concat point.
inline constexpr const Tensor* kNoAux = nullptr;

inline constexpr std::size_t kAllLayers = std::numeric_limits<std::size_t>::max();

struct ForwardOptions {
  // Run layers [0, layer_end).
  std::size_t layer_end = kAllLayers;
  bool keep_cache = true;
};

template <typename Scalar>
struct ForwardCache {
  std::uint64_t spec_id = 0;
  std::size_t batch = 0;
  std::size_t layer_end = 0;
  // inputs[i] is the batched input of layer i; output is the final result.
  std::vector<BasicTensor<Scalar>> inputs;
  std::vector<std::vector<std::uint32_t>> argmax;
  BasicTensor<Scalar> output;
  bool valid() const { return spec_id != 0; }
};

template <typename Scalar>
struct ForwardResult {
  BasicTensor<Scalar> output;
  ForwardCache<Scalar> cache;
};

template <typename Scalar>
struct BackwardResult {
  NetworkParams<Scalar> grads;
  BasicTensor<Scalar> input_grad;
  BasicTensor<Scalar> aux_grad;
};

// Batched forward pass: `input` is [B, input_shape...], `aux` is [B, aux_size]
// when the spec has a concat point and ignored otherwise.
template <typename Scalar>
ForwardResult<Scalar> forward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                              const BasicTensor<Scalar>& input,
                              const BasicTensor<Scalar>* aux = nullptr,
                              ForwardOptions options = {});

// Gradients of sum(upstream * output) with respect to params, input and aux.
template <typename Scalar>
BackwardResult<Scalar> backward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                                const ForwardCache<Scalar>& cache,
                                const BasicTensor<Scalar>& upstream);

// Split into layers [0, at) and [at, end). The head's input shape is the
// trunk's output shape; parametric blocks are divided accordingly.
struct SplitSpec {
  NetworkSpec trunk;
  NetworkSpec head;
};
SplitSpec split_spec(const NetworkSpec& spec, std::size_t at);

// Number of parametric layers among layers [0, layer).
std::size_t param_blocks_before(const NetworkSpec& spec, std::size_t layer);

extern template ForwardResult<float> forward(const NetworkSpec&, const NetworkParams<float>&,
                                             const Tensor&, const Tensor*, ForwardOptions);
extern template ForwardResult<double> forward(const NetworkSpec&, const NetworkParams<double>&,
                                              const Tensor64&, const Tensor64*, ForwardOptions);
extern template BackwardResult<float> backward(const NetworkSpec&, const NetworkParams<float>&,
                                               const ForwardCache<float>&, const Tensor&);
extern template BackwardResult<double> backward(const NetworkSpec&, const NetworkParams<double>&,
                                                const ForwardCache<double>&, const Tensor64&);

}  // namespace radloc::nn
