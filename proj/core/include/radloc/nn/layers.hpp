#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "radloc/nn/tensor.hpp"

namespace radloc::nn {

enum class LayerKind {
  conv2d,
  maxpool2d,
  dense,
  relu,
  sigmoid,
  softmax,
  reshape,
  upsample,
  concat,
};

std::string to_string(LayerKind kind);

// One layer of a feed-forward network. Only the fields relevant to `kind`
// are meaningful; the factory functions below fill them consistently.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;

  // conv2d / maxpool2d
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  // dense; concat uses in_features for the trunk width and out_features for
  // trunk + auxiliary width
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  // reshape / upsample: per-sample output shape
  Shape target_shape;

  bool has_params() const { return kind == LayerKind::conv2d || kind == LayerKind::dense; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

LayerSpec conv2d(std::string name, std::size_t in_channels, std::size_t out_channels,
                 std::size_t kernel, std::size_t stride = 1, std::size_t padding = 0);
LayerSpec maxpool2d(std::size_t kernel, std::size_t stride = 0);
LayerSpec dense(std::string name, std::size_t in_features, std::size_t out_features);
LayerSpec relu();
LayerSpec sigmoid();
LayerSpec softmax();
LayerSpec reshape(Shape target);
LayerSpec upsample(std::size_t channels, std::size_t height, std::size_t width);
LayerSpec concat(std::size_t trunk_features, std::size_t aux_features);

// A network is a per-sample input shape, an optional auxiliary vector that is
// injected at the (single) concat layer, and an ordered layer list.
struct NetworkSpec {
  Shape input_shape;
  std::size_t aux_size = 0;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Per-sample shapes: result[i] is the input shape of layer i, result.back()
// the output shape of the final layer. Throws ConfigError when consecutive
// layers do not compose.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

void validate(const NetworkSpec& spec);

// Shapes of (weight, bias) for a parametric layer.
Shape weight_shape(const LayerSpec& layer);
Shape bias_shape(const LayerSpec& layer);

std::size_t param_count(const NetworkSpec& spec);

// Floating-point operations of one forward pass, counted as 2 * MACs over
// conv and dense layers.
std::uint64_t flops_estimate(const NetworkSpec& spec);

// Stable hash of the layer list; caches remember it to detect mismatches.
std::uint64_t fingerprint(const NetworkSpec& spec);

}  // namespace radloc::nn
