#include "radloc/nn/layers.hpp"

#include "radloc/common/error.hpp"
#include "radloc/common/rng.hpp"

namespace radloc::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d:
      return "conv2d";
    case LayerKind::maxpool2d:
      return "maxpool2d";
    case LayerKind::dense:
      return "dense";
    case LayerKind::relu:
      return "relu";
    case LayerKind::sigmoid:
      return "sigmoid";
    case LayerKind::softmax:
      return "softmax";
    case LayerKind::reshape:
      return "reshape";
    case LayerKind::upsample:
      return "upsample";
    case LayerKind::concat:
      return "concat";
  }
  return "unknown";
}

LayerSpec conv2d(std::string name, std::size_t in_channels, std::size_t out_channels,
                 std::size_t kernel, std::size_t stride, std::size_t padding) {
  LayerSpec l;
  l.kind = LayerKind::conv2d;
  l.name = std::move(name);
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.kernel_h = l.kernel_w = kernel;
  l.stride = stride;
  l.padding = padding;
  return l;
}

LayerSpec maxpool2d(std::size_t kernel, std::size_t stride) {
  LayerSpec l;
  l.kind = LayerKind::maxpool2d;
  l.kernel_h = l.kernel_w = kernel;
  l.stride = stride == 0 ? kernel : stride;
  return l;
}

LayerSpec dense(std::string name, std::size_t in_features, std::size_t out_features) {
  LayerSpec l;
  l.kind = LayerKind::dense;
  l.name = std::move(name);
  l.in_features = in_features;
  l.out_features = out_features;
  return l;
}

LayerSpec relu() {
  LayerSpec l;
  l.kind = LayerKind::relu;
  return l;
}
LayerSpec sigmoid() {
  LayerSpec l;
  l.kind = LayerKind::sigmoid;
  return l;
}
LayerSpec softmax() {
  LayerSpec l;
  l.kind = LayerKind::softmax;
  return l;
}

LayerSpec reshape(Shape target) {
  LayerSpec l;
  l.kind = LayerKind::reshape;
  l.target_shape = std::move(target);
  return l;
}

LayerSpec upsample(std::size_t channels, std::size_t height, std::size_t width) {
  LayerSpec l;
  l.kind = LayerKind::upsample;
  l.target_shape = {channels, height, width};
  return l;
}

LayerSpec concat(std::size_t trunk_features, std::size_t aux_features) {
  LayerSpec l;
  l.kind = LayerKind::concat;
  l.name = "concat";
  l.in_features = trunk_features;
  l.out_features = trunk_features + aux_features;
  return l;
}

namespace {

[[noreturn]] void mismatch(std::size_t index, const LayerSpec& layer, const Shape& in,
                           const std::string& why) {
  throw ConfigError("layer " + std::to_string(index) + " (" + to_string(layer.kind) +
                    (layer.name.empty() ? "" : " '" + layer.name + "'") + ") input " +
                    shape_to_string(in) + ": " + why);
}

}  // namespace

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
  if (spec.input_shape.empty() || shape_size(spec.input_shape) == 0) {
    throw ConfigError("network input shape must be non-empty");
  }
  std::vector<Shape> shapes{spec.input_shape};
  std::size_t concat_points = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const Shape& in = shapes.back();
    Shape out;
    switch (l.kind) {
      case LayerKind::conv2d: {
        if (in.size() != 3) mismatch(i, l, in, "conv2d needs [C,H,W]");
        if (in[0] != l.in_channels) mismatch(i, l, in, "channel count mismatch");
        if (l.stride == 0 || l.kernel_h == 0 || l.kernel_w == 0 || l.out_channels == 0) {
          mismatch(i, l, in, "zero kernel, stride or channels");
        }
        if (in[1] + 2 * l.padding < l.kernel_h || in[2] + 2 * l.padding < l.kernel_w) {
          mismatch(i, l, in, "kernel larger than padded input");
        }
        out = {l.out_channels, (in[1] + 2 * l.padding - l.kernel_h) / l.stride + 1,
               (in[2] + 2 * l.padding - l.kernel_w) / l.stride + 1};
        break;
      }
      case LayerKind::maxpool2d: {
        if (in.size() != 3) mismatch(i, l, in, "maxpool2d needs [C,H,W]");
        if (l.stride == 0 || l.kernel_h == 0) mismatch(i, l, in, "zero kernel or stride");
        if (in[1] < l.kernel_h || in[2] < l.kernel_w)
          mismatch(i, l, in, "window larger than input");
        out = {in[0], (in[1] - l.kernel_h) / l.stride + 1, (in[2] - l.kernel_w) / l.stride + 1};
        break;
      }
      case LayerKind::dense:
        if (shape_size(in) != l.in_features) mismatch(i, l, in, "in_features mismatch");
        if (l.out_features == 0) mismatch(i, l, in, "zero out_features");
        out = {l.out_features};
        break;
      case LayerKind::relu:
      case LayerKind::sigmoid:
      case LayerKind::softmax:
        out = in;
        break;
      case LayerKind::reshape:
        if (shape_size(l.target_shape) != shape_size(in))
          mismatch(i, l, in, "reshape size mismatch");
        out = l.target_shape;
        break;
      case LayerKind::upsample:
        if (in.size() != 3 || l.target_shape.size() != 3 || in[0] != l.target_shape[0]) {
          mismatch(i, l, in, "upsample needs [C,H,W] with equal channels");
        }
        if (l.target_shape[1] < in[1] || l.target_shape[2] < in[2]) {
          mismatch(i, l, in, "upsample target smaller than input");
        }
        out = l.target_shape;
        break;
      case LayerKind::concat:
        ++concat_points;
        if (shape_size(in) != l.in_features) mismatch(i, l, in, "concat trunk width mismatch");
        if (l.out_features - l.in_features != spec.aux_size) {
          mismatch(i, l, in, "concat aux width does not match network aux_size");
        }
        out = {l.out_features};
        break;
    }
    shapes.push_back(std::move(out));
  }
  if (spec.aux_size > 0 && concat_points != 1) {
    throw ConfigError("network with an auxiliary input needs exactly one concat layer");
  }
  if (spec.aux_size == 0 && concat_points != 0) {
    throw ConfigError("concat layer present but network aux_size is 0");
  }
  return shapes;
}

void validate(const NetworkSpec& spec) { (void)infer_shapes(spec); }

Shape weight_shape(const LayerSpec& l) {
  if (l.kind == LayerKind::conv2d) return {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w};
  if (l.kind == LayerKind::dense) return {l.out_features, l.in_features};
  throw InternalError("layer kind " + to_string(l.kind) + " has no weights");
}

Shape bias_shape(const LayerSpec& l) {
  if (l.kind == LayerKind::conv2d) return {l.out_channels};
  if (l.kind == LayerKind::dense) return {l.out_features};
  throw InternalError("layer kind " + to_string(l.kind) + " has no bias");
}

std::size_t param_count(const NetworkSpec& spec) {
  validate(spec);
  std::size_t n = 0;
  for (const auto& l : spec.layers) {
    if (l.has_params()) n += shape_size(weight_shape(l)) + shape_size(bias_shape(l));
  }
  return n;
}

std::uint64_t flops_estimate(const NetworkSpec& spec) {
  const auto shapes = infer_shapes(spec);
  std::uint64_t flops = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const auto& out = shapes[i + 1];
    if (l.kind == LayerKind::conv2d) {
      const std::uint64_t macs =
          static_cast<std::uint64_t>(shape_size(out)) * l.in_channels * l.kernel_h * l.kernel_w;
      flops += 2 * macs;
    } else if (l.kind == LayerKind::dense) {
      flops += 2ULL * l.in_features * l.out_features;
    }
  }
  return flops;
}

std::uint64_t fingerprint(const NetworkSpec& spec) {
  std::uint64_t h = splitmix64(spec.aux_size);
  auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  for (auto d : spec.input_shape) mix(d);
  for (const auto& l : spec.layers) {
    mix(static_cast<std::uint64_t>(l.kind));
    for (auto v : {l.in_channels, l.out_channels, l.kernel_h, l.kernel_w, l.stride, l.padding,
                   l.in_features, l.out_features}) {
      mix(v);
    }
    for (auto d : l.target_shape) mix(d);
  }
  return h;
}

}  // namespace radloc::nn
