#include "radloc/nn/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "radloc/common/error.hpp"

namespace radloc::nn {

namespace {

template <typename S>
using MatR = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapR = Eigen::Map<MatR<S>>;
template <typename S>
using CMapR = Eigen::Map<const MatR<S>>;
template <typename S>
using CVec = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>;
template <typename S>
using Vec = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>;

Shape batched(std::size_t batch, const Shape& per_sample) {
  Shape s{batch};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  return s;
}

struct ConvGeom {
  std::size_t c, h, w, oh, ow, kh, kw, stride, pad;
  std::size_t patch() const { return c * kh * kw; }
  std::size_t positions() const { return oh * ow; }
};

ConvGeom conv_geom(const LayerSpec& l, const Shape& in, const Shape& out) {
  return {in[0], in[1], in[2], out[1], out[2], l.kernel_h, l.kernel_w, l.stride, l.padding};
}

// cols is [C*kh*kw, B*oh*ow]
template <typename S>
void im2col(const S* x, std::size_t batch, const ConvGeom& g, MatR<S>& cols) {
  const std::size_t P = g.positions();
  cols.setZero(g.patch(), batch * P);
  for (std::size_t b = 0; b < batch; ++b) {
    const S* xb = x + b * g.c * g.h * g.w;
    for (std::size_t c = 0; c < g.c; ++c) {
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          S* row = cols.data() + ((c * g.kh + ky) * g.kw + kx) * cols.cols() + b * P;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                            static_cast<std::ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
            const S* xrow = xb + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                              static_cast<std::ptrdiff_t>(g.pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
              row[oy * g.ow + ox] = xrow[ix];
            }
          }
        }
      }
    }
  }
}

template <typename S>
void col2im(const MatR<S>& cols, std::size_t batch, const ConvGeom& g, S* dx) {
  const std::size_t P = g.positions();
  for (std::size_t b = 0; b < batch; ++b) {
    S* xb = dx + b * g.c * g.h * g.w;
    for (std::size_t c = 0; c < g.c; ++c) {
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const S* row = cols.data() + ((c * g.kh + ky) * g.kw + kx) * cols.cols() + b * P;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                            static_cast<std::ptrdiff_t>(g.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
            S* xrow = xb + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                              static_cast<std::ptrdiff_t>(g.pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
              xrow[ix] += row[oy * g.ow + ox];
            }
          }
        }
      }
    }
  }
}

template <typename S>
BasicTensor<S> conv_forward(const LayerSpec& l, const ParamBlock<S>& p, const BasicTensor<S>& x,
                            std::size_t batch, const Shape& in, const Shape& out) {
  const auto g = conv_geom(l, in, out);
  MatR<S> cols;
  im2col(x.data(), batch, g, cols);
  CMapR<S> W(p.weight.data(), l.out_channels, g.patch());
  MatR<S> m = W * cols;
  BasicTensor<S> y(batched(batch, out));
  const std::size_t P = g.positions();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < l.out_channels; ++co) {
      const S bias = p.bias[co];
      const S* src = m.data() + co * m.cols() + b * P;
      S* dst = y.data() + (b * l.out_channels + co) * P;
      for (std::size_t i = 0; i < P; ++i) dst[i] = src[i] + bias;
    }
  }
  return y;
}

template <typename S>
BasicTensor<S> conv_backward(const LayerSpec& l, const ParamBlock<S>& p, const BasicTensor<S>& x,
                             const BasicTensor<S>& dy, std::size_t batch, const Shape& in,
                             const Shape& out, ParamBlock<S>& grad) {
  const auto g = conv_geom(l, in, out);
  const std::size_t P = g.positions();
  MatR<S> dm(l.out_channels, batch * P);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < l.out_channels; ++co) {
      const S* src = dy.data() + (b * l.out_channels + co) * P;
      std::copy(src, src + P, dm.data() + co * dm.cols() + b * P);
    }
  }
  MatR<S> cols;
  im2col(x.data(), batch, g, cols);
  MapR<S> dW(grad.weight.data(), l.out_channels, g.patch());
  dW.noalias() = dm * cols.transpose();
  // Plain loops keep the summation order independent of buffer alignment.
  for (std::size_t co = 0; co < l.out_channels; ++co) {
    const S* row = dm.data() + co * dm.cols();
    grad.bias[co] = std::accumulate(row, row + dm.cols(), S(0));
  }
  CMapR<S> W(p.weight.data(), l.out_channels, g.patch());
  MatR<S> dcols = W.transpose() * dm;
  BasicTensor<S> dx(x.shape());
  col2im(dcols, batch, g, dx.data());
  return dx;
}

template <typename S>
BasicTensor<S> dense_forward(const LayerSpec& l, const ParamBlock<S>& p, const BasicTensor<S>& x,
                             std::size_t batch) {
  CMapR<S> X(x.data(), batch, l.in_features);
  CMapR<S> W(p.weight.data(), l.out_features, l.in_features);
  BasicTensor<S> y({batch, l.out_features});
  MapR<S> Y(y.data(), batch, l.out_features);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += CVec<S>(p.bias.data(), l.out_features).transpose();
  return y;
}

template <typename S>
BasicTensor<S> dense_backward(const LayerSpec& l, const ParamBlock<S>& p, const BasicTensor<S>& x,
                              const BasicTensor<S>& dy, std::size_t batch, ParamBlock<S>& grad) {
  CMapR<S> X(x.data(), batch, l.in_features);
  CMapR<S> dY(dy.data(), batch, l.out_features);
  MapR<S>(grad.weight.data(), l.out_features, l.in_features).noalias() = dY.transpose() * X;
  grad.bias.fill(S(0));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < l.out_features; ++o) grad.bias[o] += dy[b * l.out_features + o];
  }
  CMapR<S> W(p.weight.data(), l.out_features, l.in_features);
  BasicTensor<S> dx(x.shape());
  MapR<S>(dx.data(), batch, l.in_features).noalias() = dY * W;
  return dx;
}

template <typename S>
BasicTensor<S> maxpool_forward(const LayerSpec& l, const BasicTensor<S>& x, std::size_t batch,
                               const Shape& in, const Shape& out,
                               std::vector<std::uint32_t>* argmax) {
  BasicTensor<S> y(batched(batch, out));
  if (argmax) argmax->assign(y.size(), 0);
  const std::size_t C = in[0], H = in[1], W = in[2], OH = out[1], OW = out[2];
  std::size_t o = 0;
  for (std::size_t bc = 0; bc < batch * C; ++bc) {
    const S* plane = x.data() + bc * H * W;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox, ++o) {
        std::size_t best = (oy * l.stride) * W + ox * l.stride;
        for (std::size_t ky = 0; ky < l.kernel_h; ++ky) {
          for (std::size_t kx = 0; kx < l.kernel_w; ++kx) {
            const std::size_t idx = (oy * l.stride + ky) * W + ox * l.stride + kx;
            if (plane[idx] > plane[best]) best = idx;
          }
        }
        y[o] = plane[best];
        if (argmax) (*argmax)[o] = static_cast<std::uint32_t>(bc * H * W + best);
      }
    }
  }
  return y;
}

template <typename S>
void softmax_rows(const S* x, S* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const S* xr = x + r * cols;
    S* yr = y + r * cols;
    const S mx = *std::max_element(xr, xr + cols);
    S sum = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      yr[i] = std::exp(xr[i] - mx);
      sum += yr[i];
    }
    for (std::size_t i = 0; i < cols; ++i) yr[i] /= sum;
  }
}

}  // namespace

template <typename Scalar>
bool all_finite(const NetworkParams<Scalar>& params) {
  for (const auto& p : params) {
    for (auto v : p.weight.values()) {
      if (!std::isfinite(v)) return false;
    }
    for (auto v : p.bias.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

template <typename Scalar>
NetworkParams<Scalar> make_params(const NetworkSpec& spec) {
  validate(spec);
  NetworkParams<Scalar> params;
  for (const auto& l : spec.layers) {
    if (!l.has_params()) continue;
    params.push_back(
        {l.name, BasicTensor<Scalar>(weight_shape(l)), BasicTensor<Scalar>(bias_shape(l))});
  }
  return params;
}

NetworkParams<float> init_params(const NetworkSpec& spec, Rng& rng, double final_layer_scale) {
  auto params = make_params<float>(spec);
  std::size_t k = 0;
  for (const auto& l : spec.layers) {
    if (!l.has_params()) continue;
    auto& block = params[k++];
    const std::size_t fan_in = block.weight.size() / block.weight.dim(0);
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    if (k == params.size()) limit *= final_layer_scale;
    for (auto& w : block.weight.values()) {
      w = static_cast<float>((2.0 * uniform01(rng) - 1.0) * limit);
    }
  }
  return params;
}

template <typename Scalar>
void check_params(const NetworkSpec& spec, const NetworkParams<Scalar>& params) {
  std::size_t k = 0;
  for (const auto& l : spec.layers) {
    if (!l.has_params()) continue;
    if (k >= params.size()) throw ConfigError("too few parameter blocks for network spec");
    const auto& p = params[k++];
    if (p.weight.shape() != weight_shape(l) || p.bias.shape() != bias_shape(l)) {
      throw ConfigError("parameter block '" + p.name + "' has shape " +
                        shape_to_string(p.weight.shape()) + ", layer '" + l.name + "' expects " +
                        shape_to_string(weight_shape(l)));
    }
  }
  if (k != params.size()) throw ConfigError("too many parameter blocks for network spec");
}

std::size_t param_blocks_before(const NetworkSpec& spec, std::size_t layer) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < layer && i < spec.layers.size(); ++i) {
    if (spec.layers[i].has_params()) ++k;
  }
  return k;
}

SplitSpec split_spec(const NetworkSpec& spec, std::size_t at) {
  const auto shapes = infer_shapes(spec);
  if (at > spec.layers.size()) throw ConfigError("split point beyond network depth");
  SplitSpec out;
  out.trunk.input_shape = spec.input_shape;
  out.trunk.layers.assign(spec.layers.begin(), spec.layers.begin() + at);
  out.head.input_shape = shapes[at];
  out.head.layers.assign(spec.layers.begin() + at, spec.layers.end());
  const bool concat_in_trunk =
      std::any_of(out.trunk.layers.begin(), out.trunk.layers.end(),
                  [](const auto& l) { return l.kind == LayerKind::concat; });
  (concat_in_trunk ? out.trunk : out.head).aux_size = spec.aux_size;
  return out;
}

template <typename Scalar>
ForwardResult<Scalar> forward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                              const BasicTensor<Scalar>& input, const BasicTensor<Scalar>* aux,
                              ForwardOptions options) {
  const auto shapes = infer_shapes(spec);
  check_params(spec, params);
  if (input.rank() != spec.input_shape.size() + 1 ||
      !std::equal(spec.input_shape.begin(), spec.input_shape.end(), input.shape().begin() + 1)) {
    throw ConfigError("forward input " + shape_to_string(input.shape()) + " does not match [B]+" +
                      shape_to_string(spec.input_shape));
  }
  const std::size_t batch = input.dim(0);
  const std::size_t end = std::min(options.layer_end, spec.layers.size());

  ForwardResult<Scalar> result;
  auto& cache = result.cache;
  cache.batch = batch;
  cache.layer_end = end;
  if (options.keep_cache) {
    cache.spec_id = fingerprint(spec);
    cache.inputs.reserve(end);
    cache.argmax.resize(end);
  }

  BasicTensor<Scalar> x = input;
  std::size_t k = 0;
  for (std::size_t i = 0; i < end; ++i) {
    const auto& l = spec.layers[i];
    const Shape& in = shapes[i];
    const Shape& out = shapes[i + 1];
    BasicTensor<Scalar> y;
    switch (l.kind) {
      case LayerKind::conv2d:
        y = conv_forward(l, params[k++], x, batch, in, out);
        break;
      case LayerKind::dense:
        y = dense_forward(l, params[k++], x, batch);
        break;
      case LayerKind::maxpool2d:
        y = maxpool_forward(l, x, batch, in, out, options.keep_cache ? &cache.argmax[i] : nullptr);
        break;
      case LayerKind::relu:
        y = x;
        for (auto& v : y.values()) v = v > Scalar{0} ? v : Scalar{0};
        break;
      case LayerKind::sigmoid:
        y = x;
        for (auto& v : y.values()) v = Scalar{1} / (Scalar{1} + std::exp(-v));
        break;
      case LayerKind::softmax: {
        y = BasicTensor<Scalar>(x.shape());
        softmax_rows(x.data(), y.data(), batch, shape_size(in));
        break;
      }
      case LayerKind::reshape:
        y = x.reshaped(batched(batch, out));
        break;
      case LayerKind::upsample: {
        y = BasicTensor<Scalar>(batched(batch, out));
        const std::size_t H = in[1], W = in[2], OH = out[1], OW = out[2];
        for (std::size_t bc = 0; bc < batch * in[0]; ++bc) {
          for (std::size_t oy = 0; oy < OH; ++oy) {
            const std::size_t sy = oy * H / OH;
            for (std::size_t ox = 0; ox < OW; ++ox) {
              y[(bc * OH + oy) * OW + ox] = x[(bc * H + sy) * W + ox * W / OW];
            }
          }
        }
        break;
      }
      case LayerKind::concat: {
        if (aux == nullptr || aux->rank() != 2 || aux->dim(0) != batch ||
            aux->dim(1) != spec.aux_size) {
          throw ConfigError("concat layer needs aux embedding of shape [" + std::to_string(batch) +
                            "," + std::to_string(spec.aux_size) + "]");
        }
        y = BasicTensor<Scalar>({batch, l.out_features});
        for (std::size_t b = 0; b < batch; ++b) {
          std::copy_n(x.data() + b * l.in_features, l.in_features, y.data() + b * l.out_features);
          std::copy_n(aux->data() + b * spec.aux_size, spec.aux_size,
                      y.data() + b * l.out_features + l.in_features);
        }
        break;
      }
    }
    if (options.keep_cache) {
      cache.inputs.push_back(std::move(x));
    }
    x = std::move(y);
  }
  if (options.keep_cache) cache.output = x;
  result.output = std::move(x);
  return result;
}

template <typename Scalar>
BackwardResult<Scalar> backward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                                const ForwardCache<Scalar>& cache,
                                const BasicTensor<Scalar>& upstream) {
  if (!cache.valid() || cache.spec_id != fingerprint(spec) ||
      cache.inputs.size() != cache.layer_end) {
    throw InternalError("backward called with a stale or mismatched forward cache");
  }
  if (upstream.shape() != cache.output.shape()) {
    throw InternalError("upstream gradient " + shape_to_string(upstream.shape()) +
                        " does not match forward output " + shape_to_string(cache.output.shape()));
  }
  const auto shapes = infer_shapes(spec);
  const std::size_t batch = cache.batch;

  BackwardResult<Scalar> result;
  result.grads = zeros_like(params);
  std::size_t k = param_blocks_before(spec, cache.layer_end);

  BasicTensor<Scalar> dy = upstream;
  for (std::size_t i = cache.layer_end; i-- > 0;) {
    const auto& l = spec.layers[i];
    const auto& x = cache.inputs[i];
    const auto& y = (i + 1 < cache.layer_end) ? cache.inputs[i + 1] : cache.output;
    const Shape& in = shapes[i];
    const Shape& out = shapes[i + 1];
    BasicTensor<Scalar> dx;
    switch (l.kind) {
      case LayerKind::conv2d:
        --k;
        dx = conv_backward(l, params[k], x, dy, batch, in, out, result.grads[k]);
        break;
      case LayerKind::dense:
        --k;
        dx = dense_backward(l, params[k], x, dy, batch, result.grads[k]);
        break;
      case LayerKind::maxpool2d: {
        dx = BasicTensor<Scalar>(x.shape());
        const auto& am = cache.argmax[i];
        for (std::size_t o = 0; o < dy.size(); ++o) dx[am[o]] += dy[o];
        break;
      }
      case LayerKind::relu:
        dx = dy;
        for (std::size_t j = 0; j < dx.size(); ++j) {
          if (!(x[j] > Scalar{0})) dx[j] = Scalar{0};
        }
        break;
      case LayerKind::sigmoid:
        dx = dy;
        for (std::size_t j = 0; j < dx.size(); ++j) dx[j] *= y[j] * (Scalar{1} - y[j]);
        break;
      case LayerKind::softmax: {
        dx = BasicTensor<Scalar>(x.shape());
        const std::size_t cols = shape_size(in);
        for (std::size_t b = 0; b < batch; ++b) {
          Scalar dot = 0;
          for (std::size_t j = 0; j < cols; ++j) dot += dy[b * cols + j] * y[b * cols + j];
          for (std::size_t j = 0; j < cols; ++j) {
            dx[b * cols + j] = y[b * cols + j] * (dy[b * cols + j] - dot);
          }
        }
        break;
      }
      case LayerKind::reshape:
        dx = dy.reshaped(x.shape());
        break;
      case LayerKind::upsample: {
        dx = BasicTensor<Scalar>(x.shape());
        const std::size_t H = in[1], W = in[2], OH = out[1], OW = out[2];
        for (std::size_t bc = 0; bc < batch * in[0]; ++bc) {
          for (std::size_t oy = 0; oy < OH; ++oy) {
            const std::size_t sy = oy * H / OH;
            for (std::size_t ox = 0; ox < OW; ++ox) {
              dx[(bc * H + sy) * W + ox * W / OW] += dy[(bc * OH + oy) * OW + ox];
            }
          }
        }
        break;
      }
      case LayerKind::concat: {
        dx = BasicTensor<Scalar>(x.shape());
        result.aux_grad = BasicTensor<Scalar>({batch, spec.aux_size});
        for (std::size_t b = 0; b < batch; ++b) {
          std::copy_n(dy.data() + b * l.out_features, l.in_features, dx.data() + b * l.in_features);
          std::copy_n(dy.data() + b * l.out_features + l.in_features, spec.aux_size,
                      result.aux_grad.data() + b * spec.aux_size);
        }
        break;
      }
    }
    dy = std::move(dx);
  }
  result.input_grad = std::move(dy);
  return result;
}

template bool all_finite(const NetworkParams<float>&);
template bool all_finite(const NetworkParams<double>&);
template NetworkParams<float> make_params(const NetworkSpec&);
template NetworkParams<double> make_params(const NetworkSpec&);
template void check_params(const NetworkSpec&, const NetworkParams<float>&);
template void check_params(const NetworkSpec&, const NetworkParams<double>&);
template ForwardResult<float> forward(const NetworkSpec&, const NetworkParams<float>&,
                                      const Tensor&, const Tensor*, ForwardOptions);
template ForwardResult<double> forward(const NetworkSpec&, const NetworkParams<double>&,
                                       const Tensor64&, const Tensor64*, ForwardOptions);
template BackwardResult<float> backward(const NetworkSpec&, const NetworkParams<float>&,
                                        const ForwardCache<float>&, const Tensor&);
template BackwardResult<double> backward(const NetworkSpec&, const NetworkParams<double>&,
                                         const ForwardCache<double>&, const Tensor64&);

}  // namespace radloc::nn
