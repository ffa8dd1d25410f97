#include "radloc/cae/cae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radloc/common/error.hpp"
#include "radloc/env/layout.hpp"
#include "radloc/nn/adam.hpp"

namespace radloc::cae {

namespace {

std::size_t half_up(std::size_t v) { return (v + 1) / 2; }

nn::Tensor slice_batch(const nn::Tensor& data, const std::vector<std::size_t>& order,
                       std::size_t begin, std::size_t end) {
  const std::size_t h = data.dim(1), w = data.dim(2);
  nn::Tensor batch({end - begin, 1, h, w});
  for (std::size_t i = begin; i < end; ++i) {
    std::copy_n(data.data() + order[i] * h * w, h * w, batch.data() + (i - begin) * h * w);
  }
  return batch;
}

// Applies one of the grid symmetries to each sample of a [B,1,h,w] batch.
void augment_batch(nn::Tensor& batch, Rng& rng) {
  const std::size_t h = batch.dim(2), w = batch.dim(3);
  const int variants = h == w ? 8 : 4;
  std::vector<float> tmp(h * w);
  for (std::size_t b = 0; b < batch.dim(0); ++b) {
    const int v = uniform_int(rng, 0, variants - 1);
    if (v == 0) continue;
    float* x = batch.data() + b * h * w;
    std::copy_n(x, h * w, tmp.data());
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        std::size_t sr = (v & 1) ? h - 1 - r : r;
        std::size_t sc = (v & 2) ? w - 1 - c : c;
        if (v & 4) std::swap(sr, sc);
        x[r * w + c] = tmp[sr * w + sc];
      }
    }
  }
}

}  // namespace

void validate(const CaeConfig& c) {
  if (c.height < 4 || c.width < 4) throw ConfigError("CAE input must be at least 4x4");
  if (c.embedding_size < 1) throw ConfigError("CAE embedding size must be positive");
  if (c.encoder_channels.size() != 3) throw ConfigError("CAE encoder needs exactly 3 conv layers");
  if (c.hidden < 1 || c.decoder_channels < 1) throw ConfigError("CAE widths must be positive");
  if (!(c.learning_rate > 0)) throw ConfigError("CAE learning rate must be positive");
  if (c.batch_size < 1) throw ConfigError("CAE batch size must be positive");
  if (!(c.validation_fraction >= 0 && c.validation_fraction < 1)) {
    throw ConfigError("CAE validation fraction must lie in [0, 1)");
  }
}

nn::NetworkSpec encoder_spec(const CaeConfig& c) {
  validate(c);
  nn::NetworkSpec s;
  s.input_shape = {1, static_cast<std::size_t>(c.height), static_cast<std::size_t>(c.width)};
  std::size_t ch = 1, h = s.input_shape[1], w = s.input_shape[2];
  for (std::size_t i = 0; i < 3; ++i) {
    s.layers.push_back(
        nn::conv2d("conv" + std::to_string(i + 1), ch, c.encoder_channels[i], 3, 2, 1));
    s.layers.push_back(nn::relu());
    ch = c.encoder_channels[i];
    h = half_up(h);
    w = half_up(w);
  }
  s.layers.push_back(nn::dense("fc1", ch * h * w, c.hidden));
  s.layers.push_back(nn::relu());
  s.layers.push_back(nn::dense("fc2", c.hidden, static_cast<std::size_t>(c.embedding_size)));
  nn::validate(s);
  return s;
}

nn::NetworkSpec decoder_spec(const CaeConfig& c) {
  validate(c);
  const auto H = static_cast<std::size_t>(c.height), W = static_cast<std::size_t>(c.width);
  const std::size_t qh = half_up(half_up(H)), qw = half_up(half_up(W));
  const std::size_t ch = c.decoder_channels;
  nn::NetworkSpec s;
  s.input_shape = {static_cast<std::size_t>(c.embedding_size)};
  s.layers = {
      nn::dense("fc1", static_cast<std::size_t>(c.embedding_size), c.hidden),
      nn::relu(),
      nn::dense("fc2", c.hidden, ch * qh * qw),
      nn::reshape({ch, qh, qw}),
      nn::upsample(ch, half_up(H), half_up(W)),
      nn::conv2d("conv1", ch, ch, 3, 1, 1),
      nn::relu(),
      nn::upsample(ch, H, W),
      nn::conv2d("conv2", ch, 1, 3, 1, 1),
      nn::sigmoid(),
  };
  nn::validate(s);
  return s;
}

Encoder::Encoder(nn::NetworkSpec spec, nn::NetworkParams<float> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  nn::check_params(spec_, params_);
  if (spec_.input_shape.size() != 3 || spec_.input_shape[0] != 1) {
    throw ConfigError("encoder input must be a single-channel map");
  }
}

std::size_t Encoder::embedding_size() const { return nn::infer_shapes(spec_).back().at(0); }

nn::Tensor Encoder::encode_batch(const nn::Tensor& layouts) const {
  if (layouts.rank() != 3 || layouts.dim(1) != spec_.input_shape[1] ||
      layouts.dim(2) != spec_.input_shape[2]) {
    throw ConfigError("encode: layouts " + nn::shape_to_string(layouts.shape()) +
                      " do not match encoder input " + nn::shape_to_string(spec_.input_shape));
  }
  const auto input = layouts.reshaped({layouts.dim(0), 1, layouts.dim(1), layouts.dim(2)});
  return nn::forward(spec_, params_, input, nn::kNoAux, {.keep_cache = false}).output;
}

std::vector<float> Encoder::encode(const obs::Map2D& layout) const {
  if (spec_.layers.empty()) throw ConfigError("encode: encoder is not initialized");
  nn::Tensor t({1, static_cast<std::size_t>(layout.height), static_cast<std::size_t>(layout.width)},
               layout.values);
  return encode_batch(t).storage();
}

std::vector<float> Encoder::encode(const env::Grid& grid) const {
  obs::Map2D m(grid.height(), grid.width());
  for (std::size_t i = 0; i < grid.cell_count(); ++i) m.values[i] = grid.obstacle_mask()[i];
  return encode(m);
}

nn::Tensor gen_layout_dataset(std::size_t count, int height, int width,
                              const env::LayoutConfig& layout, Rng& rng) {
  if (count < 1) throw ConfigError("layout dataset count must be >= 1");
  nn::Tensor out({count, static_cast<std::size_t>(height), static_cast<std::size_t>(width)});
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (std::size_t i = 0; i < count; ++i) {
    const auto grid = env::generate_layout(height, width, 10.0, layout, rng);
    for (std::size_t j = 0; j < plane; ++j) out[i * plane + j] = grid.obstacle_mask()[j];
  }
  return out;
}

double reconstruction_mse(const Encoder& encoder, const nn::NetworkSpec& decoder,
                          const nn::NetworkParams<float>& decoder_params,
                          const nn::Tensor& layouts) {
  const std::size_t n = layouts.dim(0), plane = layouts.dim(1) * layouts.dim(2);
  double sse = 0;
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    nn::Tensor chunk({end - begin, layouts.dim(1), layouts.dim(2)});
    std::copy_n(layouts.data() + begin * plane, (end - begin) * plane, chunk.data());
    const auto emb = encoder.encode_batch(chunk);
    const auto rec =
        nn::forward(decoder, decoder_params, emb, nn::kNoAux, {.keep_cache = false}).output;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const double d = static_cast<double>(rec[i]) - chunk[i];
      sse += d * d;
    }
  }
  return sse / static_cast<double>(n * plane);
}

CaeTrainResult train_cae(const nn::Tensor& dataset, const CaeConfig& config, Rng& rng,
                         const std::function<void(const CaeEpoch&)>& on_epoch) {
  if (dataset.rank() != 3 || dataset.dim(0) == 0) throw ConfigError("CAE dataset is empty");
  CaeConfig c = config;
  c.height = static_cast<int>(dataset.dim(1));
  c.width = static_cast<int>(dataset.dim(2));
  const auto enc_spec = encoder_spec(c);
  const auto dec_spec = decoder_spec(c);
  auto enc = nn::init_params(enc_spec, rng);
  auto dec = nn::init_params(dec_spec, rng);
  {
    // Start the sigmoid output at the mean occupancy; otherwise the first
    // updates push every output down and silence the decoder's ReLUs.
    double mean = 0;
    for (float v : dataset.values()) mean += v;
    mean = std::clamp(mean / static_cast<double>(dataset.size()), 1e-3, 1.0 - 1e-3);
    dec.back().bias.fill(static_cast<float>(std::log(mean / (1.0 - mean))));
  }
  auto enc_opt = nn::make_adam(enc, c.learning_rate);
  auto dec_opt = nn::make_adam(dec, c.learning_rate);

  const std::size_t n = dataset.dim(0), plane = dataset.dim(1) * dataset.dim(2);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  auto n_val = static_cast<std::size_t>(std::floor(c.validation_fraction * static_cast<double>(n)));
  if (n_val >= n) n_val = 0;
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
  const nn::Tensor val_set = n_val ? slice_batch(dataset, val_idx, 0, n_val)
                                         .reshaped({n_val, dataset.dim(1), dataset.dim(2)})
                                   : nn::Tensor{};

  CaeTrainResult result;
  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    shuffle(train_idx, rng);
    double sse = 0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += c.batch_size) {
      const std::size_t end = std::min(train_idx.size(), begin + c.batch_size);
      auto batch = slice_batch(dataset, train_idx, begin, end);
      if (c.augment) augment_batch(batch, rng);
      const std::size_t b = end - begin;
      auto ef = nn::forward(enc_spec, enc, batch);
      auto df = nn::forward(dec_spec, dec, ef.output);
      nn::Tensor grad(df.output.shape());
      const float scale = 2.0f / static_cast<float>(b * plane);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const float d = df.output[i] - batch[i];
        sse += static_cast<double>(d) * d;
        grad[i] = scale * d;
      }
      if (!std::isfinite(sse)) {
        throw TrainingError("CAE reconstruction loss became non-finite in epoch " +
                            std::to_string(epoch));
      }
      auto db = nn::backward(dec_spec, dec, df.cache, grad);
      auto eb = nn::backward(enc_spec, enc, ef.cache, db.input_grad);
      nn::adam_step(dec, db.grads, dec_opt);
      nn::adam_step(enc, eb.grads, enc_opt);
    }
    CaeEpoch log;
    log.epoch = epoch;
    log.train_mse = sse / static_cast<double>(train_idx.size() * plane);
    Encoder current(enc_spec, enc);
    log.validation_mse =
        n_val ? reconstruction_mse(current, dec_spec, dec, val_set) : log.train_mse;
    if (!std::isfinite(log.validation_mse)) {
      throw TrainingError("CAE validation loss became non-finite in epoch " +
                          std::to_string(epoch));
    }
    result.curve.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  result.encoder = Encoder(enc_spec, std::move(enc));
  result.decoder_params = std::move(dec);
  return result;
}

}  // namespace radloc::cae
