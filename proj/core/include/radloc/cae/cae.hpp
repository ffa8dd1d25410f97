#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "radloc/common/rng.hpp"
#include "radloc/env/config.hpp"
#include "radloc/env/grid.hpp"
#include "radloc/nn/network.hpp"
#include "radloc/obs/observations.hpp"

namespace radloc::cae {

struct CaeConfig {
  int height = 100;
  int width = 100;
  int embedding_size = 128;
  // Encoder: three stride-2 3x3 convs, then FC(hidden) and FC(embedding).
  std::vector<std::size_t> encoder_channels{16, 32, 24};
  std::size_t hidden = 256;
  // Decoder: FC(hidden), FC(channels x h/4 x w/4), then two 3x3 convs at
  // 2x and full resolution.
  std::size_t decoder_channels = 16;
  double learning_rate = 1e-3;
  int epochs = 10;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  // Train on randomly flipped (and, for square maps, transposed) copies;
  // the layout generator is symmetric under these maps.
  bool augment = true;
};

void validate(const CaeConfig& config);

nn::NetworkSpec encoder_spec(const CaeConfig& config);
nn::NetworkSpec decoder_spec(const CaeConfig& config);

// Trained encoder half of the autoencoder; pure and deterministic.
class Encoder {
 public:
  Encoder() = default;
  Encoder(nn::NetworkSpec spec, nn::NetworkParams<float> params);

  const nn::NetworkSpec& spec() const { return spec_; }
  const nn::NetworkParams<float>& params() const { return params_; }
  int height() const { return static_cast<int>(spec_.input_shape[1]); }
  int width() const { return static_cast<int>(spec_.input_shape[2]); }
  std::size_t embedding_size() const;

  // Throws ConfigError when the layout shape differs from the encoder input.
  std::vector<float> encode(const obs::Map2D& layout) const;
  std::vector<float> encode(const env::Grid& grid) const;
  // [B, h, w] layouts -> [B, embedding] embeddings.
  nn::Tensor encode_batch(const nn::Tensor& layouts) const;

 private:
  nn::NetworkSpec spec_;
  nn::NetworkParams<float> params_;
};

// [count, h, w] binary maps drawn from the environment layout generator.
nn::Tensor gen_layout_dataset(std::size_t count, int height, int width,
                              const env::LayoutConfig& layout, Rng& rng);

struct CaeEpoch {
  int epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct CaeTrainResult {
  Encoder encoder;
  std::vector<CaeEpoch> curve;
  // Kept for evaluation; not needed at inference time.
  nn::NetworkParams<float> decoder_params;
};

// Per-pixel MSE reconstruction training with Adam on a seeded 90/10 split.
// Throws TrainingError when the loss becomes non-finite.
CaeTrainResult train_cae(const nn::Tensor& dataset, const CaeConfig& config, Rng& rng,
                         const std::function<void(const CaeEpoch&)>& on_epoch = {});

// Mean per-pixel squared reconstruction error over `layouts`.
double reconstruction_mse(const Encoder& encoder, const nn::NetworkSpec& decoder,
                          const nn::NetworkParams<float>& decoder_params,
                          const nn::Tensor& layouts);

}  // namespace radloc::cae
