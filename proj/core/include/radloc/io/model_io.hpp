#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "radloc/io/checkpoint.hpp"
#include "radloc/io/config.hpp"

namespace radloc::io {

// Checkpoint holding any of "actor.*", "critic.*", "cae.enc.*" and
// "est.head.*"; the resolved run config travels in the header meta so the
// architectures can be rebuilt on load.
Checkpoint make_model_checkpoint(const RunConfig& config, const ppo::ActorCritic* model,
                                 const cae::Encoder* encoder,
                                 const nn::NetworkParams<float>* estimate_head = nullptr);

struct LoadedModel {
  RunConfig config;
  std::optional<ppo::ActorCritic> model;
  std::shared_ptr<const cae::Encoder> encoder;
  std::optional<nn::NetworkParams<float>> estimate_head;
};

// Throws FormatError when the meta config is missing or tensors do not fit
// the architectures it describes.
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace radloc::io
