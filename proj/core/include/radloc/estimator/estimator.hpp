#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "radloc/env/policy.hpp"
#include "radloc/nn/network.hpp"
#include "radloc/ppo/policy.hpp"

namespace radloc::estimator {

// One agent's observation at the step its team declared unreachability,
// labelled with the target cell center normalized by the grid size:
// x = (col + 0.5) / w, y = (row + 0.5) / h.
struct EstimationSample {
  // Flattened maps followed by the embedding.
  std::vector<float> observation;
  std::array<float, 2> label{};
  std::uint64_t episode = 0;
  int agent = 0;
  std::string provenance;
};

struct EstimationDataset {
  nn::Shape map_shape;
  std::size_t embedding_size = 0;
  std::string provenance;
  std::vector<EstimationSample> samples;
};

std::array<float, 2> normalized_label(const env::Grid& grid, env::Cell target);

struct DatasetOptions {
  // Stop after this many samples (0 = no sample target) or episodes.
  std::size_t target_samples = 2000;
  int max_episodes = 100000;
};

// Drives `policy` over seeded episodes; each unreachable-scenario episode
// ending in a correct majority unreachability declaration contributes one
// sample per agent. Throws ConfigError when no episode qualifies.
EstimationDataset build_estimation_dataset(env::SearchEnvironment& env, env::Policy& policy,
                                           const DatasetOptions& options, std::uint64_t seed,
                                           const std::string& provenance);

// JSON lines: a header line, then one {"obs", "label", "meta"} object per
// sample.
void save_dataset(const std::filesystem::path& path, const EstimationDataset& dataset);
EstimationDataset load_dataset(const std::filesystem::path& path);

// Actor trunk shared by a policy head and a coordinate-estimation head.
struct CombinedModel {
  nn::NetworkSpec trunk_spec;
  nn::NetworkParams<float> trunk;
  // Final actor layer and its softmax.
  nn::NetworkSpec policy_head_spec;
  nn::NetworkParams<float> policy_head;
  // Linear layer to (x, y).
  nn::NetworkSpec estimate_head_spec;
  nn::NetworkParams<float> estimate_head;
  // Trunk forward passes so far (instrumentation).
  mutable std::size_t trunk_calls = 0;

  std::size_t feature_size() const { return estimate_head_spec.input_shape.at(0); }
  std::size_t trainable_param_count() const { return nn::param_count(estimate_head); }
};

// Copies every actor layer before the final dense layer into a frozen trunk;
// the estimation head is freshly initialized. Throws ConfigError when the
// actor does not end in dense -> softmax.
CombinedModel make_estimator_from_actor(const nn::NetworkSpec& actor_spec,
                                        const nn::NetworkParams<float>& actor, Rng& rng);

// Trunk features [B, hidden].
nn::Tensor trunk_features(const CombinedModel& model, const ppo::ObsBatch& batch);

struct Prediction {
  // [B, n_actions] unmasked softmax, as the actor computes it.
  nn::Tensor action_probs;
  // [B, 2] clamped to the unit square.
  nn::Tensor estimate;
};

// One trunk pass feeding both heads.
Prediction combined_predict(const CombinedModel& model, const ppo::ObsBatch& batch);

struct EstimatorConfig {
  int epochs = 300;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  double validation_fraction = 0.1;
};

struct EstimatorEpoch {
  int epoch = 0;
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

struct EstimatorTrainResult {
  std::vector<EstimatorEpoch> curve;
  // Held-out RMSE of clamped estimates in normalized units (Euclidean error
  // per sample, root-mean-squared).
  double validation_rmse = 0.0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

// Rebuilds the batched network inputs of a dataset slice.
ppo::ObsBatch dataset_batch(const EstimationDataset& dataset,
                            const std::vector<std::size_t>& indices);

// MSE training of the estimation head only, on a seeded train/validation
// split. Throws TrainingError when the loss becomes non-finite.
EstimatorTrainResult train_estimator(
    CombinedModel& model, const EstimationDataset& dataset, const EstimatorConfig& config, Rng& rng,
    const std::function<void(const EstimatorEpoch&)>& on_epoch = {});

}  // namespace radloc::estimator
