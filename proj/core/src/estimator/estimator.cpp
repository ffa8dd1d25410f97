#include "radloc/estimator/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "radloc/common/error.hpp"
#include "radloc/nn/adam.hpp"

namespace radloc::estimator {

std::array<float, 2> normalized_label(const env::Grid& grid, env::Cell target) {
  return {static_cast<float>((target.col + 0.5) / grid.width()),
          static_cast<float>((target.row + 0.5) / grid.height())};
}

EstimationDataset build_estimation_dataset(env::SearchEnvironment& env, env::Policy& policy,
                                           const DatasetOptions& options, std::uint64_t seed,
                                           const std::string& provenance) {
  if (!env.observes()) throw ConfigError("dataset generation needs an environment with an encoder");
  if (options.max_episodes < 1) throw ConfigError("dataset generation needs max_episodes >= 1");
  EstimationDataset ds;
  ds.provenance = provenance;
  ds.embedding_size = static_cast<std::size_t>(env.observation_config().embedding_size);
  for (int k = 0; k < options.max_episodes; ++k) {
    if (options.target_samples > 0 && ds.samples.size() >= options.target_samples) break;
    auto obs = env.reset(derive_seed(seed, Stream::dataset, static_cast<std::uint64_t>(k)));
    policy.begin_episode(env);
    while (true) {
      const auto actions = policy.act(env, obs);
      auto r = env.step(actions);
      if (r.done) {
        if (r.info.scenario == env::Scenario::unreachable &&
            r.info.outcome == env::Outcome::declared_unreachable) {
          const auto label = normalized_label(env.state().grid, env.state().target.position);
          for (std::size_t j = 0; j < obs.size(); ++j) {
            ds.map_shape = obs[j].maps.shape();
            ds.samples.push_back({obs[j].flatten(), label, static_cast<std::uint64_t>(k),
                                  static_cast<int>(j), provenance});
          }
        }
        break;
      }
      obs = std::move(r.observations);
    }
  }
  if (ds.samples.empty()) {
    throw ConfigError("no episode ended in a correct unreachability declaration; dataset is empty");
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const EstimationDataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  nlohmann::json header{{"header",
                         {{"map_shape", ds.map_shape},
                          {"embedding_size", ds.embedding_size},
                          {"provenance", ds.provenance},
                          {"samples", ds.samples.size()}}}};
  out << header.dump() << '\n';
  for (const auto& s : ds.samples) {
    nlohmann::json line{
        {"obs", s.observation},
        {"label", s.label},
        {"meta", {{"episode", s.episode}, {"agent", s.agent}, {"provenance", s.provenance}}}};
    out << line.dump() << '\n';
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

EstimationDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  EstimationDataset ds;
  std::string text;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, text)) {
      ++line_no;
      if (text.empty()) continue;
      const auto j = nlohmann::json::parse(text);
      if (j.contains("header")) {
        const auto& h = j["header"];
        ds.map_shape = h.at("map_shape").get<nn::Shape>();
        ds.embedding_size = h.at("embedding_size").get<std::size_t>();
        ds.provenance = h.value("provenance", "");
        continue;
      }
      EstimationSample s;
      s.observation = j.at("obs").get<std::vector<float>>();
      s.label = j.at("label").get<std::array<float, 2>>();
      const auto& meta = j.at("meta");
      s.episode = meta.at("episode").get<std::uint64_t>();
      s.agent = meta.at("agent").get<int>();
      s.provenance = meta.value("provenance", "");
      ds.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (ds.map_shape.empty()) throw FormatError(path.string() + ": missing dataset header line");
  const std::size_t width = nn::shape_size(ds.map_shape) + ds.embedding_size;
  for (const auto& s : ds.samples) {
    if (s.observation.size() != width) {
      throw FormatError(path.string() + ": sample observation length does not match header");
    }
  }
  return ds;
}

CombinedModel make_estimator_from_actor(const nn::NetworkSpec& actor_spec,
                                        const nn::NetworkParams<float>& actor, Rng& rng) {
  nn::check_params(actor_spec, actor);
  const auto& layers = actor_spec.layers;
  if (layers.size() < 2 || layers.back().kind != nn::LayerKind::softmax ||
      layers[layers.size() - 2].kind != nn::LayerKind::dense) {
    throw ConfigError("estimator needs an actor ending in dense -> softmax");
  }
  const std::size_t cut = layers.size() - 2;
  auto split = nn::split_spec(actor_spec, cut);
  const std::size_t trunk_blocks = nn::param_blocks_before(actor_spec, cut);

  CombinedModel m;
  m.trunk_spec = std::move(split.trunk);
  m.policy_head_spec = std::move(split.head);
  m.trunk.assign(actor.begin(), actor.begin() + static_cast<std::ptrdiff_t>(trunk_blocks));
  m.policy_head.assign(actor.begin() + static_cast<std::ptrdiff_t>(trunk_blocks), actor.end());

  const std::size_t hidden = layers[cut].in_features;
  m.estimate_head_spec.input_shape = {hidden};
  m.estimate_head_spec.layers = {nn::dense("head", hidden, 2)};
  nn::validate(m.estimate_head_spec);
  m.estimate_head = nn::init_params(m.estimate_head_spec, rng, 0.1);
  // Start at the center of the unit square.
  m.estimate_head.front().bias.fill(0.5f);
  return m;
}

nn::Tensor trunk_features(const CombinedModel& model, const ppo::ObsBatch& batch) {
  ++model.trunk_calls;
  return nn::forward(model.trunk_spec, model.trunk, batch.maps, &batch.embeddings,
                     {.keep_cache = false})
      .output;
}

namespace {

nn::Tensor estimate_from_features(const CombinedModel& model, const nn::Tensor& features) {
  auto est = nn::forward(model.estimate_head_spec, model.estimate_head, features, nn::kNoAux,
                         {.keep_cache = false})
                 .output;
  for (auto& v : est.values()) v = std::clamp(v, 0.0f, 1.0f);
  return est;
}

}  // namespace

Prediction combined_predict(const CombinedModel& model, const ppo::ObsBatch& batch) {
  const auto features = trunk_features(model, batch);
  Prediction p;
  p.action_probs = nn::forward(model.policy_head_spec, model.policy_head, features, nn::kNoAux,
                               {.keep_cache = false})
                       .output;
  p.estimate = estimate_from_features(model, features);
  return p;
}

ppo::ObsBatch dataset_batch(const EstimationDataset& ds, const std::vector<std::size_t>& indices) {
  nn::Shape ms{indices.size()};
  ms.insert(ms.end(), ds.map_shape.begin(), ds.map_shape.end());
  ppo::ObsBatch b{nn::Tensor(ms), nn::Tensor({indices.size(), ds.embedding_size})};
  const std::size_t plane = nn::shape_size(ds.map_shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& o = ds.samples.at(indices[i]).observation;
    std::copy_n(o.data(), plane, b.maps.data() + i * plane);
    std::copy_n(o.data() + plane, ds.embedding_size, b.embeddings.data() + i * ds.embedding_size);
  }
  return b;
}

namespace {

// Mean over samples of squared error summed over both coordinates / 2.
double head_mse(const CombinedModel& model, const nn::Tensor& features,
                const std::vector<float>& labels, bool clamp) {
  auto out = nn::forward(model.estimate_head_spec, model.estimate_head, features, nn::kNoAux,
                         {.keep_cache = false})
                 .output;
  double sse = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = clamp ? std::clamp(out[i], 0.0f, 1.0f) : out[i];
    const double d = static_cast<double>(v) - labels[i];
    sse += d * d;
  }
  return out.size() == 0 ? 0.0 : sse / static_cast<double>(out.size());
}

nn::Tensor gather_rows(const nn::Tensor& x, const std::size_t* idx, std::size_t n) {
  const std::size_t w = x.dim(1);
  nn::Tensor out({n, w});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(x.data() + idx[i] * w, w, out.data() + i * w);
  return out;
}

}  // namespace

EstimatorTrainResult train_estimator(CombinedModel& model, const EstimationDataset& dataset,
                                     const EstimatorConfig& config, Rng& rng,
                                     const std::function<void(const EstimatorEpoch&)>& on_epoch) {
  const std::size_t n = dataset.samples.size();
  if (n < 2) throw ConfigError("estimator training needs at least two samples");
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0)) {
    throw ConfigError("estimator epochs, batch size and learning rate must be positive");
  }
  if (!(config.validation_fraction > 0 && config.validation_fraction < 1)) {
    throw ConfigError("estimator validation fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n))),
      1, n - 1);
  const std::vector<std::size_t> val_idx(order.begin(),
                                         order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                                           order.end());

  // The trunk is frozen, so its features are computed once.
  auto features_of = [&](const std::vector<std::size_t>& idx, std::vector<float>& labels) {
    labels.clear();
    for (auto i : idx) {
      labels.push_back(dataset.samples[i].label[0]);
      labels.push_back(dataset.samples[i].label[1]);
    }
    return trunk_features(model, dataset_batch(dataset, idx));
  };
  std::vector<float> train_labels, val_labels;
  const auto train_x = features_of(train_idx, train_labels);
  const auto val_x = features_of(val_idx, val_labels);

  auto adam = nn::make_adam(model.estimate_head, config.learning_rate);
  EstimatorTrainResult result;
  result.train_size = train_idx.size();
  result.validation_size = val_idx.size();
  std::vector<std::size_t> perm(train_idx.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(perm, rng);
    for (std::size_t begin = 0; begin < perm.size(); begin += config.batch_size) {
      const std::size_t m = std::min(config.batch_size, perm.size() - begin);
      const auto x = gather_rows(train_x, perm.data() + begin, m);
      auto fwd = nn::forward(model.estimate_head_spec, model.estimate_head, x, nn::kNoAux);
      nn::Tensor upstream(fwd.output.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double d =
              static_cast<double>(fwd.output[i * 2 + c]) - train_labels[perm[begin + i] * 2 + c];
          upstream[i * 2 + c] = static_cast<float>(2.0 * d / static_cast<double>(2 * m));
        }
      }
      const auto grads =
          nn::backward(model.estimate_head_spec, model.estimate_head, fwd.cache, upstream).grads;
      nn::adam_step(model.estimate_head, grads, adam);
    }
    const EstimatorEpoch rec{epoch, head_mse(model, train_x, train_labels, false),
                             head_mse(model, val_x, val_labels, false)};
    if (!std::isfinite(rec.train_mse) || !std::isfinite(rec.validation_mse)) {
      throw TrainingError("estimator loss became non-finite");
    }
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  // Per-coordinate MSE x 2 is the mean squared Euclidean error.
  result.validation_rmse = std::sqrt(2.0 * head_mse(model, val_x, val_labels, true));
  return result;
}

}  // namespace radloc::estimator
