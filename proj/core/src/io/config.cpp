#include "radloc/io/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "radloc/baselines/policies.hpp"
#include "radloc/common/error.hpp"

namespace radloc::obs {

void to_json(nlohmann::json& j, const ReadingsScale& s) { j = to_string(s); }
void from_json(const nlohmann::json& j, ReadingsScale& s) {
  s = readings_scale_from_string(j.get<std::string>());
}

}  // namespace radloc::obs

namespace radloc::io {

namespace {

using nlohmann::json;

// Reads the fields present in a JSON object and rejects unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config block '" + path_ + "' must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path_ + key + "'");
    }
  }

  template <typename T>
  void field(const char* key, T& dst) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      dst = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + path_ + key + "' has the wrong type");
    }
  }

  template <typename F>
  void block(const char* key, F&& visit) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), path_ + key + ".");
    visit(sub);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <typename T>
  void field(const char* key, T& src) {
    j_[key] = src;
  }

  template <typename F>
  void block(const char* key, F&& visit) {
    Writer sub(j_[key]);
    visit(sub);
  }

 private:
  json& j_;
};

template <typename V>
void visit_config(V& v, RunConfig& c) {
  v.field("seed", c.seed);
  v.block("env", [&](V& e) {
    e.field("h", c.env.height);
    e.field("w", c.env.width);
    e.field("cell_size_m", c.env.cell_size_m);
    e.field("n_agents", c.env.n_agents);
    e.field("strength_min", c.env.strength_min);
    e.field("strength_max", c.env.strength_max);
    e.field("mu", c.env.mu);
    e.field("scenario_probs", c.env.scenario_probs);
    e.field("max_steps", c.env.max_steps);
    e.field("penalty", c.env.penalty);
    e.field("cpm_constant", c.env.cpm_constant);
    e.block("layout", [&](V& l) {
      l.field("density_min", c.env.layout.density_min);
      l.field("density_max", c.env.layout.density_max);
      l.field("sealed_room_min", c.env.layout.sealed_room_min);
      l.field("sealed_room_max", c.env.layout.sealed_room_max);
    });
  });
  v.block("obs", [&](V& o) {
    o.field("window", c.obs.window);
    o.field("embedding_size", c.obs.embedding_size);
    o.field("readings_scale", c.obs.readings_scale);
  });
  v.block("policy", [&](V& p) {
    p.field("conv1_channels", c.policy.conv1_channels);
    p.field("conv2_channels", c.policy.conv2_channels);
    p.field("hidden", c.policy.hidden);
  });
  v.block("train", [&](V& t) {
    t.field("clip_epsilon", c.train.ppo.clip_epsilon);
    t.field("gamma", c.train.ppo.gamma);
    t.field("lambda", c.train.ppo.lambda);
    t.field("epochs_per_update", c.train.ppo.epochs);
    t.field("lr", c.train.ppo.learning_rate);
    t.field("c1", c.train.ppo.value_coef);
    t.field("c2", c.train.ppo.entropy_coef);
    t.field("minibatch_size", c.train.ppo.minibatch_size);
    t.field("normalize_advantages", c.train.ppo.normalize_advantages);
    t.field("max_grad_norm", c.train.ppo.max_grad_norm);
    t.field("horizon", c.train.horizon);
    t.field("total_steps", c.train.total_steps);
    t.field("eval_every", c.train.eval_every);
    t.field("eval_steps", c.train.eval_steps);
    t.field("n_envs", c.train.n_envs);
    t.field("reward_scale", c.train.reward_scale);
    t.field("odmtl", c.odmtl);
  });
  v.block("cae", [&](V& a) {
    a.field("dataset_size", c.cae_dataset_size);
    a.field("encoder_channels", c.cae.encoder_channels);
    a.field("hidden", c.cae.hidden);
    a.field("decoder_channels", c.cae.decoder_channels);
    a.field("lr", c.cae.learning_rate);
    a.field("epochs", c.cae.epochs);
    a.field("batch_size", c.cae.batch_size);
    a.field("validation_fraction", c.cae.validation_fraction);
    a.field("augment", c.cae.augment);
  });
  v.block("estimator", [&](V& s) {
    s.field("epochs", c.estimator.epochs);
    s.field("lr", c.estimator.learning_rate);
    s.field("batch_size", c.estimator.batch_size);
    s.field("validation_fraction", c.estimator.validation_fraction);
    s.field("target_samples", c.estimator_dataset.target_samples);
    s.field("max_episodes", c.estimator_dataset.max_episodes);
    s.field("policy", c.estimator_policy);
  });
  v.block("benchmark", [&](V& b) {
    b.field("episodes", c.benchmark.episodes);
    b.field("steps", c.benchmark.steps);
    b.field("strengths", c.benchmark.strengths);
    b.field("agent_counts", c.benchmark.agent_counts);
  });
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  {
    Reader r(j, "");
    visit_config(r, c);
  }
  finalize(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void finalize(RunConfig& c) {
  c.env.seed = derive_seed(c.seed, Stream::env);
  c.train.seed = c.seed;
  c.benchmark.seed = c.seed;
  c.cae.height = c.env.height;
  c.cae.width = c.env.width;
  c.cae.embedding_size = c.obs.embedding_size;
  c.policy.window = c.obs.window;
  c.policy.embedding_size = c.obs.embedding_size;
  c.policy.n_maps = static_cast<int>(c.obs.assignment.size());
  c.env.allow_declarations = true;
  c.policy.n_actions = env::kNumActions;
  if (c.odmtl) baselines::apply_odmtl_mode(c.env, c.policy);

  env::validate(c.env);
  obs::validate(c.obs, c.env.height, c.env.width);
  ppo::validate(c.policy);
  ppo::validate(c.train, c.env);
  cae::validate(c.cae);
  if (c.cae_dataset_size < 2) throw ConfigError("cae.dataset_size must be >= 2");
  if (c.estimator_policy != "actor" && c.estimator_policy != "sweep") {
    throw ConfigError("estimator.policy must be \"actor\" or \"sweep\"");
  }
  if (c.benchmark.strengths.empty() || c.benchmark.agent_counts.empty()) {
    throw ConfigError("benchmark needs at least one strength and one agent count");
  }
  for (int n : c.benchmark.agent_counts) {
    if (n < 1) throw ConfigError("benchmark agent counts must be >= 1");
  }
}

std::string to_json(const RunConfig& config) {
  json j;
  auto copy = config;
  Writer w(j);
  visit_config(w, copy);
  return j.dump(2) + "\n";
}

}  // namespace radloc::io
