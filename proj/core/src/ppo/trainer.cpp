#include "radloc/ppo/trainer.hpp"

#include <cstdio>

#include "radloc/common/error.hpp"

namespace radloc::ppo {

void validate(const TrainConfig& c, const env::EnvConfig& env_config) {
  validate(c.ppo);
  if (c.n_envs < 1) throw ConfigError("n_envs must be >= 1");
  if (c.horizon < env_config.max_steps) throw ConfigError("horizon must cover one full episode");
  if (c.horizon % c.n_envs != 0) throw ConfigError("horizon must be divisible by n_envs");
  if (c.total_steps < 1) throw ConfigError("total_steps must be positive");
  if (c.eval_every < 1 || c.eval_steps < 1) throw ConfigError("eval cadence must be positive");
  if (!(c.reward_scale > 0)) throw ConfigError("reward_scale must be positive");
}

std::string metrics_csv_header() {
  return "step,episodic_reward_mean,episodic_length_mean,episodic_cost_mean,"
         "success_rate_reachable,success_rate_unreachable,success_rate_nonexistent,"
         "loss_clip,loss_vf,entropy";
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string metrics_csv_line(const MetricsRow& row) {
  const auto& m = row.eval;
  std::string s = std::to_string(row.step) + "," + num(m.reward_mean) + "," + num(m.length_mean) +
                  "," + num(m.cost_mean);
  for (const auto& sc : m.scenarios) s += "," + num(sc.success_rate);
  if (row.update) {
    s += "," + num(row.update->loss_clip) + "," + num(row.update->loss_vf) + "," +
         num(row.update->entropy);
  } else {
    s += ",,,";
  }
  return s;
}

TrainResult train(const env::EnvConfig& env_config, const obs::ObservationConfig& obs_config,
                  const PolicyConfig& policy_config, const TrainConfig& config,
                  std::shared_ptr<const cae::Encoder> encoder, const TrainHooks& hooks) {
  validate(config, env_config);
  TrainResult result;
  auto init_rng = make_rng(config.seed, Stream::init);
  result.model = make_actor_critic(policy_config, init_rng);
  auto& model = result.model;
  auto optim = make_optimizers(model, config.ppo.learning_rate);
  auto shuffle_rng = make_rng(config.seed, Stream::shuffle);

  RolloutCollector collector(env_config, obs_config, encoder, config.n_envs, config.seed,
                             config.reward_scale);
  auto eval_config = env_config;
  eval_config.seed = derive_seed(config.seed, Stream::eval, ~0ULL);
  env::SearchEnvironment eval_env(eval_config, obs_config, encoder);

  std::optional<UpdateStats> last_update;
  auto evaluate_now = [&](long step) {
    MetricsRow row{step, evaluate_policy(model, eval_env, config.eval_steps, config.seed),
                   last_update};
    result.rows.push_back(row);
    if (hooks.on_eval) hooks.on_eval(result.rows.back(), model);
  };

  evaluate_now(0);
  long next_eval = config.eval_every;
  const auto steps_per_env = static_cast<std::size_t>(config.horizon / config.n_envs);
  while (result.steps < config.total_steps) {
    const ActorCritic last_good = model;
    const auto last_optim = optim;
    try {
      const auto buffer = collector.collect(model, steps_per_env);
      const auto adv = buffer_advantages(buffer, config.ppo.gamma, config.ppo.lambda);
      last_update = ppo_update(model, optim, buffer, adv, config.ppo, shuffle_rng);
      if (!nn::all_finite(model.actor) || !nn::all_finite(model.critic)) {
        throw TrainingError("parameters became non-finite");
      }
    } catch (const TrainingError& e) {
      model = last_good;
      optim = last_optim;
      result.error = e.what();
      return result;
    }
    result.steps += config.horizon;
    if (hooks.on_update) hooks.on_update(result.steps, *last_update, collector.finished());
    if (result.steps >= next_eval || result.steps >= config.total_steps) {
      evaluate_now(result.steps);
      while (next_eval <= result.steps) next_eval += config.eval_every;
    }
  }
  return result;
}

}  // namespace radloc::ppo
