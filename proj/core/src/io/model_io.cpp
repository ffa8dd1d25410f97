#include "radloc/io/model_io.hpp"

#include <json.hpp>

#include "radloc/common/error.hpp"

namespace radloc::io {

Checkpoint make_model_checkpoint(const RunConfig& config, const ppo::ActorCritic* model,
                                 const cae::Encoder* encoder,
                                 const nn::NetworkParams<float>* estimate_head) {
  Checkpoint ck;
  ck.meta = nlohmann::json{{"config", nlohmann::json::parse(to_json(config))}}.dump();
  if (model) {
    add_params(ck, "actor.", model->actor);
    add_params(ck, "critic.", model->critic);
  }
  if (encoder) add_params(ck, "cae.enc.", encoder->params());
  if (estimate_head) add_params(ck, "est.", *estimate_head);
  return ck;
}

LoadedModel load_model(const std::filesystem::path& path) {
  const auto ck = load_checkpoint(path);
  LoadedModel out;
  try {
    const auto meta = nlohmann::json::parse(ck.meta);
    out.config = parse_run_config(meta.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": checkpoint meta lacks a run config: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": checkpoint config is invalid: " + e.what());
  }
  if (ck.contains("actor.fc2.weight")) {
    ppo::ActorCritic m;
    m.config = out.config.policy;
    m.actor_spec = ppo::actor_spec(m.config);
    m.critic_spec = ppo::critic_spec(m.config);
    m.actor = extract_params(ck, "actor.", m.actor_spec);
    m.critic = extract_params(ck, "critic.", m.critic_spec);
    out.model = std::move(m);
  }
  if (ck.contains("cae.enc.fc2.weight")) {
    const auto spec = cae::encoder_spec(out.config.cae);
    out.encoder = std::make_shared<const cae::Encoder>(spec, extract_params(ck, "cae.enc.", spec));
  }
  if (ck.contains("est.head.weight")) {
    nn::NetworkSpec head;
    head.input_shape = {out.config.policy.hidden};
    head.layers = {nn::dense("head", out.config.policy.hidden, 2)};
    out.estimate_head = extract_params(ck, "est.", head);
  }
  return out;
}

}  // namespace radloc::io
