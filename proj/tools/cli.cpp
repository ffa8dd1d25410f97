#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "radloc/baselines/benchmark.hpp"
#include "radloc/baselines/policies.hpp"
#include "radloc/common/error.hpp"
#include "radloc/estimator/estimator.hpp"
#include "radloc/io/checkpoint.hpp"
#include "radloc/io/config.hpp"
#include "radloc/io/model_io.hpp"
#include "radloc/io/trace.hpp"
#include "radloc/ppo/trainer.hpp"

namespace radloc::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "radloc_out";
  std::optional<long> steps;
  std::optional<int> agents;
  std::optional<double> strength;
  std::string checkpoint;
  std::string dataset;
  std::string trace;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

std::optional<io::LoadedModel> load_checkpoint_opt(const Options& o) {
  if (o.checkpoint.empty()) return std::nullopt;
  return io::load_model(o.checkpoint);
}

// Config precedence: --config file, else the checkpoint's embedded config,
// else defaults; then flag overrides.
io::RunConfig resolve_config(const Options& o, const std::optional<io::LoadedModel>& ck) {
  io::RunConfig c;
  if (!o.config.empty()) {
    c = io::load_run_config(o.config);
  } else if (ck) {
    c = ck->config;
  }
  if (o.seed) c.seed = *o.seed;
  if (o.agents) {
    c.env.n_agents = *o.agents;
    c.benchmark.agent_counts = {*o.agents};
  }
  if (o.strength) {
    c.env.strength_min = c.env.strength_max = *o.strength;
    c.benchmark.strengths = {*o.strength};
  }
  if (ck && ck->model) {
    // The architecture is fixed by the trained weights.
    c.policy = ck->config.policy;
    c.obs = ck->config.obs;
    c.odmtl = ck->config.odmtl;
  }
  if (ck && ck->encoder) c.cae = ck->config.cae;
  io::finalize(c);
  return c;
}

fs::path prepare_out(const Options& o, const io::RunConfig& c) {
  fs::path out(o.out);
  fs::create_directories(out);
  write_text(out / "config.json", io::to_json(c));
  return out;
}

const ppo::ActorCritic& require_model(const std::optional<io::LoadedModel>& ck) {
  if (!ck || !ck->model) throw ConfigError("--checkpoint with actor/critic tensors is required");
  return *ck->model;
}

std::shared_ptr<const cae::Encoder> require_encoder(const std::optional<io::LoadedModel>& ck) {
  if (!ck || !ck->encoder) throw ConfigError("--checkpoint with cae.enc.* tensors is required");
  return ck->encoder;
}

nn::Tensor layout_dataset(const io::RunConfig& c) {
  auto rng = make_rng(c.seed, Stream::dataset);
  return cae::gen_layout_dataset(c.cae_dataset_size, c.env.height, c.env.width, c.env.layout, rng);
}

std::shared_ptr<const cae::Encoder> train_encoder(const io::RunConfig& c, const nn::Tensor& data,
                                                  const fs::path& out) {
  std::ofstream csv(out / "cae_metrics.csv", std::ios::trunc);
  csv << "epoch,train_mse,validation_mse\n";
  auto rng = make_rng(c.seed, Stream::init, 1);
  auto result = cae::train_cae(data, c.cae, rng, [&](const cae::CaeEpoch& e) {
    csv << e.epoch << "," << num(e.train_mse) << "," << num(e.validation_mse) << "\n" << std::flush;
    std::cerr << "cae epoch " << e.epoch << " train " << e.train_mse << " val " << e.validation_mse
              << "\n";
  });
  auto enc = std::make_shared<const cae::Encoder>(std::move(result.encoder));
  io::save_checkpoint(out / "encoder.ckpt", io::make_model_checkpoint(c, nullptr, enc.get()));
  return enc;
}

int cmd_gen_layouts(const Options& o) {
  const auto c = resolve_config(o, std::nullopt);
  const auto out = prepare_out(o, c);
  const auto data = layout_dataset(c);
  io::Checkpoint ck;
  ck.tensors.push_back({"layouts", data});
  io::save_checkpoint(out / "layouts.ckpt", ck);
  const std::size_t plane = data.dim(1) * data.dim(2);
  std::string csv = "index,obstacle_fraction\n";
  for (std::size_t i = 0; i < data.dim(0); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < plane; ++j) s += data[i * plane + j];
    csv += std::to_string(i) + "," + num(s / static_cast<double>(plane)) + "\n";
  }
  write_text(out / "layouts_metrics.csv", csv);
  std::cout << "wrote " << data.dim(0) << " layouts to " << (out / "layouts.ckpt").string() << "\n";
  return 0;
}

int cmd_train_cae(const Options& o) {
  const auto c = resolve_config(o, std::nullopt);
  const auto out = prepare_out(o, c);
  nn::Tensor data;
  if (!o.checkpoint.empty()) {
    data = io::load_checkpoint(o.checkpoint, "layouts").at("layouts");
  } else {
    data = layout_dataset(c);
  }
  train_encoder(c, data, out);
  std::cout << "wrote " << (out / "encoder.ckpt").string() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  const auto ck = load_checkpoint_opt(o);
  auto c = resolve_config(o, ck);
  if (o.steps) c.train.total_steps = *o.steps;
  io::finalize(c);
  const auto out = prepare_out(o, c);
  const auto encoder = ck && ck->encoder ? ck->encoder : train_encoder(c, layout_dataset(c), out);
  fs::create_directories(out / "checkpoints");

  std::ofstream metrics(out / "metrics.csv", std::ios::trunc);
  metrics << ppo::metrics_csv_header() << "\n";
  std::ofstream updates(out / "updates.csv", std::ios::trunc);
  updates << "step,episodes,episodic_reward_mean,loss_clip,loss_vf,entropy,clip_fraction,"
             "actor_grad_norm,critic_grad_norm\n";
  ppo::TrainHooks hooks;
  hooks.on_eval = [&](const ppo::MetricsRow& row, const ppo::ActorCritic& model) {
    metrics << ppo::metrics_csv_line(row) << "\n" << std::flush;
    const auto ckpt = io::make_model_checkpoint(c, &model, encoder.get());
    io::save_checkpoint(out / "checkpoints" / ("step_" + std::to_string(row.step) + ".ckpt"), ckpt);
    io::save_checkpoint(out / "final.ckpt", ckpt);
    std::cerr << "eval step " << row.step << " reward " << row.eval.reward_mean << " length "
              << row.eval.length_mean << " wrong_decl " << row.eval.wrong_declaration_rate << "\n";
  };
  hooks.on_update = [&](long step, const ppo::UpdateStats& s,
                        const std::vector<ppo::EpisodeRecord>& eps) {
    double r = 0;
    for (const auto& e : eps) r += e.reward;
    updates << step << "," << eps.size() << "," << num(eps.empty() ? 0.0 : r / eps.size()) << ","
            << num(s.loss_clip) << "," << num(s.loss_vf) << "," << num(s.entropy) << ","
            << num(s.clip_fraction) << "," << num(s.actor_grad_norm) << ","
            << num(s.critic_grad_norm) << "\n"
            << std::flush;
  };
  const auto result = ppo::train(c.env, c.obs, c.policy, c.train, encoder, hooks);
  if (result.error) {
    io::save_checkpoint(out / "last_good.ckpt",
                        io::make_model_checkpoint(c, &result.model, encoder.get()));
    std::cerr << "training aborted at step " << result.steps << ": " << *result.error
              << "; wrote last_good.ckpt\n";
    return 3;
  }
  std::cout << "trained " << result.steps << " steps; wrote " << (out / "final.ckpt").string()
            << "\n";
  return 0;
}

nlohmann::json eval_json(const ppo::EvalMetrics& m) {
  nlohmann::json j{{"episodes", m.episodes},
                   {"episodic_reward_mean", m.reward_mean},
                   {"episodic_length_mean", m.length_mean},
                   {"episodic_cost_mean", m.cost_mean},
                   {"wrong_decl_rate", m.wrong_declaration_rate}};
  for (int s = 0; s < env::kNumScenarios; ++s) {
    const auto& sc = m.scenarios[static_cast<std::size_t>(s)];
    j["scenarios"][env::to_string(static_cast<env::Scenario>(s))] = {
        {"episodes", sc.episodes},         {"success_rate", sc.success_rate},
        {"timeout_rate", sc.timeout_rate}, {"wrong_decl_rate", sc.wrong_declaration_rate},
        {"length_mean", sc.length_mean},   {"cost_mean", sc.cost_mean}};
  }
  return j;
}

int cmd_eval(const Options& o) {
  const auto ck = load_checkpoint_opt(o);
  const auto& model = require_model(ck);
  const auto c = resolve_config(o, ck);
  const auto out = prepare_out(o, c);
  const long steps = o.steps.value_or(c.train.eval_steps);
  env::SearchEnvironment env(c.env, c.obs, require_encoder(ck));
  const auto m = ppo::evaluate_policy(model, env, steps, c.seed);
  write_text(out / "eval_metrics.csv", ppo::metrics_csv_header() + "\n" +
                                           ppo::metrics_csv_line({steps, m, std::nullopt}) + "\n");
  write_text(out / "eval.json", eval_json(m).dump(2) + "\n");
  std::cout << eval_json(m).dump(2) << "\n";
  return 0;
}

estimator::EstimationDataset make_dataset(const io::RunConfig& c,
                                          const std::optional<io::LoadedModel>& ck) {
  env::SearchEnvironment env(c.env, c.obs, require_encoder(ck));
  if (c.estimator_policy == "sweep") {
    // Declare well before the step limit so short episodes still qualify.
    baselines::SweepThenDeclarePolicy policy(std::min(30, std::max(1, c.env.max_steps / 2)));
    return estimator::build_estimation_dataset(env, policy, c.estimator_dataset, c.seed, "sweep");
  }
  ppo::ActorPolicy policy(require_model(ck), true);
  return estimator::build_estimation_dataset(env, policy, c.estimator_dataset, c.seed, "actor");
}

int cmd_build_est_dataset(const Options& o) {
  const auto ck = load_checkpoint_opt(o);
  const auto c = resolve_config(o, ck);
  const auto out = prepare_out(o, c);
  const auto ds = make_dataset(c, ck);
  estimator::save_dataset(out / "est_dataset.jsonl", ds);
  std::cout << "wrote " << ds.samples.size() << " samples to "
            << (out / "est_dataset.jsonl").string() << "\n";
  return 0;
}

int cmd_train_estimator(const Options& o) {
  const auto ck = load_checkpoint_opt(o);
  const auto& actor = require_model(ck);
  const auto c = resolve_config(o, ck);
  const auto out = prepare_out(o, c);
  const auto ds = o.dataset.empty() ? make_dataset(c, ck) : estimator::load_dataset(o.dataset);
  auto rng = make_rng(c.seed, Stream::init, 2);
  auto model = estimator::make_estimator_from_actor(actor.actor_spec, actor.actor, rng);
  std::ofstream csv(out / "est_metrics.csv", std::ios::trunc);
  csv << "epoch,train_mse,validation_mse\n";
  const auto result = estimator::train_estimator(
      model, ds, c.estimator, rng, [&](const estimator::EstimatorEpoch& e) {
        csv << e.epoch << "," << num(e.train_mse) << "," << num(e.validation_mse) << "\n";
      });
  io::save_checkpoint(
      out / "estimator.ckpt",
      io::make_model_checkpoint(c, &actor, ck->encoder.get(), &model.estimate_head));
  const nlohmann::json summary{{"samples", ds.samples.size()},
                               {"train_size", result.train_size},
                               {"validation_size", result.validation_size},
                               {"validation_rmse", result.validation_rmse},
                               {"provenance", ds.provenance}};
  write_text(out / "estimator.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_benchmark(const Options& o) {
  const auto ck = load_checkpoint_opt(o);
  auto c = resolve_config(o, ck);
  if (o.steps) c.benchmark.steps = *o.steps;
  const auto out = prepare_out(o, c);
  std::vector<baselines::BenchmarkPolicy> policies;
  std::shared_ptr<const cae::Encoder> encoder = ck ? ck->encoder : nullptr;
  if (ck && ck->model) {
    const auto* model = &*ck->model;
    policies.push_back({c.odmtl ? "odmtl" : "proposed",
                        [model](const env::EnvConfig&) {
                          return std::make_unique<ppo::ActorPolicy>(*model, true);
                        },
                        {}});
  }
  policies.push_back(
      {"uniform",
       [](const env::EnvConfig&) { return std::make_unique<baselines::UniformSweepPolicy>(); },
       {}});
  const auto seed = c.seed;
  policies.push_back({"random",
                      [seed](const env::EnvConfig&) {
                        return std::make_unique<baselines::RandomPolicy>(
                            derive_seed(seed, Stream::benchmark, 1));
                      },
                      {}});
  const auto report = baselines::run_benchmark(policies, c.env, c.obs, encoder, c.benchmark);
  write_text(out / "benchmark.csv", baselines::report_csv(report));
  write_text(out / "benchmark.json", baselines::report_json(report));
  std::cout << baselines::report_csv(report);
  return 0;
}

int cmd_replay(const Options& o) {
  io::Trace trace;
  fs::path out(o.out);
  if (!o.trace.empty()) {
    std::ifstream in(o.trace);
    if (!in) throw FormatError("cannot read trace " + o.trace);
    trace = io::parse_trace(in);
    fs::create_directories(out);
  } else {
    const auto ck = load_checkpoint_opt(o);
    const auto c = resolve_config(o, ck);
    out = prepare_out(o, c);
    std::unique_ptr<env::Policy> policy;
    std::shared_ptr<const cae::Encoder> encoder;
    if (ck && ck->model) {
      policy = std::make_unique<ppo::ActorPolicy>(*ck->model, true);
      encoder = ck->encoder;
    } else {
      policy = std::make_unique<baselines::UniformSweepPolicy>();
    }
    env::SearchEnvironment env(c.env, c.obs, encoder);
    const auto lines = io::record_episode(env, *policy, derive_seed(c.seed, Stream::eval));
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    write_text(out / "trace.jsonl", text);
    std::istringstream in(text);
    trace = io::parse_trace(in);
  }
  std::string frames;
  for (std::size_t f = 0; f <= trace.frames.size(); ++f)
    frames += io::render_frame(trace, f) + "\n";
  write_text(out / "replay.txt", frames);
  std::cout << frames;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Multi-agent radiation search: simulation, training, evaluation"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run config JSON");
    sub->add_option("--seed", o.seed, "Global 64-bit seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--steps", o.steps, "Step count (training total, eval or benchmark budget)");
    sub->add_option("--agents", o.agents, "Number of agents");
    sub->add_option("--strength", o.strength, "Target strength");
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint (model, encoder or layouts)");
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    commands.push_back({sub, fn});
    return sub;
  };
  add("gen-layouts", "Generate synthetic obstacle layouts", cmd_gen_layouts);
  add("train-cae", "Train the layout autoencoder", cmd_train_cae);
  add("train", "Train actor and critic with PPO", cmd_train);
  add("eval", "Greedy evaluation of a trained actor", cmd_eval);
  add("build-est-dataset", "Collect unreachable-target estimation samples", cmd_build_est_dataset);
  add("train-estimator", "Train the coordinate-estimation head", cmd_train_estimator)
      ->add_option("--dataset", o.dataset, "Estimation dataset (JSON lines)");
  add("benchmark", "Compare policies on paired episodes", cmd_benchmark);
  add("replay", "Record and render an episode trace", cmd_replay)
      ->add_option("--trace", o.trace, "Render an existing trace instead");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace radloc::cli
