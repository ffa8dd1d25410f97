#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "radloc/baselines/policies.hpp"
#include "radloc/common/error.hpp"
#include "radloc/io/checkpoint.hpp"
#include "radloc/io/config.hpp"
#include "radloc/io/model_io.hpp"
#include "radloc/io/trace.hpp"

using namespace radloc;
using namespace radloc::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("radloc_test_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  nn::Tensor a({2, 3});
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.1f * static_cast<float>(i) - 0.25f;
  nn::Tensor b({4});
  b.fill(-1.5f);
  ck.tensors = {{"actor.fc1.weight", a}, {"critic.fc1.bias", b}};
  ck.meta = R"({"note":"x"})";
  return ck;
}

constexpr const char* kTinyConfig = R"({
  "seed": 3,
  "env": {"h": 8, "w": 8, "n_agents": 2, "max_steps": 20},
  "obs": {"window": 5, "embedding_size": 8},
  "policy": {"conv1_channels": 4, "conv2_channels": 4, "hidden": 16},
  "cae": {"dataset_size": 40, "encoder_channels": [2, 2, 2], "hidden": 8,
          "decoder_channels": 2, "epochs": 2, "batch_size": 8},
  "train": {"total_steps": 128, "horizon": 64, "eval_every": 64, "eval_steps": 40,
            "epochs_per_update": 2, "n_envs": 2},
  "estimator": {"epochs": 3, "policy": "sweep", "target_samples": 20},
  "benchmark": {"episodes": 6}
})";

}  // namespace

TEST_CASE("checkpoints round-trip bit-exactly") {
  const auto dir = scratch("ckpt");
  fs::create_directories(dir);
  const auto path = dir / "a.ckpt";
  const auto ck = sample_checkpoint();
  save_checkpoint(path, ck);
  const auto back = load_checkpoint(path);
  CHECK(back.tensors == ck.tensors);
  CHECK(nlohmann::json::parse(back.meta) == nlohmann::json::parse(ck.meta));
  const auto partial = load_checkpoint(path, "critic.");
  REQUIRE(partial.tensors.size() == 1);
  CHECK(partial.tensors[0].name == "critic.fc1.bias");
  CHECK(partial.contains("critic.fc1.bias"));
  CHECK_THROWS_AS(partial.at("actor.fc1.weight"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto dir = scratch("corrupt");
  fs::create_directories(dir);
  const auto path = dir / "a.ckpt";
  save_checkpoint(path, sample_checkpoint());
  const auto bytes = read_file(path);
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << b;
  };
  write(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  write(bytes + "x");
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  write("NOTACKPT" + bytes.substr(8));
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  write(bytes.substr(0, 12));
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  CHECK_THROWS(load_checkpoint(dir / "missing.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("network params survive a checkpoint") {
  Rng rng(1);
  ppo::PolicyConfig pc;
  pc.window = 5;
  pc.embedding_size = 8;
  pc.hidden = 16;
  const auto model = ppo::make_actor_critic(pc, rng);
  Checkpoint ck;
  add_params(ck, "actor.", model.actor);
  CHECK(extract_params(ck, "actor.", model.actor_spec) == model.actor);
  CHECK_THROWS_AS(extract_params(ck, "critic.", model.critic_spec), FormatError);
  pc.hidden = 17;
  CHECK_THROWS_AS(extract_params(ck, "actor.", ppo::actor_spec(pc)), FormatError);
}

TEST_CASE("run configs reject unknown keys and bad types") {
  CHECK_NOTHROW(parse_run_config("{}"));
  CHECK_THROWS_AS(parse_run_config(R"({"env": {"hieght": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"env": {"h": "big"}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"env": {"n_agents": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
}

TEST_CASE("run configs round-trip through JSON") {
  auto c = parse_run_config(kTinyConfig);
  CHECK(c.env.height == 8);
  CHECK(c.cae.height == 8);
  CHECK(c.policy.window == 5);
  CHECK(c.policy.embedding_size == 8);
  CHECK(c.train.seed == 3);
  CHECK(c.estimator_policy == "sweep");
  const auto text = to_json(c);
  CHECK(to_json(parse_run_config(text)) == text);
  CHECK(c.obs.readings_scale == obs::ReadingsScale::episode_max);
  const auto ranged = parse_run_config(R"({"obs": {"readings_scale": "episode_range"}})");
  CHECK(ranged.obs.readings_scale == obs::ReadingsScale::episode_range);
  CHECK(to_json(parse_run_config(to_json(ranged))) == to_json(ranged));
  CHECK_THROWS_AS(parse_run_config(R"({"obs": {"readings_scale": "linear"}})"), ConfigError);
  auto odmtl = parse_run_config(R"({"train": {"odmtl": true}})");
  CHECK(odmtl.policy.n_actions == 9);
  CHECK_FALSE(odmtl.env.allow_declarations);
}

TEST_CASE("model checkpoints rebuild their architectures") {
  const auto dir = scratch("model");
  fs::create_directories(dir);
  auto cfg = parse_run_config(kTinyConfig);
  Rng rng(2);
  const auto model = ppo::make_actor_critic(cfg.policy, rng);
  save_checkpoint(dir / "m.ckpt", make_model_checkpoint(cfg, &model, nullptr));
  const auto loaded = load_model(dir / "m.ckpt");
  REQUIRE(loaded.model);
  CHECK(loaded.model->actor == model.actor);
  CHECK(loaded.model->critic == model.critic);
  CHECK_FALSE(loaded.encoder);
  CHECK(to_json(loaded.config) == to_json(cfg));
  Checkpoint bare = sample_checkpoint();
  save_checkpoint(dir / "bare.ckpt", bare);
  CHECK_THROWS_AS(load_model(dir / "bare.ckpt"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("traces round-trip and render") {
  env::EnvConfig ec;
  ec.height = ec.width = 8;
  ec.n_agents = 2;
  ec.max_steps = 15;
  env::SearchEnvironment env(ec, {}, nullptr);
  baselines::UniformSweepPolicy policy;
  const auto lines = record_episode(env, policy, 42);
  REQUIRE(lines.size() >= 2);
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  std::istringstream in(text);
  const auto t = parse_trace(in);
  CHECK(t.height == 8);
  CHECK(t.rows.size() == 8);
  CHECK(t.frames.size() == lines.size() - 1);
  CHECK(t.frames.back().done);
  CHECK(t.start.size() == 2);
  const auto pic = render_frame(t, 0);
  CHECK(pic.find('0') != std::string::npos);
  CHECK(pic.find('1') != std::string::npos);
  const auto last = render_frame(t, t.frames.size());
  CHECK(std::count(last.begin(), last.end(), '\n') >= 8);
  std::istringstream bad("{\"type\": \"step\"}\n");
  CHECK_THROWS_AS(parse_trace(bad), FormatError);
}

TEST_CASE("the CLI runs every subcommand on a tiny config") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto cfg = dir / "tiny.json";
  {
    std::ofstream out(cfg);
    out << kTinyConfig;
  }
  auto cli = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"radloc"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli::run(args);
  };
  const auto o = dir.string();
  CHECK(cli({"gen-layouts", "--config", cfg.string(), "--out", o}) == 0);
  CHECK(fs::exists(dir / "layouts.ckpt"));
  CHECK(cli({"train-cae", "--config", cfg.string(), "--out", o, "--checkpoint",
             (dir / "layouts.ckpt").string()}) == 0);
  CHECK(fs::exists(dir / "encoder.ckpt"));
  CHECK(cli({"train", "--config", cfg.string(), "--out", o, "--checkpoint",
             (dir / "encoder.ckpt").string()}) == 0);
  REQUIRE(fs::exists(dir / "final.ckpt"));
  const auto metrics = read_file(dir / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 4);
  const auto ck = (dir / "final.ckpt").string();
  CHECK(cli({"eval", "--out", o, "--checkpoint", ck, "--steps", "60"}) == 0);
  CHECK(fs::exists(dir / "eval_metrics.csv"));
  CHECK(cli({"benchmark", "--out", o, "--checkpoint", ck}) == 0);
  const auto bench = read_file(dir / "benchmark.csv");
  CHECK(bench.find("proposed") != std::string::npos);
  CHECK(bench.find("uniform") != std::string::npos);
  CHECK(cli({"replay", "--out", o, "--checkpoint", ck}) == 0);
  CHECK(fs::exists(dir / "replay.txt"));
  CHECK(cli({"replay", "--out", o, "--trace", (dir / "trace.jsonl").string()}) == 0);
  CHECK(cli({"build-est-dataset", "--config", cfg.string(), "--out", o, "--checkpoint", ck}) == 0);
  REQUIRE(fs::exists(dir / "est_dataset.jsonl"));
  CHECK(cli({"train-estimator", "--out", o, "--checkpoint", ck, "--dataset",
             (dir / "est_dataset.jsonl").string()}) == 0);
  CHECK(fs::exists(dir / "estimator.ckpt"));

  CHECK(cli({"train", "--bogus-flag"}) != 0);
  CHECK(cli({"eval", "--out", o, "--checkpoint", (dir / "nope.ckpt").string()}) != 0);
  CHECK(cli({"train", "--config", (dir / "nope.json").string(), "--out", o}) == 1);
  CHECK(cli({}) != 0);
  fs::remove_all(dir);
}
