#include "radloc/baselines/benchmark.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "radloc/common/error.hpp"

namespace radloc::baselines {

const BenchmarkEntry& BenchmarkReport::find(const std::string& policy, const std::string& scenario,
                                            double strength, int n_agents) const {
  for (const auto& e : entries) {
    if (e.policy == policy && e.scenario == scenario && e.strength == strength &&
        e.n_agents == n_agents) {
      return e;
    }
  }
  throw ConfigError("benchmark report has no entry for " + policy + "/" + scenario);
}

namespace {

// Mean and standard error (sample standard deviation / sqrt(n)).
std::pair<double, double> mean_se(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

BenchmarkEntry entry_of(const std::string& policy, const std::string& scenario, double strength,
                        int n_agents, const std::vector<const ppo::EpisodeRecord*>& recs) {
  BenchmarkEntry e{policy, scenario, strength, n_agents, static_cast<int>(recs.size())};
  std::vector<double> lengths, costs;
  for (const auto* r : recs) {
    lengths.push_back(r->length);
    costs.push_back(r->cost);
    e.success_rate += ppo::solved(*r) ? 1 : 0;
    e.timeout_rate += r->outcome == env::Outcome::timeout ? 1 : 0;
    e.wrong_declaration_rate += r->outcome == env::Outcome::wrong_declaration ? 1 : 0;
  }
  std::tie(e.length_mean, e.length_se) = mean_se(lengths);
  std::tie(e.cost_mean, e.cost_se) = mean_se(costs);
  if (!recs.empty()) {
    const double inv = 1.0 / static_cast<double>(recs.size());
    e.success_rate *= inv;
    e.timeout_rate *= inv;
    e.wrong_declaration_rate *= inv;
  }
  return e;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<BenchmarkEntry> summarize_entries(const std::string& policy, double strength,
                                              int n_agents,
                                              const std::vector<ppo::EpisodeRecord>& records) {
  std::vector<BenchmarkEntry> out;
  for (int s = 0; s < env::kNumScenarios; ++s) {
    std::vector<const ppo::EpisodeRecord*> recs;
    for (const auto& r : records) {
      if (static_cast<int>(r.scenario) == s) recs.push_back(&r);
    }
    out.push_back(
        entry_of(policy, env::to_string(static_cast<env::Scenario>(s)), strength, n_agents, recs));
  }
  std::vector<const ppo::EpisodeRecord*> all;
  for (const auto& r : records) all.push_back(&r);
  out.push_back(entry_of(policy, "all", strength, n_agents, all));
  return out;
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkPolicy>& policies,
                              const env::EnvConfig& base_env,
                              const obs::ObservationConfig& obs_config,
                              std::shared_ptr<const cae::Encoder> encoder,
                              const BenchmarkConfig& config) {
  if (policies.empty()) throw ConfigError("benchmark needs at least one policy");
  if (config.steps <= 0 && config.episodes < 1) {
    throw ConfigError("benchmark needs episodes >= 1 or a positive step budget");
  }
  BenchmarkReport report{config, {}};
  const auto episode_seed = derive_seed(config.seed, Stream::benchmark);
  for (double strength : config.strengths) {
    for (int n : config.agent_counts) {
      for (const auto& p : policies) {
        auto ec = base_env;
        ec.strength_min = ec.strength_max = strength;
        ec.n_agents = n;
        if (p.adjust_env) p.adjust_env(ec);
        env::SearchEnvironment env(ec, obs_config, encoder);
        auto policy = p.make(ec);
        const auto metrics =
            config.steps > 0
                ? ppo::run_policy_steps(env, *policy, config.steps, episode_seed)
                : ppo::run_policy_episodes(env, *policy, config.episodes, episode_seed);
        for (auto& e : summarize_entries(p.name, strength, n, metrics.records)) {
          report.entries.push_back(std::move(e));
        }
      }
    }
  }
  return report;
}

std::string report_csv(const BenchmarkReport& report) {
  std::string s =
      "policy,scenario,strength,n_agents,ep_length_mean,ep_length_se,ep_cost_mean,ep_cost_se,"
      "success_rate,timeout_rate,wrong_decl_rate\n";
  for (const auto& e : report.entries) {
    s += e.policy + "," + e.scenario + "," + num(e.strength) + "," + std::to_string(e.n_agents) +
         "," + num(e.length_mean) + "," + num(e.length_se) + "," + num(e.cost_mean) + "," +
         num(e.cost_se) + "," + num(e.success_rate) + "," + num(e.timeout_rate) + "," +
         num(e.wrong_declaration_rate) + "\n";
  }
  return s;
}

std::string report_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["meta"] = {{"seed", report.config.seed},
               {"episodes", report.config.episodes},
               {"steps", report.config.steps},
               {"mode", report.config.steps > 0 ? "step_budget" : "episodes"},
               {"strengths", report.config.strengths},
               {"agent_counts", report.config.agent_counts}};
  j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    j["entries"].push_back({{"policy", e.policy},
                            {"scenario", e.scenario},
                            {"strength", e.strength},
                            {"n_agents", e.n_agents},
                            {"episodes", e.episodes},
                            {"ep_length_mean", e.length_mean},
                            {"ep_length_se", e.length_se},
                            {"ep_cost_mean", e.cost_mean},
                            {"ep_cost_se", e.cost_se},
                            {"success_rate", e.success_rate},
                            {"timeout_rate", e.timeout_rate},
                            {"wrong_decl_rate", e.wrong_declaration_rate}});
  }
  return j.dump(2) + "\n";
}

}  // namespace radloc::baselines
