#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "radloc/cae/cae.hpp"
#include "radloc/env/policy.hpp"
#include "radloc/ppo/evaluate.hpp"

namespace radloc::baselines {

struct BenchmarkPolicy {
  std::string name;
  // Fresh policy for one (strength, N) configuration.
  std::function<std::unique_ptr<env::Policy>(const env::EnvConfig&)> make;
  // Optional environment adjustment (e.g. the 9-action ablation).
  std::function<void(env::EnvConfig&)> adjust_env;
};

struct BenchmarkConfig {
  // Episodes per configuration; ignored when `steps` > 0.
  int episodes = 200;
  // Step-budget mode: average over the episodes completed within this many
  // environment steps (40,000 in the reference protocol).
  long steps = 0;
  std::vector<double> strengths{1e9};
  std::vector<int> agent_counts{2};
  std::uint64_t seed = 0;
};

struct BenchmarkEntry {
  std::string policy;
  // Scenario name, or "all".
  std::string scenario;
  double strength = 0.0;
  int n_agents = 0;
  int episodes = 0;
  double length_mean = 0.0;
  double length_se = 0.0;
  double cost_mean = 0.0;
  double cost_se = 0.0;
  double success_rate = 0.0;
  double timeout_rate = 0.0;
  double wrong_declaration_rate = 0.0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<BenchmarkEntry> entries;

  // Throws ConfigError when absent.
  const BenchmarkEntry& find(const std::string& policy, const std::string& scenario,
                             double strength, int n_agents) const;
};

// Every policy plays the identical seeded episode sequence in each
// configuration (paired comparison). One entry per scenario plus "all".
BenchmarkReport run_benchmark(const std::vector<BenchmarkPolicy>& policies,
                              const env::EnvConfig& base_env,
                              const obs::ObservationConfig& obs_config,
                              std::shared_ptr<const cae::Encoder> encoder,
                              const BenchmarkConfig& config);

// Episode records grouped into entries.
std::vector<BenchmarkEntry> summarize_entries(const std::string& policy, double strength,
                                              int n_agents,
                                              const std::vector<ppo::EpisodeRecord>& records);

std::string report_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report);

}  // namespace radloc::baselines
