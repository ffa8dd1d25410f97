#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "radloc/env/policy.hpp"

namespace radloc::io {

// Episode trace as JSON lines: one "episode" line (grid, scenario, target,
// start positions), then one "step" line per environment step.
std::string trace_header_line(const env::EnvState& state);
std::string trace_step_line(const env::EnvState& after, std::span<const env::Action> actions,
                            const env::StepResult& result);

// Plays one seeded episode with `policy`, returning its trace lines.
std::vector<std::string> record_episode(env::SearchEnvironment& env, env::Policy& policy,
                                        std::uint64_t episode_seed);

struct TraceFrame {
  int step = 0;
  std::vector<env::Cell> agents;
  std::vector<std::string> actions;
  std::vector<std::int64_t> readings;
  double reward = 0.0;
  bool done = false;
  std::string outcome;
};

struct Trace {
  int height = 0;
  int width = 0;
  // '#' obstacle, '.' free.
  std::vector<std::string> rows;
  std::string scenario;
  bool target_exists = false;
  env::Cell target;
  std::vector<env::Cell> start;
  std::vector<TraceFrame> frames;
};

// Throws FormatError on malformed lines.
Trace parse_trace(std::istream& in);

// ASCII picture after `frame` steps (0 = start): agents as digits, target
// 'T', cells visited so far '+'.
std::string render_frame(const Trace& trace, std::size_t frame);

}  // namespace radloc::io
