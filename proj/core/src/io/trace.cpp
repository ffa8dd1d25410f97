#include "radloc/io/trace.hpp"

#include <json.hpp>

#include "radloc/common/error.hpp"

namespace radloc::io {

namespace {

using nlohmann::json;

json cells_json(const std::vector<env::Cell>& cells) {
  json a = json::array();
  for (const auto& c : cells) a.push_back({c.row, c.col});
  return a;
}

std::vector<env::Cell> parse_cells(const json& a) {
  std::vector<env::Cell> out;
  for (const auto& c : a) out.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  return out;
}

}  // namespace

std::string trace_header_line(const env::EnvState& s) {
  json rows = json::array();
  for (int r = 0; r < s.grid.height(); ++r) {
    std::string row;
    for (int c = 0; c < s.grid.width(); ++c) row += s.grid.is_obstacle({r, c}) ? '#' : '.';
    rows.push_back(row);
  }
  json target{{"exists", s.target.exists}};
  if (s.target.exists) {
    target["row"] = s.target.position.row;
    target["col"] = s.target.position.col;
    target["strength"] = s.target.strength;
    target["reachable"] = s.target.reachable;
  }
  return json{{"type", "episode"},
              {"height", s.grid.height()},
              {"width", s.grid.width()},
              {"grid", rows},
              {"scenario", env::to_string(s.scenario)},
              {"target", target},
              {"agents", cells_json(s.agents)}}
      .dump();
}

std::string trace_step_line(const env::EnvState& after, std::span<const env::Action> actions,
                            const env::StepResult& result) {
  json acts = json::array();
  for (auto a : actions) acts.push_back(env::to_string(a));
  return json{{"type", "step"},
              {"t", after.step},
              {"actions", acts},
              {"agents", cells_json(after.agents)},
              {"readings", result.info.readings},
              {"reward", result.reward},
              {"done", result.done},
              {"outcome", env::to_string(result.info.outcome)}}
      .dump();
}

std::vector<std::string> record_episode(env::SearchEnvironment& env, env::Policy& policy,
                                        std::uint64_t episode_seed) {
  auto obs = env.reset(episode_seed);
  policy.begin_episode(env);
  std::vector<std::string> lines{trace_header_line(env.state())};
  while (true) {
    const auto actions = policy.act(env, obs);
    auto r = env.step(actions);
    lines.push_back(trace_step_line(env.state(), actions, r));
    if (r.done) break;
    obs = std::move(r.observations);
  }
  return lines;
}

Trace parse_trace(std::istream& in) {
  Trace t;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "episode") {
        t.height = j.at("height").get<int>();
        t.width = j.at("width").get<int>();
        t.rows = j.at("grid").get<std::vector<std::string>>();
        t.scenario = j.at("scenario").get<std::string>();
        const auto& target = j.at("target");
        t.target_exists = target.at("exists").get<bool>();
        if (t.target_exists) t.target = {target.at("row").get<int>(), target.at("col").get<int>()};
        t.start = parse_cells(j.at("agents"));
        have_header = true;
      } else if (type == "step") {
        TraceFrame f;
        f.step = j.at("t").get<int>();
        f.agents = parse_cells(j.at("agents"));
        f.actions = j.at("actions").get<std::vector<std::string>>();
        f.readings = j.at("readings").get<std::vector<std::int64_t>>();
        f.reward = j.at("reward").get<double>();
        f.done = j.at("done").get<bool>();
        f.outcome = j.at("outcome").get<std::string>();
        t.frames.push_back(std::move(f));
      } else {
        throw FormatError("trace line " + std::to_string(line_no) + ": unknown type " + type);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError("trace line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw FormatError("trace has no episode line");
  if (static_cast<int>(t.rows.size()) != t.height) throw FormatError("trace grid height mismatch");
  for (const auto& r : t.rows) {
    if (static_cast<int>(r.size()) != t.width) throw FormatError("trace grid width mismatch");
  }
  return t;
}

std::string render_frame(const Trace& t, std::size_t frame) {
  if (frame > t.frames.size()) throw ConfigError("trace frame out of range");
  auto rows = t.rows;
  auto mark = [&](const std::vector<env::Cell>& cells) {
    for (const auto& c : cells)
      rows[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] = '+';
  };
  mark(t.start);
  for (std::size_t i = 0; i < frame; ++i) mark(t.frames[i].agents);
  if (t.target_exists)
    rows[static_cast<std::size_t>(t.target.row)][static_cast<std::size_t>(t.target.col)] = 'T';
  const auto& agents = frame == 0 ? t.start : t.frames[frame - 1].agents;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    rows[static_cast<std::size_t>(agents[a].row)][static_cast<std::size_t>(agents[a].col)] =
        static_cast<char>('0' + a % 10);
  }
  std::string out;
  if (frame == 0) {
    out += "step 0  scenario " + t.scenario + "\n";
  } else {
    const auto& f = t.frames[frame - 1];
    out += "step " + std::to_string(f.step) + "  reward " + json(f.reward).dump() + "  actions";
    for (const auto& a : f.actions) out += " " + a;
    if (f.done) out += "  outcome " + f.outcome;
    out += "\n";
  }
  for (const auto& r : rows) out += r + "\n";
  return out;
}

}  // namespace radloc::io
