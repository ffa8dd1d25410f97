#include "radloc/ppo/evaluate.hpp"

#include "radloc/common/error.hpp"

namespace radloc::ppo {

EvalMetrics summarize(const std::vector<EpisodeRecord>& records) {
  EvalMetrics m;
  m.records = records;
  m.episodes = static_cast<int>(records.size());
  int wrong = 0;
  for (const auto& r : records) {
    m.reward_mean += r.reward;
    m.length_mean += r.length;
    m.cost_mean += r.cost;
    if (r.outcome == env::Outcome::wrong_declaration) ++wrong;
    auto& s = m.scenarios[static_cast<std::size_t>(r.scenario)];
    ++s.episodes;
    s.success_rate += solved(r) ? 1 : 0;
    s.timeout_rate += r.outcome == env::Outcome::timeout ? 1 : 0;
    s.wrong_declaration_rate += r.outcome == env::Outcome::wrong_declaration ? 1 : 0;
    s.length_mean += r.length;
    s.cost_mean += r.cost;
  }
  if (m.episodes > 0) {
    const double inv = 1.0 / m.episodes;
    m.reward_mean *= inv;
    m.length_mean *= inv;
    m.cost_mean *= inv;
    m.wrong_declaration_rate = wrong * inv;
  }
  for (auto& s : m.scenarios) {
    if (s.episodes == 0) continue;
    const double inv = 1.0 / s.episodes;
    s.success_rate *= inv;
    s.timeout_rate *= inv;
    s.wrong_declaration_rate *= inv;
    s.length_mean *= inv;
    s.cost_mean *= inv;
  }
  return m;
}

std::uint64_t eval_episode_seed(std::uint64_t seed, std::uint64_t episode) {
  return derive_seed(seed, Stream::eval, episode);
}

namespace {

// Plays one episode from reset; returns false if the step budget ran out first.
bool play_episode(env::SearchEnvironment& env, env::Policy& policy, std::uint64_t episode_seed,
                  long* budget, EpisodeRecord& rec) {
  auto obs = env.reset(episode_seed);
  policy.begin_episode(env);
  rec = EpisodeRecord{env.state().scenario};
  while (budget == nullptr || *budget > 0) {
    const auto actions = policy.act(env, obs);
    auto r = env.step(actions);
    if (budget) --*budget;
    rec.reward += r.reward;
    rec.length += 1;
    rec.cost += r.info.moved;
    if (r.done) {
      rec.outcome = r.info.outcome;
      return true;
    }
    obs = std::move(r.observations);
  }
  return false;
}

}  // namespace

EvalMetrics run_policy_steps(env::SearchEnvironment& env, env::Policy& policy, long steps,
                             std::uint64_t seed) {
  if (steps < 1) throw ConfigError("evaluation needs a positive step budget");
  std::vector<EpisodeRecord> records;
  long budget = steps;
  for (std::uint64_t k = 0; budget > 0; ++k) {
    EpisodeRecord rec;
    if (play_episode(env, policy, eval_episode_seed(seed, k), &budget, rec)) records.push_back(rec);
  }
  return summarize(records);
}

EvalMetrics run_policy_episodes(env::SearchEnvironment& env, env::Policy& policy, int episodes,
                                std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  std::vector<EpisodeRecord> records(static_cast<std::size_t>(episodes));
  for (int k = 0; k < episodes; ++k) {
    play_episode(env, policy, eval_episode_seed(seed, static_cast<std::uint64_t>(k)), nullptr,
                 records[static_cast<std::size_t>(k)]);
  }
  return summarize(records);
}

EvalMetrics evaluate_policy(const ActorCritic& model, env::SearchEnvironment& env, long eval_steps,
                            std::uint64_t seed) {
  ActorPolicy greedy(model, true);
  return run_policy_steps(env, greedy, eval_steps, seed);
}

}  // namespace radloc::ppo
