#include "memrl/trajectory.hpp"

#include <string>

#include <json.hpp>

#include "memrl/errors.hpp"

namespace memrl {

namespace {

[[noreturn]] void annotate_step(int step, AgentId agent, const Error& e) {
  std::string msg = "trajectory step " + std::to_string(step) + " (" +
                    agent_name(agent) + "): " + e.what();
  switch (e.kind()) {
    case ErrorKind::config:
      throw ConfigError(msg);
    case ErrorKind::io:
      throw IoError(msg);
    case ErrorKind::data:
    default:
      throw DataError(msg);
  }
}

}  // namespace

Trajectory run_trajectory(const PolicySet& policies, const Episode& episode, int k,
                          const RewardConfig& reward_cfg, Rng& rng) {
  Trajectory t;
  t.episode_id = episode.episode_id;

  FineMemory fine;
  double lp0 = 0.0;
  try {
    std::tie(fine, lp0) = extraction_act(policies.params_for(AgentId::extraction),
                                         episode, rng);
  } catch (const Error& e) {
    annotate_step(0, AgentId::extraction, e);
  }
  t.actions[0] = {AgentId::extraction, fine, lp0};
  t.s1 = fine;

  CoarseProfile profile;
  double lp1 = 0.0;
  try {
    std::tie(profile, lp1) =
        profile_act(policies.params_for(AgentId::profile), fine, episode, rng);
  } catch (const Error& e) {
    annotate_step(1, AgentId::profile, e);
  }
  t.actions[1] = {AgentId::profile, profile, lp1};
  t.s2_profile = profile;

  RetrievalOutcome outcome;
  double lp2 = 0.0;
  try {
    std::tie(outcome, lp2) = retrieval_act(policies.params_for(AgentId::retrieval),
                                           fine, profile, episode, k, rng);
  } catch (const Error& e) {
    annotate_step(2, AgentId::retrieval, e);
  }
  t.actions[2] = {AgentId::retrieval, outcome, lp2};
  t.s3 = outcome;

  t.rewards.r_cons_f =
      extraction_reward(fine.included_ids, episode.query.evidence_ids, reward_cfg.alpha);
  t.rewards.r_cons_c = profile_reward(profile, episode);
  t.rewards.r_ret = retrieval_reward(outcome.retrieved_ids, episode.query.evidence_ids,
                                     reward_cfg.beta);
  t.rewards.r_ans = answer_reward(outcome.answer, episode.query.correct_option);
  return t;
}

TrajectoryGroup sample_group(const PolicySet& policies, const Episode& episode,
                             int group_size, int k, const RewardConfig& reward_cfg,
                             std::uint64_t group_seed) {
  if (group_size < 2)
    throw ConfigError("group size must be >= 2 (group statistics undefined)");
  TrajectoryGroup group;
  group.episode_id = episode.episode_id;
  group.trajectories.reserve(group_size);
  group.global_rewards.reserve(group_size);
  for (int i = 0; i < group_size; ++i) {
    Rng rng(derive_seed(group_seed, {static_cast<std::uint64_t>(i)}));
    Trajectory t = run_trajectory(policies, episode, k, reward_cfg, rng);
    group.local_rewards[0].push_back(t.rewards.r_cons_f);
    group.local_rewards[1].push_back(t.rewards.r_cons_c);
    group.local_rewards[2].push_back(t.rewards.r_ret);
    group.global_rewards.push_back(t.rewards.r_ans);
    group.trajectories.push_back(std::move(t));
  }
  return group;
}

std::string trajectory_to_json_line(const Trajectory& t) {
  using nlohmann::json;
  json labels = json::object();
  for (const auto& [topic, label] : t.s2_profile.predicted_labels)
    labels[std::to_string(topic)] = label;
  json j{{"episode_id", t.episode_id},
         {"s1", {{"included_ids", t.s1.included_ids}}},
         {"s2_profile", labels},
         {"s3", {{"retrieved_ids", t.s3.retrieved_ids}, {"answer", t.s3.answer}}},
         {"logprobs",
          {t.actions[0].logprob, t.actions[1].logprob, t.actions[2].logprob}},
         {"rewards",
          {{"r_cons_f", t.rewards.r_cons_f},
           {"r_cons_c", t.rewards.r_cons_c},
           {"r_ret", t.rewards.r_ret},
           {"r_ans", t.rewards.r_ans}}}};
  return j.dump();
}

}  // namespace memrl
