#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "memrl/env.hpp"
#include "memrl/errors.hpp"
#include "memrl/rewards.hpp"
#include "memrl/trajectory.hpp"

using namespace memrl;

namespace {

PolicySet saturated_include_all(const EnvConfig& cfg) {
  // Extraction bias pushed to +inf-ish: every item is included with
  // probability 1, making the whole pipeline deterministic.
  PolicySet set = init_policies(cfg, false);
  set.thetas[0][cfg.d + 1] = 1e4;
  return set;
}

}  // namespace

TEST_CASE("trajectory states equal the action payloads and rewards recompute") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(17, cfg);
  PolicySet policies = init_policies(cfg, false);
  Rng rng(900);
  Trajectory t = run_trajectory(policies, ep, rcfg.k, rcfg, rng);

  CHECK(t.episode_id == ep.episode_id);
  CHECK(std::get<FineMemory>(t.actions[0].action) == t.s1);
  CHECK(std::get<CoarseProfile>(t.actions[1].action) == t.s2_profile);
  CHECK(std::get<RetrievalOutcome>(t.actions[2].action) == t.s3);

  CHECK(t.rewards.r_cons_f ==
        extraction_reward(t.s1.included_ids, ep.query.evidence_ids, rcfg.alpha));
  CHECK(t.rewards.r_cons_c == profile_reward(t.s2_profile, ep));
  CHECK(t.rewards.r_ret ==
        retrieval_reward(t.s3.retrieved_ids, ep.query.evidence_ids, rcfg.beta));
  CHECK(t.rewards.r_ans == answer_reward(t.s3.answer, ep.query.correct_option));
}

TEST_CASE("same rng stream gives the same trajectory") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(18, cfg);
  PolicySet policies = init_policies(cfg, false);
  Rng a(31), b(31);
  Trajectory ta = run_trajectory(policies, ep, rcfg.k, rcfg, a);
  Trajectory tb = run_trajectory(policies, ep, rcfg.k, rcfg, b);
  CHECK(ta.s1 == tb.s1);
  CHECK(ta.s2_profile == tb.s2_profile);
  CHECK(ta.s3 == tb.s3);
  CHECK(ta.rewards == tb.rewards);
}

TEST_CASE("saturating extraction includes the full history") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(19, cfg);
  PolicySet policies = saturated_include_all(cfg);
  Rng rng(77);
  Trajectory t = run_trajectory(policies, ep, rcfg.k, rcfg, rng);
  CHECK(t.s1.included_ids.size() == static_cast<std::size_t>(cfg.n_items));
  // M = full history: alpha + (1 - alpha) * |E| / n_items
  double expected = rcfg.alpha + (1.0 - rcfg.alpha) *
                                     static_cast<double>(cfg.evidence_size) /
                                     cfg.n_items;
  CHECK(t.rewards.r_cons_f == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("groups carry aligned reward vectors") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(20, cfg);
  ep.episode_id = 3;
  PolicySet policies = init_policies(cfg, false);
  TrajectoryGroup group = sample_group(policies, ep, 8, rcfg.k, rcfg, 555);

  CHECK(group.episode_id == 3);
  CHECK(group.trajectories.size() == 8);
  for (int a = 0; a < 3; ++a) REQUIRE(group.local_rewards[a].size() == 8);
  REQUIRE(group.global_rewards.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    const LocalRewards& r = group.trajectories[i].rewards;
    CHECK(group.local_rewards[0][i] == r.r_cons_f);
    CHECK(group.local_rewards[1][i] == r.r_cons_c);
    CHECK(group.local_rewards[2][i] == r.r_ret);
    CHECK(group.global_rewards[i] == r.r_ans);
    CHECK((r.r_ans == 0.0 || r.r_ans == 1.0));
  }
}

TEST_CASE("group sampling is per-index reproducible") {
  // Trajectory i depends only on (group_seed, i), not on sampling order.
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(21, cfg);
  PolicySet policies = init_policies(cfg, false);
  TrajectoryGroup group = sample_group(policies, ep, 6, rcfg.k, rcfg, 9001);
  for (int i = 0; i < 6; ++i) {
    Rng rng(derive_seed(9001, {static_cast<std::uint64_t>(i)}));
    Trajectory t = run_trajectory(policies, ep, rcfg.k, rcfg, rng);
    CHECK(t.s1 == group.trajectories[i].s1);
    CHECK(t.s3 == group.trajectories[i].s3);
  }
}

TEST_CASE("deterministic policies collapse the group") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(22, cfg);
  PolicySet oracle = oracle_policies(cfg);
  TrajectoryGroup group = sample_group(oracle, ep, 8, rcfg.k, rcfg, 123);
  for (int a = 0; a < 3; ++a)
    for (double r : group.local_rewards[a])
      CHECK(r == group.local_rewards[a][0]);
  for (const Trajectory& t : group.trajectories) {
    CHECK(t.s1 == group.trajectories[0].s1);
    CHECK(t.s3 == group.trajectories[0].s3);
  }
  CHECK(group.trajectories[0].rewards.r_ans == 1.0);
}

TEST_CASE("group size below 2 is a configuration error") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(23, cfg);
  PolicySet policies = init_policies(cfg, false);
  CHECK_THROWS_AS(sample_group(policies, ep, 1, rcfg.k, rcfg, 1), ConfigError);
}

TEST_CASE("policy errors are annotated with the failing step") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(24, cfg);
  PolicySet policies = init_policies(cfg, false);
  policies.thetas[1].resize(3);  // break the profile agent
  Rng rng(1);
  CHECK_THROWS_WITH_AS(run_trajectory(policies, ep, rcfg.k, rcfg, rng),
                       doctest::Contains("step 1"), ConfigError);
}

TEST_CASE("trajectory dump line is valid json with the expected keys") {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(25, cfg);
  PolicySet policies = init_policies(cfg, false);
  Rng rng(2);
  Trajectory t = run_trajectory(policies, ep, rcfg.k, rcfg, rng);
  auto j = nlohmann::json::parse(trajectory_to_json_line(t));
  for (const char* key : {"episode_id", "s1", "s2_profile", "s3", "logprobs", "rewards"})
    CHECK(j.contains(key));
  CHECK(j["rewards"]["r_ans"].get<double>() == t.rewards.r_ans);
}
