#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "memrl/env.hpp"
#include "memrl/policies.hpp"
#include "memrl/rewards.hpp"
#include "memrl/rng.hpp"

namespace memrl {

// One rollout of the sequential pipeline MDP:
//   s0 = history --a0(extraction)--> s1 = fine memory
//   s1 --a1(profile)--> s2 = (fine, profile, query)
//   s2 --a2(retrieval)--> s3 = (retrieved ids, answer)
// States are stored explicitly so rewards stay recomputable.
struct Trajectory {
  std::int64_t episode_id = 0;
  std::array<ActionRecord, 3> actions;
  FineMemory s1;
  CoarseProfile s2_profile;
  RetrievalOutcome s3;
  LocalRewards rewards;
};

// G rollouts sharing one episode plus the per-agent local reward vectors
// and the global reward vector GRPO statistics are computed over.
struct TrajectoryGroup {
  std::int64_t episode_id = 0;
  std::vector<Trajectory> trajectories;
  std::array<std::vector<double>, 3> local_rewards;
  std::vector<double> global_rewards;
};

Trajectory run_trajectory(const PolicySet& policies, const Episode& episode, int k,
                          const RewardConfig& reward_cfg, Rng& rng);

// G independent trajectories; trajectory i draws from the stream derived
// from (group_seed, i), so any sampling schedule yields the same group.
TrajectoryGroup sample_group(const PolicySet& policies, const Episode& episode,
                             int group_size, int k, const RewardConfig& reward_cfg,
                             std::uint64_t group_seed);

// Debug dump, one JSON object mirroring Trajectory per call.
std::string trajectory_to_json_line(const Trajectory& trajectory);

}  // namespace memrl
