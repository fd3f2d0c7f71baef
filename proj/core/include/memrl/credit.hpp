#pragma once

#include <array>
#include <span>
#include <vector>

#include "memrl/trajectory.hpp"

namespace memrl {

// Adaptive credit assignment: each agent's share of the global reward is
// the softmax of its NDCG ranking consistency between local and global
// rewards over a trajectory group.

struct ConsistencyScores {
  std::array<double, 3> v{};  // one per agent, each in [0, 1]
};

struct CreditWeights {
  std::array<double, 3> w{};  // positive, sums to 1
};

// Which way the global reward is folded into the per-agent signal.
// local_plus_weighted_global is the default: r_n + w_n * r_global.
// global_plus_weighted_local (r_global + w_n * r_n) is kept for
// comparison runs only.
enum class IntegrationForm { local_plus_weighted_global, global_plus_weighted_local };

struct FinalRewards {
  std::array<std::vector<double>, 3> per_agent;
};

// NDCG of the local-reward ordering against relevances given by the
// min-shifted global rewards. Ordering ties break toward the lower
// trajectory index; an all-equal global vector (IDCG = 0) scores 1.
double ndcg_consistency(std::span<const double> local, std::span<const double> global);

ConsistencyScores consistency_scores(const TrajectoryGroup& group);

// w_n = exp(v_n) / sum exp(v).
CreditWeights credit_weights(const ConsistencyScores& scores);

FinalRewards integrate_rewards(
    const TrajectoryGroup& group, const CreditWeights& weights,
    IntegrationForm form = IntegrationForm::local_plus_weighted_global);

// Lower-level form used by the training modes: per-agent global shares
// that need not sum to 1 (e.g. 1 for the independent baseline, 0 for the
// local-only ablation); optionally zeroes the local term.
FinalRewards apply_global_shares(const TrajectoryGroup& group,
                                 const std::array<double, 3>& shares,
                                 bool zero_local = false,
                                 IntegrationForm form =
                                     IntegrationForm::local_plus_weighted_global);

}  // namespace memrl
