#pragma once

#include <vector>

#include "memrl/env.hpp"
#include "memrl/policies.hpp"

namespace memrl {

struct RewardConfig {
  double alpha = 0.8;  // extraction: weight on evidence coverage
  double beta = 0.2;   // retrieval: weight on evidence coverage
  int k = 4;           // retrieval budget

  void validate() const;

  bool operator==(const RewardConfig&) const = default;
};

// Per-step rewards of one rollout. The first three are local task rewards,
// r_ans is the global answer reward.
struct LocalRewards {
  double r_cons_f = 0.0;
  double r_cons_c = 0.0;
  double r_ret = 0.0;
  double r_ans = 0.0;

  bool operator==(const LocalRewards&) const = default;
};

// alpha * |M ^ E| / |E| + (1 - alpha) * |M ^ E| / |M u E|.
// evidence must be non-empty (ConfigError otherwise); both id sets ascending.
double extraction_reward(const std::vector<int>& included_ids,
                         const std::vector<int>& evidence_ids, double alpha);

// Deterministic rubric: fraction of topics present in the history whose
// predicted label matches the user preference. Topics missing from the
// profile count as mismatches.
double profile_reward(const CoarseProfile& profile, const Episode& episode);

// beta * |E' ^ E| / |E| + (1 - beta) * |E' ^ E| / |E' u E|.
double retrieval_reward(const std::vector<int>& retrieved_ids,
                        const std::vector<int>& evidence_ids, double beta);

// 1 iff answer == correct_option; both must be in [0, 4).
double answer_reward(int answer, int correct_option);

}  // namespace memrl
