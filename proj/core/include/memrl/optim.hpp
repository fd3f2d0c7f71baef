#pragma once

#include <span>
#include <utility>
#include <vector>

#include "memrl/policies.hpp"

namespace memrl {

// Group-relative policy optimization: group-normalized advantages,
// clipped importance-ratio surrogate, optional KL penalty against a
// reference policy, plain gradient-ascent updates.

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_coeff = 0.0;  // 0 disables the KL penalty
  double learning_rate = 0.7;
  int group_size = 8;
  int batch_size = 128;
  int epochs = 5;
  int inner_epochs = 1;
  double std_floor = 1e-8;

  void validate() const;

  bool operator==(const GrpoConfig&) const = default;
};

// (r_i - mean) / population std; a group with std below std_floor is
// uninformative and yields all-zero advantages.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor);

// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A).
double clipped_objective(double ratio, double advantage, double clip_epsilon);

// u - ln u - 1 with u = exp(logp_ref - logp_cur); non-negative, zero iff
// the ratio is 1.
double kl_estimate(double logp_ref, double logp_cur);

struct UpdateSample {
  StepState state;
  AgentAction action;
  double old_logprob = 0.0;
  double advantage = 0.0;
};

struct UpdateStats {
  double loss = 0.0;  // -(mean clipped objective - kl_coeff * mean KL)
  double adv_mean = 0.0;
  double adv_std = 0.0;
  double ratio_mean = 0.0;
  double kl_mean = 0.0;
  double grad_norm = 0.0;
};

// Runs cfg.inner_epochs ascent steps of the clipped surrogate on the
// batch and returns the updated parameters. ref_params supplies the KL
// reference when kl_coeff > 0. Stats reflect the last inner epoch before
// its step.
std::pair<PolicyParams, UpdateStats> update_agent(const PolicyParams& params,
                                                  std::span<const UpdateSample> batch,
                                                  const GrpoConfig& cfg,
                                                  const PolicyParams* ref_params =
                                                      nullptr);

}  // namespace memrl
