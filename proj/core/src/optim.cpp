#include "memrl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memrl/errors.hpp"

namespace memrl {

void GrpoConfig::validate() const {
  if (!(clip_epsilon > 0.0)) throw ConfigError("GrpoConfig.clip_epsilon must be > 0");
  if (kl_coeff < 0.0) throw ConfigError("GrpoConfig.kl_coeff must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("GrpoConfig.learning_rate must be > 0");
  if (group_size < 2) throw ConfigError("GrpoConfig.group_size must be >= 2");
  if (batch_size < 1) throw ConfigError("GrpoConfig.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("GrpoConfig.epochs must be >= 1");
  if (inner_epochs < 1) throw ConfigError("GrpoConfig.inner_epochs must be >= 1");
  if (!(std_floor >= 0.0)) throw ConfigError("GrpoConfig.std_floor must be >= 0");
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor) {
  if (rewards.size() < 2)
    throw ConfigError("group_advantages: need at least 2 rewards");
  for (double r : rewards)
    if (!std::isfinite(r)) throw DataError("group_advantages: non-finite reward");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double std = std::sqrt(var / n);  // population std
  std::vector<double> adv(rewards.size(), 0.0);
  if (std < std_floor) return adv;  // uninformative group
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std;
  return adv;
}

double clipped_objective(double ratio, double advantage, double clip_epsilon) {
  double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_estimate(double logp_ref, double logp_cur) {
  // u - ln u - 1 with u = exp(logp_ref - logp_cur); expm1 keeps the
  // estimate exactly non-negative near u = 1.
  double diff = logp_ref - logp_cur;
  return std::expm1(diff) - diff;
}

std::pair<PolicyParams, UpdateStats> update_agent(const PolicyParams& params,
                                                  std::span<const UpdateSample> batch,
                                                  const GrpoConfig& cfg,
                                                  const PolicyParams* ref_params) {
  cfg.validate();
  PolicyParams current = params;
  UpdateStats stats;
  if (batch.empty()) return {current, stats};

  const double n = static_cast<double>(batch.size());
  {
    double mean = 0.0, var = 0.0;
    for (const UpdateSample& s : batch) mean += s.advantage;
    mean /= n;
    for (const UpdateSample& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
    stats.adv_mean = mean;
    stats.adv_std = std::sqrt(var / n);
  }

  std::vector<double> grad(current.theta.size());
  for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective = 0.0, ratio_sum = 0.0, kl_sum = 0.0;
    std::size_t index = 0;
    for (const UpdateSample& sample : batch) {
      double lp;
      std::vector<double> g;
      try {
        lp = logprob_of(current, sample.state, sample.action);
        g = logprob_grad(current, sample.state, sample.action);
      } catch (const Error& e) {
        throw DataError("update_agent: sample " + std::to_string(index) + ": " +
                        e.what());
      }
      double ratio = std::exp(lp - sample.old_logprob);
      objective += clipped_objective(ratio, sample.advantage, cfg.clip_epsilon);
      ratio_sum += ratio;
      // min(rho A, clip(rho) A) has gradient rho A grad(logp) unless the
      // clipped branch is strictly active, where it is constant.
      bool clipped_active =
          (sample.advantage >= 0.0 && ratio > 1.0 + cfg.clip_epsilon) ||
          (sample.advantage < 0.0 && ratio < 1.0 - cfg.clip_epsilon);
      double scale = clipped_active ? 0.0 : ratio * sample.advantage;
      if (cfg.kl_coeff > 0.0 && ref_params != nullptr) {
        double lp_ref = logprob_of(*ref_params, sample.state, sample.action);
        kl_sum += kl_estimate(lp_ref, lp);
        // d/dtheta (u - ln u - 1) = (1 - u) grad(logp)
        scale -= cfg.kl_coeff * (1.0 - std::exp(lp_ref - lp));
      }
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += scale * g[j];
      ++index;
    }
    double norm = 0.0;
    for (double& x : grad) {
      x /= n;
      norm += x * x;
    }
    stats.grad_norm = std::sqrt(norm);
    stats.ratio_mean = ratio_sum / n;
    stats.kl_mean = kl_sum / n;
    stats.loss = -(objective / n - cfg.kl_coeff * (kl_sum / n));
    for (std::size_t j = 0; j < grad.size(); ++j)
      current.theta[j] += cfg.learning_rate * grad[j];
  }
  return {current, stats};
}

}  // namespace memrl
