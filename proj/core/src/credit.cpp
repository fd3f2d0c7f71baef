#include "memrl/credit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memrl/errors.hpp"

namespace memrl {

double ndcg_consistency(std::span<const double> local, std::span<const double> global) {
  if (local.size() != global.size())
    throw DataError("ndcg_consistency: local/global length mismatch");
  if (local.size() < 2) throw DataError("ndcg_consistency: need at least 2 entries");
  for (double x : local)
    if (!std::isfinite(x)) throw DataError("ndcg_consistency: non-finite local reward");
  for (double x : global)
    if (!std::isfinite(x)) throw DataError("ndcg_consistency: non-finite global reward");

  const std::size_t n = local.size();
  double mn = *std::min_element(global.begin(), global.end());
  std::vector<double> rel(n);
  for (std::size_t i = 0; i < n; ++i) rel[i] = global[i] - mn;

  // Descending key, ties toward the lower trajectory index.
  auto order_by = [n](std::span<const double> key) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (key[a] != key[b]) return key[a] > key[b];
      return a < b;
    });
    return idx;
  };
  std::vector<std::size_t> by_local = order_by(local);
  std::vector<std::size_t> by_rel = order_by(rel);

  double dcg = 0.0, idcg = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double discount = std::log2(static_cast<double>(p) + 2.0);
    dcg += rel[by_local[p]] / discount;
    idcg += rel[by_rel[p]] / discount;
  }
  if (idcg == 0.0) return 1.0;  // constant global rewards carry no ranking signal
  return std::clamp(dcg / idcg, 0.0, 1.0);
}

ConsistencyScores consistency_scores(const TrajectoryGroup& group) {
  ConsistencyScores scores;
  for (int n = 0; n < 3; ++n)
    scores.v[n] = ndcg_consistency(group.local_rewards[n], group.global_rewards);
  return scores;
}

CreditWeights credit_weights(const ConsistencyScores& scores) {
  for (double x : scores.v)
    if (!std::isfinite(x)) throw DataError("credit_weights: non-finite score");
  double m = *std::max_element(scores.v.begin(), scores.v.end());
  CreditWeights weights;
  double sum = 0.0;
  for (int n = 0; n < 3; ++n) {
    weights.w[n] = std::exp(scores.v[n] - m);
    sum += weights.w[n];
  }
  for (int n = 0; n < 3; ++n) weights.w[n] /= sum;
  return weights;
}

FinalRewards apply_global_shares(const TrajectoryGroup& group,
                                 const std::array<double, 3>& shares, bool zero_local,
                                 IntegrationForm form) {
  const std::size_t g = group.global_rewards.size();
  FinalRewards out;
  for (int n = 0; n < 3; ++n) {
    if (group.local_rewards[n].size() != g)
      throw DataError("reward vectors inconsistent with the group size");
    out.per_agent[n].resize(g);
    for (std::size_t i = 0; i < g; ++i) {
      double local = zero_local ? 0.0 : group.local_rewards[n][i];
      double global = group.global_rewards[i];
      out.per_agent[n][i] = form == IntegrationForm::local_plus_weighted_global
                                ? local + shares[n] * global
                                : global + shares[n] * local;
    }
  }
  return out;
}

FinalRewards integrate_rewards(const TrajectoryGroup& group,
                               const CreditWeights& weights, IntegrationForm form) {
  double sum = 0.0;
  for (double w : weights.w) {
    if (!(w > 0.0)) throw DataError("integrate_rewards: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("integrate_rewards: weights must sum to 1");
  return apply_global_shares(group, weights.w, /*zero_local=*/false, form);
}

}  // namespace memrl
