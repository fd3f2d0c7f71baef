#include "memrl/rewards.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "memrl/errors.hpp"

namespace memrl {

void RewardConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("RewardConfig.alpha must be in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw ConfigError("RewardConfig.beta must be in [0, 1]");
  if (k < 1) throw ConfigError("RewardConfig.k must be >= 1");
}

namespace {

// |a ^ b| for ascending id vectors.
std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t n = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else
      ++n, ++i, ++j;
  }
  return n;
}

double coverage_mix(const std::vector<int>& picked, const std::vector<int>& evidence,
                    double coverage_weight, const char* what) {
  if (evidence.empty())
    throw ConfigError(std::string(what) + ": evidence set must be non-empty");
  double inter = static_cast<double>(intersection_size(picked, evidence));
  double uni = static_cast<double>(picked.size() + evidence.size()) - inter;
  return coverage_weight * (inter / static_cast<double>(evidence.size())) +
         (1.0 - coverage_weight) * (inter / uni);
}

}  // namespace

double extraction_reward(const std::vector<int>& included_ids,
                         const std::vector<int>& evidence_ids, double alpha) {
  return coverage_mix(included_ids, evidence_ids, alpha, "extraction_reward");
}

double retrieval_reward(const std::vector<int>& retrieved_ids,
                        const std::vector<int>& evidence_ids, double beta) {
  std::vector<int> sorted = retrieved_ids;
  std::sort(sorted.begin(), sorted.end());
  return coverage_mix(sorted, evidence_ids, beta, "retrieval_reward");
}

double profile_reward(const CoarseProfile& profile, const Episode& episode) {
  std::set<int> present;
  for (const HistoryItem& item : episode.history) present.insert(item.topic);
  if (present.empty()) return 0.0;
  int matched = 0;
  for (int topic : present) {
    auto it = profile.predicted_labels.find(topic);
    if (it != profile.predicted_labels.end() &&
        it->second == episode.preference.labels.at(topic))
      ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(present.size());
}

double answer_reward(int answer, int correct_option) {
  if (answer < 0 || answer >= EnvConfig::n_options)
    throw DataError("answer_reward: answer out of [0, 4)");
  if (correct_option < 0 || correct_option >= EnvConfig::n_options)
    throw DataError("answer_reward: correct_option out of [0, 4)");
  return answer == correct_option ? 1.0 : 0.0;
}

}  // namespace memrl
