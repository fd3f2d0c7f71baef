#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "memrl/env.hpp"
#include "memrl/errors.hpp"
#include "memrl/rewards.hpp"
#include "memrl/rng.hpp"

using namespace memrl;

namespace {

// Independent bitmask oracle over a small universe; same arithmetic shape
// as the contract so the match is exact.
double mask_reward(unsigned picked, unsigned evidence, double w) {
  REQUIRE(evidence != 0);
  double inter = static_cast<double>(__builtin_popcount(picked & evidence));
  double uni = static_cast<double>(__builtin_popcount(picked) +
                                   __builtin_popcount(evidence)) -
               inter;
  return w * (inter / static_cast<double>(__builtin_popcount(evidence))) +
         (1.0 - w) * (inter / uni);
}

std::vector<int> mask_to_ids(unsigned mask) {
  std::vector<int> ids;
  for (int i = 0; i < 8; ++i)
    if (mask & (1u << i)) ids.push_back(i);
  return ids;
}

}  // namespace

TEST_CASE("extraction reward spot values") {
  CHECK(extraction_reward({1, 2, 3}, {1, 2, 3}, 0.8) == doctest::Approx(1.0));
  // E = {a, b}, M = {a, b, c, d}: 0.8 * 1 + 0.2 * (2/4)
  CHECK(extraction_reward({0, 1, 2, 3}, {0, 1}, 0.8) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(extraction_reward({5, 6}, {0, 1}, 0.8) == 0.0);
  CHECK(extraction_reward({}, {0, 1}, 0.8) == 0.0);
}

TEST_CASE("retrieval reward spot values") {
  CHECK(retrieval_reward({0, 1}, {0, 1}, 0.2) == doctest::Approx(1.0));
  // E' = {a}, E = {a, b}: 0.2 * (1/2) + 0.8 * (1/2)
  CHECK(retrieval_reward({0}, {0, 1}, 0.2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(retrieval_reward({7}, {0, 1}, 0.2) == 0.0);
  CHECK(retrieval_reward({}, {0, 1}, 0.2) == 0.0);
}

TEST_CASE("empty evidence is a precondition error") {
  CHECK_THROWS_AS(extraction_reward({0}, {}, 0.8), ConfigError);
  CHECK_THROWS_AS(retrieval_reward({0}, {}, 0.2), ConfigError);
}

TEST_CASE("set rewards match the brute-force oracle exactly") {
  for (double w : {0.8, 0.2, 0.5}) {
    for (unsigned evidence = 1; evidence < 256; ++evidence) {
      for (unsigned picked = 0; picked < 256; ++picked) {
        double expected = mask_reward(picked, evidence, w);
        CHECK(extraction_reward(mask_to_ids(picked), mask_to_ids(evidence), w) ==
              expected);
        CHECK(retrieval_reward(mask_to_ids(picked), mask_to_ids(evidence), w) ==
              expected);
      }
    }
  }
}

TEST_CASE("adding evidence helps, adding noise hurts") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> evidence, picked;
    for (int i = 0; i < 8; ++i) {
      if (rng.next_double() < 0.4) evidence.push_back(i);
      if (rng.next_double() < 0.4) picked.push_back(i);
    }
    if (evidence.empty()) continue;
    double alpha = 0.8;
    double base = extraction_reward(picked, evidence, alpha);
    for (int cand = 0; cand < 10; ++cand) {
      if (std::binary_search(picked.begin(), picked.end(), cand)) continue;
      std::vector<int> grown = picked;
      grown.insert(std::lower_bound(grown.begin(), grown.end(), cand), cand);
      double with = extraction_reward(grown, evidence, alpha);
      if (std::binary_search(evidence.begin(), evidence.end(), cand)) {
        CHECK(with > base);
      } else if (base > 0.0) {  // with no overlap both sides stay at 0
        CHECK(with < base);
      } else {
        CHECK(with == 0.0);
      }
    }
  }
}

TEST_CASE("reward is 1 exactly when the sets match") {
  for (unsigned evidence = 1; evidence < 64; ++evidence) {
    for (unsigned picked = 0; picked < 64; ++picked) {
      bool maximal = extraction_reward(mask_to_ids(picked), mask_to_ids(evidence), 0.8) ==
                     1.0;
      CHECK(maximal == (picked == evidence));
    }
  }
}

TEST_CASE("rewards stay in range") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    unsigned evidence = 1 + rng.next_int(255);
    unsigned picked = rng.next_int(256);
    double r = extraction_reward(mask_to_ids(picked), mask_to_ids(evidence), 0.8);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("profile rubric counts matched topics over present topics") {
  Episode ep = generate_episode(21, EnvConfig{});
  std::set<int> present;
  for (const HistoryItem& item : ep.history) present.insert(item.topic);

  CoarseProfile perfect;
  for (int t : present) perfect.predicted_labels[t] = ep.preference.labels.at(t);
  CHECK(profile_reward(perfect, ep) == 1.0);

  CHECK(profile_reward(CoarseProfile{}, ep) == 0.0);

  // Half right (default env has 2 labels, so flipping makes a mismatch).
  CoarseProfile half = perfect;
  int flipped = 0;
  for (int t : present) {
    if (flipped * 2 >= static_cast<int>(present.size())) break;
    half.predicted_labels[t] = 1 - half.predicted_labels[t];
    ++flipped;
  }
  CHECK(profile_reward(half, ep) ==
        doctest::Approx(1.0 - static_cast<double>(flipped) / present.size()));
}

TEST_CASE("missing topics count as mismatches, not skips") {
  Episode ep = generate_episode(22, EnvConfig{});
  std::set<int> present;
  for (const HistoryItem& item : ep.history) present.insert(item.topic);
  CoarseProfile partial;
  int t0 = *present.begin();
  partial.predicted_labels[t0] = ep.preference.labels.at(t0);
  CHECK(profile_reward(partial, ep) == doctest::Approx(1.0 / present.size()));
}

TEST_CASE("answer reward is the indicator") {
  CHECK(answer_reward(2, 2) == 1.0);
  CHECK(answer_reward(1, 3) == 0.0);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      double r = answer_reward(a, c);
      CHECK((r == 0.0 || r == 1.0));
    }
  CHECK_THROWS_AS(answer_reward(4, 0), DataError);
  CHECK_THROWS_AS(answer_reward(0, -1), DataError);
}

TEST_CASE("reward config defaults and validation") {
  RewardConfig cfg;
  CHECK(cfg.alpha == 0.8);
  CHECK(cfg.beta == 0.2);
  CHECK(cfg.k == 4);
  cfg.alpha = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
