#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace memrl {

// Synthetic personalized-conversation environment. Each episode is one
// (history, query) pair: a list of history items, a hidden per-topic user
// preference, and a 4-option query whose correct option is determined by
// the evidence items and the preference.

struct EnvConfig {
  int n_items = 40;
  int n_topics = 6;
  int n_labels = 2;
  int d = 8;  // feature dimension; last coordinate carries the preference signal
  int evidence_size = 4;
  double noise_rate = 0.25;  // fraction of non-evidence items turned into distractors

  static constexpr int n_options = 4;

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const EnvConfig&) const = default;
};

struct HistoryItem {
  int id = 0;
  int topic = 0;
  std::vector<double> features;
  bool is_evidence = false;
  double salience = 0.0;

  bool operator==(const HistoryItem&) const = default;
};

struct UserPreference {
  std::map<int, int> labels;  // topic -> label

  bool operator==(const UserPreference&) const = default;
};

// One answer option, a (topic, label) claim. Serialized as the string
// "topic=T;label=L".
struct QueryOption {
  int topic = 0;
  int label = 0;

  std::string text() const;
  static QueryOption parse(const std::string& s);  // throws DataError

  bool operator==(const QueryOption&) const = default;
};

struct Query {
  std::vector<double> features;
  std::vector<int> evidence_ids;  // ascending, non-empty
  std::array<QueryOption, EnvConfig::n_options> options;
  int correct_option = 0;

  bool operator==(const Query&) const = default;
};

struct Episode {
  std::int64_t episode_id = 0;
  std::vector<HistoryItem> history;
  UserPreference preference;
  Query query;
  std::uint64_t seed = 0;

  bool operator==(const Episode&) const = default;
};

// Pure function of (seed, cfg); regenerating reproduces the episode
// bit-for-bit. episode_id is left at 0 (callers assign their own).
Episode generate_episode(std::uint64_t seed, const EnvConfig& cfg);

// count episodes with ids 0..count-1, per-episode seeds derived from
// master_seed.
std::vector<Episode> generate_dataset(std::uint64_t master_seed, int count,
                                      const EnvConfig& cfg);

// The answer-labeling rule: majority topic among evidence items (ties
// toward the lowest topic id) combined with that topic's preference label.
int majority_evidence_topic(const Episode& episode);
int recompute_correct_option(const Episode& episode);

// Center of the bounded band the last feature coordinate is drawn from
// for items whose topic carries the given preference label. Exposed so
// hand-set policies can decode labels exactly.
double preference_coordinate_center(int label, int n_labels);

// Re-checks every type invariant; throws DataError naming episode_id and
// the failing field.
void validate_episode(const Episode& episode);

// JSONL persistence, one episode object per line. Returns lines written.
std::size_t save_episodes(std::span<const Episode> episodes,
                          const std::filesystem::path& path);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

}  // namespace memrl
