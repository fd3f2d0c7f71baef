#include "memrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"
#include "memrl/errors.hpp"
#include "memrl/rng.hpp"

namespace memrl {

using detail::json;

namespace {

// Signal shaping. Evidence and non-evidence salience ranges are disjoint
// with a margin around 0.5, so a saturated linear policy can separate them
// exactly. The last feature coordinate carries the topic's preference
// label as a bounded offset; the query keeps it at 0 so retrieval scores
// are not polluted by it.
constexpr double kEvidenceSalienceLo = 0.55;
constexpr double kEvidenceSalienceHi = 0.95;
constexpr double kNoiseSalienceLo = 0.05;
constexpr double kNoiseSalienceHi = 0.45;
constexpr double kDistractorSalienceLo = 0.30;
constexpr double kDistractorSalienceHi = 0.48;
constexpr double kEvidenceQueryGain = 1.0;
constexpr double kEvidenceNoise = 0.4;
constexpr double kDistractorQueryGain = 0.9;
constexpr double kDistractorNoise = 0.45;
constexpr double kPreferenceJitter = 0.3;  // scaled by label spacing

}  // namespace

double preference_coordinate_center(int label, int n_labels) {
  if (n_labels < 2) return 0.0;
  return -1.0 + 2.0 * static_cast<double>(label) / (n_labels - 1);
}

void EnvConfig::validate() const {
  if (n_items < 1) throw ConfigError("EnvConfig.n_items must be >= 1");
  // Four distinct options need the correct topic plus two other topics.
  if (n_topics < 3) throw ConfigError("EnvConfig.n_topics must be >= 3");
  if (n_labels < 2) throw ConfigError("EnvConfig.n_labels must be >= 2");
  if (d < 2) throw ConfigError("EnvConfig.d must be >= 2");
  if (evidence_size < 1) throw ConfigError("EnvConfig.evidence_size must be >= 1");
  if (evidence_size > n_items)
    throw ConfigError("EnvConfig.evidence_size must be <= n_items");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    throw ConfigError("EnvConfig.noise_rate must be in [0, 1]");
}

std::string QueryOption::text() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "topic=%d;label=%d", topic, label);
  return buf;
}

QueryOption QueryOption::parse(const std::string& s) {
  QueryOption opt;
  if (std::sscanf(s.c_str(), "topic=%d;label=%d", &opt.topic, &opt.label) != 2)
    throw DataError("unparsable option text \"" + s + "\"");
  return opt;
}

Episode generate_episode(std::uint64_t seed, const EnvConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  Episode ep;
  ep.seed = seed;

  // Preference labels for every topic.
  for (int t = 0; t < cfg.n_topics; ++t)
    ep.preference.labels[t] = rng.next_int(cfg.n_labels);

  // Query content features; the preference coordinate stays 0.
  ep.query.features.assign(cfg.d, 0.0);
  for (int j = 0; j + 1 < cfg.d; ++j) ep.query.features[j] = rng.next_normal();

  // Topics, then evidence ids via partial Fisher-Yates.
  std::vector<int> topics(cfg.n_items);
  for (int i = 0; i < cfg.n_items; ++i) topics[i] = rng.next_int(cfg.n_topics);

  std::vector<int> ids(cfg.n_items);
  std::iota(ids.begin(), ids.end(), 0);
  for (int j = 0; j < cfg.evidence_size; ++j)
    std::swap(ids[j], ids[j + rng.next_int(cfg.n_items - j)]);
  std::vector<int> evidence(ids.begin(), ids.begin() + cfg.evidence_size);
  std::sort(evidence.begin(), evidence.end());
  std::vector<bool> is_evidence(cfg.n_items, false);
  for (int id : evidence) is_evidence[id] = true;

  std::set<int> evidence_topics;
  for (int id : evidence) evidence_topics.insert(topics[id]);
  std::vector<int> offtopic_pool;
  for (int t = 0; t < cfg.n_topics; ++t)
    if (!evidence_topics.count(t)) offtopic_pool.push_back(t);

  // Distractors: a noise_rate fraction of non-evidence items get features
  // near the query and an off-topic label.
  std::vector<int> non_evidence;
  for (int i = 0; i < cfg.n_items; ++i)
    if (!is_evidence[i]) non_evidence.push_back(i);
  int n_distractors =
      static_cast<int>(std::llround(cfg.noise_rate * non_evidence.size()));
  for (int j = 0; j < n_distractors; ++j)
    std::swap(non_evidence[j],
              non_evidence[j + rng.next_int(static_cast<int>(non_evidence.size()) - j)]);
  std::vector<bool> is_distractor(cfg.n_items, false);
  for (int j = 0; j < n_distractors; ++j) {
    int id = non_evidence[j];
    is_distractor[id] = true;
    if (!offtopic_pool.empty())
      topics[id] = offtopic_pool[rng.next_int(static_cast<int>(offtopic_pool.size()))];
  }

  // Items.
  double jitter = kPreferenceJitter / (cfg.n_labels - 1);
  ep.history.resize(cfg.n_items);
  for (int i = 0; i < cfg.n_items; ++i) {
    HistoryItem& item = ep.history[i];
    item.id = i;
    item.topic = topics[i];
    item.is_evidence = is_evidence[i];
    double u = rng.next_double();
    if (is_evidence[i])
      item.salience = kEvidenceSalienceLo + (kEvidenceSalienceHi - kEvidenceSalienceLo) * u;
    else if (is_distractor[i])
      item.salience =
          kDistractorSalienceLo + (kDistractorSalienceHi - kDistractorSalienceLo) * u;
    else
      item.salience = kNoiseSalienceLo + (kNoiseSalienceHi - kNoiseSalienceLo) * u;
    item.features.assign(cfg.d, 0.0);
    for (int j = 0; j + 1 < cfg.d; ++j) {
      double base = rng.next_normal();
      if (is_evidence[i])
        item.features[j] = kEvidenceQueryGain * ep.query.features[j] + kEvidenceNoise * base;
      else if (is_distractor[i])
        item.features[j] =
            kDistractorQueryGain * ep.query.features[j] + kDistractorNoise * base;
      else
        item.features[j] = base;
    }
    int label = ep.preference.labels.at(item.topic);
    item.features[cfg.d - 1] =
        preference_coordinate_center(label, cfg.n_labels) +
        jitter * (2.0 * rng.next_double() - 1.0);
  }

  ep.query.evidence_ids = evidence;

  // Options: the correct (majority evidence topic, preference label) pair,
  // a wrong-label twin, and two other-topic pairs. Other-topic labels are
  // forced wrong whenever the topic appears among the evidence, so a
  // perfect pipeline always has a strict best option.
  int t_star = -1;
  {
    std::map<int, int> counts;
    for (int id : evidence) counts[topics[id]]++;
    int best = -1;
    for (const auto& [t, c] : counts) {  // ascending topics: ties stay on the lowest
      if (c > best) {
        best = c;
        t_star = t;
      }
    }
  }
  int l_star = ep.preference.labels.at(t_star);
  auto wrong_label = [&](int topic) {
    return (ep.preference.labels.at(topic) + 1 + rng.next_int(cfg.n_labels - 1)) %
           cfg.n_labels;
  };
  auto option_label = [&](int topic) {
    return evidence_topics.count(topic) ? wrong_label(topic)
                                        : ep.preference.labels.at(topic);
  };

  std::vector<int> others;
  if (offtopic_pool.size() >= 2) {
    others = offtopic_pool;
  } else {
    for (int t = 0; t < cfg.n_topics; ++t)
      if (t != t_star) others.push_back(t);
  }
  int pick_b = rng.next_int(static_cast<int>(others.size()));
  int t_b = others[pick_b];
  others.erase(others.begin() + pick_b);
  int t_c = others[rng.next_int(static_cast<int>(others.size()))];

  std::array<QueryOption, 4> opts = {QueryOption{t_star, l_star},
                                     QueryOption{t_star, wrong_label(t_star)},
                                     QueryOption{t_b, option_label(t_b)},
                                     QueryOption{t_c, option_label(t_c)}};
  for (int j = 3; j > 0; --j) std::swap(opts[j], opts[rng.next_int(j + 1)]);
  ep.query.options = opts;
  for (int j = 0; j < 4; ++j)
    if (opts[j].topic == t_star && opts[j].label == l_star) ep.query.correct_option = j;

  return ep;
}

std::vector<Episode> generate_dataset(std::uint64_t master_seed, int count,
                                      const EnvConfig& cfg) {
  std::vector<Episode> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Episode ep = generate_episode(derive_seed(master_seed, {static_cast<std::uint64_t>(i)}),
                                  cfg);
    ep.episode_id = i;
    out.push_back(std::move(ep));
  }
  return out;
}

int majority_evidence_topic(const Episode& episode) {
  std::map<int, int> counts;
  for (int id : episode.query.evidence_ids)
    counts[episode.history.at(id).topic]++;
  int best_topic = -1, best = -1;
  for (const auto& [t, c] : counts) {
    if (c > best) {  // map iterates topics ascending: ties go to the lowest id
      best = c;
      best_topic = t;
    }
  }
  return best_topic;
}

int recompute_correct_option(const Episode& episode) {
  int t_star = majority_evidence_topic(episode);
  int l_star = episode.preference.labels.at(t_star);
  for (int j = 0; j < EnvConfig::n_options; ++j) {
    const QueryOption& o = episode.query.options[j];
    if (o.topic == t_star && o.label == l_star) return j;
  }
  throw DataError("episode " + std::to_string(episode.episode_id) +
                  ": no option matches the labeling rule");
}

void validate_episode(const Episode& episode) {
  const std::string who = "episode " + std::to_string(episode.episode_id);
  if (episode.episode_id < 0) throw DataError(who + ": episode_id negative");
  if (episode.history.empty()) throw DataError(who + ": history empty");
  std::size_t d = episode.history.front().features.size();
  for (std::size_t i = 0; i < episode.history.size(); ++i) {
    const HistoryItem& item = episode.history[i];
    if (item.id != static_cast<int>(i))
      throw DataError(who + ": history ids not contiguous from 0 (history[" +
                      std::to_string(i) + "].id)");
    if (item.topic < 0) throw DataError(who + ": history.topic negative");
    if (item.features.size() != d)
      throw DataError(who + ": history.features dimension mismatch");
    if (!(item.salience >= 0.0 && item.salience <= 1.0))
      throw DataError(who + ": history.salience out of [0, 1]");
    if (!episode.preference.labels.count(item.topic))
      throw DataError(who + ": preference missing a label for topic " +
                      std::to_string(item.topic));
  }
  if (episode.query.features.size() != d)
    throw DataError(who + ": query.features dimension mismatch");
  if (episode.query.evidence_ids.empty())
    throw DataError(who + ": query.evidence_ids empty");
  std::vector<int> seen;
  for (int id : episode.query.evidence_ids) {
    if (id < 0 || id >= static_cast<int>(episode.history.size()))
      throw DataError(who + ": query.evidence_ids outside history ids");
    seen.push_back(id);
  }
  if (std::adjacent_find(seen.begin(), seen.end(),
                         [](int a, int b) { return a >= b; }) != seen.end())
    throw DataError(who + ": query.evidence_ids not strictly ascending");
  for (const HistoryItem& item : episode.history) {
    bool listed = std::binary_search(episode.query.evidence_ids.begin(),
                                     episode.query.evidence_ids.end(), item.id);
    if (listed != item.is_evidence)
      throw DataError(who + ": history.is_evidence inconsistent with query.evidence_ids");
  }
  if (episode.query.correct_option < 0 ||
      episode.query.correct_option >= EnvConfig::n_options)
    throw DataError(who + ": query.correct_option out of range");
  if (recompute_correct_option(episode) != episode.query.correct_option)
    throw DataError(who + ": query.correct_option violates the labeling rule");
}

namespace {

json episode_to_json(const Episode& ep) {
  json h = json::array();
  for (const HistoryItem& item : ep.history)
    h.push_back({{"id", item.id},
                 {"topic", item.topic},
                 {"features", item.features},
                 {"is_evidence", item.is_evidence},
                 {"salience", item.salience}});
  json pref = json::object();
  for (const auto& [topic, label] : ep.preference.labels)
    pref[std::to_string(topic)] = label;
  json options = json::array();
  for (const QueryOption& o : ep.query.options) options.push_back(o.text());
  return json{{"episode_id", ep.episode_id},
              {"seed", ep.seed},
              {"history", h},
              {"preference", pref},
              {"query",
               {{"features", ep.query.features},
                {"evidence_ids", ep.query.evidence_ids},
                {"options", options},
                {"correct_option", ep.query.correct_option}}}};
}

Episode episode_from_json(const json& j, const std::string& ctx) {
  using detail::get_required;
  using detail::require_keys;
  Episode ep;
  require_keys<DataError>(j, {"episode_id", "seed", "history", "preference", "query"},
                          ctx);
  ep.episode_id = get_required<std::int64_t, DataError>(j, "episode_id", ctx);
  ep.seed = get_required<std::uint64_t, DataError>(j, "seed", ctx);
  const json& h = j.contains("history") ? j.at("history") : json::array();
  if (!h.is_array()) throw DataError(ctx + ": history must be an array");
  for (const json& it : h) {
    require_keys<DataError>(it, {"id", "topic", "features", "is_evidence", "salience"},
                            ctx + ".history");
    HistoryItem item;
    item.id = get_required<int, DataError>(it, "id", ctx + ".history");
    item.topic = get_required<int, DataError>(it, "topic", ctx + ".history");
    item.features =
        get_required<std::vector<double>, DataError>(it, "features", ctx + ".history");
    item.is_evidence =
        get_required<bool, DataError>(it, "is_evidence", ctx + ".history");
    item.salience = get_required<double, DataError>(it, "salience", ctx + ".history");
    ep.history.push_back(std::move(item));
  }
  const json& pref =
      j.contains("preference") ? j.at("preference") : json::object();
  if (!pref.is_object()) throw DataError(ctx + ": preference must be an object");
  for (const auto& [key, value] : pref.items()) {
    try {
      ep.preference.labels[std::stoi(key)] = value.get<int>();
    } catch (const std::exception&) {
      throw DataError(ctx + ": preference key \"" + key + "\" is not a topic id");
    }
  }
  if (!j.contains("query")) throw DataError(ctx + ": missing key \"query\"");
  const json& q = j.at("query");
  require_keys<DataError>(q, {"features", "evidence_ids", "options", "correct_option"},
                          ctx + ".query");
  ep.query.features =
      get_required<std::vector<double>, DataError>(q, "features", ctx + ".query");
  ep.query.evidence_ids =
      get_required<std::vector<int>, DataError>(q, "evidence_ids", ctx + ".query");
  auto option_texts =
      get_required<std::vector<std::string>, DataError>(q, "options", ctx + ".query");
  if (option_texts.size() != EnvConfig::n_options)
    throw DataError(ctx + ": query.options must have exactly 4 entries");
  for (int i = 0; i < EnvConfig::n_options; ++i)
    ep.query.options[i] = QueryOption::parse(option_texts[i]);
  ep.query.correct_option =
      get_required<int, DataError>(q, "correct_option", ctx + ".query");
  return ep;
}

}  // namespace

std::size_t save_episodes(std::span<const Episode> episodes,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const Episode& ep : episodes) {
    out << episode_to_json(ep).dump() << '\n';
    if (!out) throw IoError("write failed: " + path.string());
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
  return episodes.size();
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<Episode> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string ctx = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(ctx + ": parse error: " + e.what());
    }
    Episode ep = episode_from_json(j, ctx);
    validate_episode(ep);
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace memrl
