#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "memrl/env.hpp"
#include "memrl/errors.hpp"
#include "test_helpers.hpp"

using namespace memrl;
using memrl::testing::make_temp_dir;

TEST_CASE("config validation names the offending field") {
  EnvConfig cfg;
  cfg.evidence_size = 100;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("evidence_size"), ConfigError);
  cfg = EnvConfig{};
  cfg.n_labels = 1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("n_labels"), ConfigError);
  cfg = EnvConfig{};
  cfg.d = 1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("d"), ConfigError);
  cfg = EnvConfig{};
  cfg.noise_rate = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("noise_rate"), ConfigError);
  cfg = EnvConfig{};
  cfg.n_topics = 2;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("n_topics"), ConfigError);
}

TEST_CASE("generated episode has the configured shape") {
  EnvConfig cfg;  // defaults: 40 items, evidence 4
  Episode ep = generate_episode(42, cfg);
  CHECK(ep.history.size() == 40);
  CHECK(ep.query.evidence_ids.size() == 4);
  CHECK(ep.query.features.size() == 8);
  for (const HistoryItem& item : ep.history) CHECK(item.features.size() == 8);
  CHECK(ep.seed == 42);
}

TEST_CASE("generation is a pure function of (seed, cfg)") {
  EnvConfig cfg;
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 31337ULL}) {
    Episode a = generate_episode(seed, cfg);
    Episode b = generate_episode(seed, cfg);
    CHECK(a == b);
  }
  CHECK_FALSE(generate_episode(1, cfg) == generate_episode(2, cfg));
}

TEST_CASE("evidence ids are contained in history and flagged consistently") {
  EnvConfig cfg;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Episode ep = generate_episode(seed, cfg);
    std::set<int> evidence(ep.query.evidence_ids.begin(), ep.query.evidence_ids.end());
    CHECK(evidence.size() == ep.query.evidence_ids.size());
    for (int id : evidence) {
      REQUIRE(id >= 0);
      REQUIRE(id < cfg.n_items);
    }
    for (const HistoryItem& item : ep.history)
      CHECK(item.is_evidence == (evidence.count(item.id) > 0));
  }
}

TEST_CASE("correct_option is recomputable from the labeling rule") {
  for (EnvConfig cfg : {EnvConfig{}, EnvConfig{.n_items = 12,
                                               .n_topics = 3,
                                               .n_labels = 3,
                                               .d = 4,
                                               .evidence_size = 6,
                                               .noise_rate = 0.5}}) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      Episode ep = generate_episode(seed ^ 0xABCD, cfg);
      CHECK(recompute_correct_option(ep) == ep.query.correct_option);
      CHECK_NOTHROW(validate_episode(ep));
    }
  }
}

TEST_CASE("evidence salience is separated from the rest") {
  EnvConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Episode ep = generate_episode(seed * 7 + 1, cfg);
    for (const HistoryItem& item : ep.history) {
      if (item.is_evidence)
        CHECK(item.salience > 0.5);
      else
        CHECK(item.salience < 0.5);
    }
  }
}

TEST_CASE("every history topic has a preference label") {
  EnvConfig cfg;
  Episode ep = generate_episode(7, cfg);
  for (const HistoryItem& item : ep.history)
    CHECK(ep.preference.labels.count(item.topic) == 1);
}

TEST_CASE("dataset generation assigns contiguous episode ids") {
  auto eps = generate_dataset(99, 5, EnvConfig{});
  REQUIRE(eps.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(eps[i].episode_id == i);
  CHECK_FALSE(eps[0].history == eps[1].history);
}

TEST_CASE("save writes one line per episode and round-trips") {
  auto dir = make_temp_dir("memrl_env");
  auto path = dir / "episodes.jsonl";
  auto eps = generate_dataset(5, 3, EnvConfig{});

  CHECK(save_episodes(eps, path) == 3);
  std::ifstream in(path);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);

  auto loaded = load_episodes(path);
  REQUIRE(loaded.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(loaded[i] == eps[i]);

  SUBCASE("empty sequence gives an empty file") {
    auto empty_path = dir / "empty.jsonl";
    CHECK(save_episodes({}, empty_path) == 0);
    CHECK(load_episodes(empty_path).empty());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed line reports its 1-based number") {
  auto dir = make_temp_dir("memrl_env");
  auto path = dir / "bad.jsonl";
  auto eps = generate_dataset(11, 2, EnvConfig{});
  {
    std::ofstream out(path);
    std::ifstream in([&] {
      auto tmp = dir / "ok.jsonl";
      save_episodes(eps, tmp);
      return tmp;
    }());
    std::string line;
    std::getline(in, line);
    out << line << '\n';
    std::getline(in, line);
    out << line.substr(0, line.size() / 2) << '\n';  // truncated JSON
  }
  CHECK_THROWS_WITH_AS(load_episodes(path), doctest::Contains("line 2"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invariant violations name the episode and field") {
  Episode ep = generate_episode(3, EnvConfig{});
  ep.episode_id = 9;

  SUBCASE("correct_option off the labeling rule") {
    ep.query.correct_option = (ep.query.correct_option + 1) % 4;
    CHECK_THROWS_WITH_AS(validate_episode(ep), doctest::Contains("episode 9"),
                         DataError);
    CHECK_THROWS_WITH_AS(validate_episode(ep), doctest::Contains("correct_option"),
                         DataError);
  }
  SUBCASE("evidence id outside history") {
    ep.query.evidence_ids.push_back(1000);
    CHECK_THROWS_WITH_AS(validate_episode(ep), doctest::Contains("evidence_ids"),
                         DataError);
  }
  SUBCASE("empty evidence") {
    ep.query.evidence_ids.clear();
    for (HistoryItem& item : ep.history) item.is_evidence = false;
    CHECK_THROWS_WITH_AS(validate_episode(ep), doctest::Contains("evidence_ids"),
                         DataError);
  }
  SUBCASE("salience out of range") {
    ep.history[0].salience = 1.5;
    CHECK_THROWS_WITH_AS(validate_episode(ep), doctest::Contains("salience"), DataError);
  }
}

TEST_CASE("option text round-trips") {
  QueryOption opt{3, 1};
  CHECK(opt.text() == "topic=3;label=1");
  CHECK(QueryOption::parse(opt.text()) == opt);
  CHECK_THROWS_AS(QueryOption::parse("garbage"), DataError);
}

TEST_CASE("missing file raises an I/O error") {
  CHECK_THROWS_AS(load_episodes("/nonexistent/nowhere.jsonl"), IoError);
}
