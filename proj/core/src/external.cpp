#include "memrl/external.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>

#include <json.hpp>

#include "json_util.hpp"
#include "memrl/errors.hpp"

namespace memrl {

using detail::get_required;
using detail::json;

ExternalProcess::ExternalProcess(std::vector<std::string> argv) {
  if (argv.empty()) throw ConfigError("external process: empty command");
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  pid_t pid = fork();
  if (pid < 0) throw IoError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (std::string& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  child_pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
}

ExternalProcess::~ExternalProcess() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (child_pid_ > 0) {
    int status = 0;
    if (waitpid(child_pid_, &status, WNOHANG) == 0) {
      kill(child_pid_, SIGTERM);
      waitpid(child_pid_, &status, 0);
    }
  }
}

std::string ExternalProcess::round_trip(const std::string& request_line) {
  std::string line = request_line;
  line.push_back('\n');
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("external process write failed: ") +
                    std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  for (;;) {
    std::size_t nl = read_buf_.find('\n');
    if (nl != std::string::npos) {
      std::string out = read_buf_.substr(0, nl);
      read_buf_.erase(0, nl + 1);
      return out;
    }
    char buf[4096];
    ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("external process read failed: ") +
                    std::strerror(errno));
    }
    if (n == 0) throw IoError("external process closed its output");
    read_buf_.append(buf, static_cast<std::size_t>(n));
  }
}

namespace {

json history_to_json(const Episode& episode) {
  // Ground truth (is_evidence) stays on our side of the wire.
  json h = json::array();
  for (const HistoryItem& item : episode.history)
    h.push_back({{"id", item.id},
                 {"topic", item.topic},
                 {"features", item.features},
                 {"salience", item.salience}});
  return h;
}

json fine_to_json(const FineMemory& fine) {
  return json{{"included_ids", fine.included_ids}};
}

json profile_to_json(const CoarseProfile& profile) {
  json labels = json::object();
  for (const auto& [topic, label] : profile.predicted_labels)
    labels[std::to_string(topic)] = label;
  return json{{"labels", labels}};
}

json ask(ExternalProcess& process, const json& request) {
  std::string reply = process.round_trip(request.dump());
  try {
    return json::parse(reply);
  } catch (const json::exception& e) {
    throw DataError(std::string("external response parse error: ") + e.what());
  }
}

int parse_final_answer(const json& v) {
  if (v.is_number_integer()) {
    int a = v.get<int>();
    if (a < 0 || a >= EnvConfig::n_options)
      throw DataError("external final_answer out of range");
    return a;
  }
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.size() == 1 && s[0] >= 'a' && s[0] < 'a' + EnvConfig::n_options)
      return s[0] - 'a';
  }
  throw DataError("external final_answer must be an option index or letter a-d");
}

}  // namespace

std::pair<FineMemory, double> ExternalPolicy::extraction_act(const Episode& episode) {
  json req{{"agent", "extraction"}, {"state", {{"history", history_to_json(episode)}}}};
  json resp = ask(process_, req);
  const std::string ctx = "external extraction response";
  json action = get_required<json, DataError>(resp, "action", ctx);
  FineMemory fine;
  fine.included_ids =
      get_required<std::vector<int>, DataError>(action, "included_ids", ctx);
  std::sort(fine.included_ids.begin(), fine.included_ids.end());
  double lp = get_required<double, DataError>(resp, "logprob", ctx);
  for (int id : fine.included_ids)
    if (id < 0 || id >= static_cast<int>(episode.history.size()))
      throw DataError(ctx + ": included id outside history");
  return {std::move(fine), lp};
}

std::pair<CoarseProfile, double> ExternalPolicy::profile_act(const FineMemory& fine,
                                                             const Episode& episode) {
  json req{{"agent", "profile"},
           {"state",
            {{"fine_memory", fine_to_json(fine)}, {"history", history_to_json(episode)}}}};
  json resp = ask(process_, req);
  const std::string ctx = "external profile response";
  json action = get_required<json, DataError>(resp, "action", ctx);
  json labels = get_required<json, DataError>(action, "labels", ctx);
  CoarseProfile profile;
  for (const auto& [key, value] : labels.items()) {
    try {
      profile.predicted_labels[std::stoi(key)] = value.get<int>();
    } catch (const std::exception&) {
      throw DataError(ctx + ": bad label entry for topic \"" + key + "\"");
    }
  }
  double lp = get_required<double, DataError>(resp, "logprob", ctx);
  return {std::move(profile), lp};
}

std::pair<RetrievalOutcome, double> ExternalPolicy::retrieval_act(
    const FineMemory& fine, const CoarseProfile& profile, const Episode& episode,
    int k) {
  json options = json::array();
  for (const QueryOption& o : episode.query.options) options.push_back(o.text());
  json req{{"agent", "retrieval"},
           {"state",
            {{"fine_memory", fine_to_json(fine)},
             {"profile", profile_to_json(profile)},
             {"query", {{"features", episode.query.features}, {"options", options}}},
             {"k", k}}}};
  json resp = ask(process_, req);
  const std::string ctx = "external retrieval response";
  json action = get_required<json, DataError>(resp, "action", ctx);
  RetrievalOutcome outcome;
  outcome.retrieved_ids =
      get_required<std::vector<int>, DataError>(action, "information", ctx);
  if (!action.contains("final_answer"))
    throw DataError(ctx + ": missing key \"final_answer\"");
  outcome.answer = parse_final_answer(action.at("final_answer"));
  double lp = get_required<double, DataError>(resp, "logprob", ctx);
  for (int id : outcome.retrieved_ids) {
    if (!std::binary_search(fine.included_ids.begin(), fine.included_ids.end(), id))
      throw DataError(ctx + ": retrieved id not present in memory");
  }
  return {std::move(outcome), lp};
}

double profile_reward_external(ExternalProcess& process, const CoarseProfile& profile,
                               const Episode& episode) {
  json req{{"profile", profile_to_json(profile)},
           {"history", history_to_json(episode)}};
  json resp = ask(process, req);
  double score = get_required<double, DataError>(resp, "score", "external scorer response");
  if (!(score >= 0.0 && score <= 1.0))
    throw DataError("external scorer returned a score outside [0, 1]");
  return score;
}

EvalMetrics evaluate_external(ExternalProcess& process,
                              std::span<const Episode> episodes, int k,
                              const RewardConfig& reward_cfg) {
  if (episodes.empty()) throw ConfigError("evaluate_external: episodes must be non-empty");
  ExternalPolicy policy(process);
  EvalMetrics m;
  for (const Episode& ep : episodes) {
    auto [fine, lp0] = policy.extraction_act(ep);
    auto [profile, lp1] = policy.profile_act(fine, ep);
    auto [outcome, lp2] = policy.retrieval_act(fine, profile, ep, k);
    m.r_cons_f +=
        extraction_reward(fine.included_ids, ep.query.evidence_ids, reward_cfg.alpha);
    m.r_cons_c += profile_reward(profile, ep);
    m.r_ret += retrieval_reward(outcome.retrieved_ids, ep.query.evidence_ids,
                                reward_cfg.beta);
    m.accuracy += answer_reward(outcome.answer, ep.query.correct_option);
  }
  double n = static_cast<double>(episodes.size());
  m.accuracy /= n;
  m.r_cons_f /= n;
  m.r_cons_c /= n;
  m.r_ret /= n;
  return m;
}

}  // namespace memrl
