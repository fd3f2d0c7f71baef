#pragma once

#include <string>
#include <vector>

#include "memrl/env.hpp"
#include "memrl/harness.hpp"
#include "memrl/policies.hpp"
#include "memrl/rewards.hpp"

namespace memrl {

// Newline-delimited JSON adapter to an external policy or scorer running
// as a child process: one request object per line on its stdin, one
// response object per line on its stdout. External policies are
// sample-only (no gradients) and are meant for evaluation runs.
//
// Requests:
//   {"agent":"extraction","state":{"history":[...]}}
//   {"agent":"profile","state":{"fine_memory":{...},"history":[...]}}
//   {"agent":"retrieval","state":{"fine_memory":{...},"profile":{...},
//                            "query":{"features":[...],"options":[...]},"k":4}}
//   {"profile":{...},"history":[...]}            (profile scorer)
// Responses:
//   {"action":{"included_ids":[...]},"logprob":-1.2}
//   {"action":{"labels":{"0":1}},"logprob":-0.7}
//   {"action":{"information":[3,7],"final_answer":"c"},"logprob":-2.1}
//   {"score":0.75}                               (profile scorer)
// final_answer accepts either an option index or a letter a-d.
class ExternalProcess {
 public:
  explicit ExternalProcess(std::vector<std::string> argv);
  ~ExternalProcess();

  ExternalProcess(const ExternalProcess&) = delete;
  ExternalProcess& operator=(const ExternalProcess&) = delete;

  // Sends one request line and reads one response line.
  std::string round_trip(const std::string& request_line);

 private:
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buf_;
};

class ExternalPolicy {
 public:
  explicit ExternalPolicy(ExternalProcess& process) : process_(process) {}

  std::pair<FineMemory, double> extraction_act(const Episode& episode);
  std::pair<CoarseProfile, double> profile_act(const FineMemory& fine,
                                               const Episode& episode);
  std::pair<RetrievalOutcome, double> retrieval_act(const FineMemory& fine,
                                                    const CoarseProfile& profile,
                                                    const Episode& episode, int k);

 private:
  ExternalProcess& process_;
};

// Profile reward delegated to an external scorer over the same transport.
double profile_reward_external(ExternalProcess& process, const CoarseProfile& profile,
                               const Episode& episode);

// Evaluation-mode rollout of the pipeline with external actions.
EvalMetrics evaluate_external(ExternalProcess& process,
                              std::span<const Episode> episodes, int k,
                              const RewardConfig& reward_cfg);

}  // namespace memrl
