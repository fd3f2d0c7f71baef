#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <variant>
#include <vector>

#include "memrl/env.hpp"
#include "memrl/rng.hpp"

namespace memrl {

// The three pipeline agents as linear-feature stochastic policies with
// exact log-probabilities and analytic gradients:
//   extraction: per-item Bernoulli inclusion, logits theta . phi(item)
//   profile:    per-topic categorical label, logits theta_l . psi(topic)
//   retrieval:  Plackett-Luce top-k selection over memory items plus a
//               categorical answer head over the 4 query options
//
// Feature maps (fixed; they determine parameter dimensions):
//   phi(item)        = item.features ++ [salience, 1]
//   psi(topic)       = mean features of included items of the topic ++ [count, 1]
//   chi(item, query) = item.features * query.features (elementwise) ++ [salience, 1]
//   answer features per option: [share of retrieved items on the option's
//   topic, 1 if the profile predicts exactly the option's label,
//   1 if the profile covers the option's topic]

enum class AgentId { extraction = 0, profile = 1, retrieval = 2 };

inline constexpr std::array<const char*, 3> kAgentNames = {"extraction", "profile",
                                                           "retrieval"};
inline constexpr int kAnswerFeatureDim = 3;

const char* agent_name(AgentId id);
AgentId agent_from_name(const std::string& name);  // throws ConfigError

struct PolicyParams {
  AgentId agent_id = AgentId::extraction;
  // When true, theta uses the shared single-policy layout
  // [backbone | extraction head | profile head | retrieval head | answer head]
  // and agent_id only selects the role being played.
  bool shared_backbone = false;
  std::vector<double> theta;
};

// Parameter dimension of one agent for a given environment.
int theta_dim(AgentId agent, const EnvConfig& cfg);
// Dimension of the shared single-policy layout.
int shared_theta_dim(const EnvConfig& cfg);
void validate_params(const PolicyParams& params, const EnvConfig& cfg);

struct FineMemory {
  std::vector<int> included_ids;  // ascending

  bool operator==(const FineMemory&) const = default;
};

struct CoarseProfile {
  std::map<int, int> predicted_labels;  // topic -> label, one per covered topic

  bool operator==(const CoarseProfile&) const = default;
};

struct RetrievalOutcome {
  std::vector<int> retrieved_ids;  // selection order
  int answer = 0;

  bool operator==(const RetrievalOutcome&) const = default;
};

using AgentAction = std::variant<FineMemory, CoarseProfile, RetrievalOutcome>;

struct ActionRecord {
  AgentId agent_id = AgentId::extraction;
  AgentAction action;
  double logprob = 0.0;
};

// The observation an agent acted on. Fields beyond the acting agent's
// needs are left empty: extraction reads only the episode, profile adds
// the fine memory, retrieval adds the profile and k.
struct StepState {
  const Episode* episode = nullptr;
  FineMemory fine;
  CoarseProfile profile;
  int k = 0;
};

std::pair<FineMemory, double> extraction_act(const PolicyParams& params,
                                             const Episode& episode, Rng& rng);
std::pair<CoarseProfile, double> profile_act(const PolicyParams& params,
                                             const FineMemory& fine,
                                             const Episode& episode, Rng& rng);
std::pair<RetrievalOutcome, double> retrieval_act(const PolicyParams& params,
                                                  const FineMemory& fine,
                                                  const CoarseProfile& profile,
                                                  const Episode& episode, int k,
                                                  Rng& rng);

// Exact log-probability of an action; equals the sampling-time value for
// unchanged params. Throws DataError for infeasible actions.
double logprob_of(const PolicyParams& params, const StepState& state,
                  const AgentAction& action);
// Exact gradient of logprob_of with respect to theta.
std::vector<double> logprob_grad(const PolicyParams& params, const StepState& state,
                                 const AgentAction& action);

// Greedy (mode) actions used by evaluation: inclusion iff p > 1/2, argmax
// labels and answer, top-k selection by score.
FineMemory extraction_mode(const PolicyParams& params, const Episode& episode);
CoarseProfile profile_mode(const PolicyParams& params, const FineMemory& fine,
                           const Episode& episode);
RetrievalOutcome retrieval_mode(const PolicyParams& params, const FineMemory& fine,
                                const CoarseProfile& profile, const Episode& episode,
                                int k);

// The set of policies driving one pipeline. In shared mode all agents act
// through one parameter vector (the single-policy variant).
struct PolicySet {
  bool shared = false;
  std::array<std::vector<double>, 3> thetas;  // heterogeneous mode
  std::vector<double> shared_theta;           // shared mode

  PolicyParams params_for(AgentId agent) const;
  void set_theta(AgentId agent, std::vector<double> theta);

  bool operator==(const PolicySet&) const = default;
};

// Zero-initialized (or small-noise) policies of the right dimensions.
PolicySet init_policies(const EnvConfig& cfg, bool shared, double init_scale = 0.0,
                        Rng* rng = nullptr);

// Hand-set saturated parameters that select exactly the evidence, decode
// the true preference labels and answer correctly on generated episodes.
PolicySet oracle_policies(const EnvConfig& cfg);

}  // namespace memrl
