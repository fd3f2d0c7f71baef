#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memrl/credit.hpp"
#include "memrl/env.hpp"
#include "memrl/optim.hpp"
#include "memrl/policies.hpp"
#include "memrl/rewards.hpp"
#include "memrl/trajectory.hpp"

namespace memrl {

// Training and evaluation orchestration: the joint pipeline with adaptive
// credit, the independent baseline (one agent at a time, others frozen),
// the shared single-policy variant and the credit-assignment ablations.

enum class RunMode {
  joint,
  independent,
  single_policy,
  ablation_local_only,
  ablation_global_only,
  ablation_equal_lg,
  ablation_fixed_weight,
};

const char* mode_name(RunMode mode);
RunMode mode_from_name(const std::string& name);  // throws ConfigError

struct RunConfig {
  RunMode mode = RunMode::joint;
  EnvConfig env;
  RewardConfig rewards;
  GrpoConfig grpo;
  std::uint64_t master_seed = 1;
  int n_train_episodes = 512;
  int n_eval_episodes = 128;
  int eval_every = 5;
  int convergence_window = 20;
  double convergence_tol = 0.05;
  // ablation_fixed_weight only; must sum to 1.
  std::array<double, 3> fixed_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  // Share of the global reward each agent receives in independent mode.
  double independent_global_share = 1.0;
  IntegrationForm integration_form = IntegrationForm::local_plus_weighted_global;
  bool dump_trajectories = false;
  std::string output_dir;

  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Strict JSON mapping of RunConfig (unknown keys are an error).
RunConfig parse_run_config_json(const std::string& text);
RunConfig parse_run_config_file(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

struct EvalMetrics {
  double accuracy = 0.0;
  double r_cons_f = 0.0;
  double r_cons_c = 0.0;
  double r_ret = 0.0;
};

// Greedy-action evaluation; pure in (policies, episodes, k, reward_cfg).
EvalMetrics evaluate(const PolicySet& policies, std::span<const Episode> episodes,
                     int k, const RewardConfig& reward_cfg);

// First step s such that every length-`window` moving average from s on
// stays within tol * |plateau| (tol absolute when the plateau is 0) of the
// plateau, the mean of the final window. Returns the series length when
// the series is shorter than the window.
int convergence_step(std::span<const double> series, int window, double tol);

struct StepRecord {
  int step = 0;  // 1-based, global across phases
  AgentId agent = AgentId::extraction;
  double r_local_mean = 0.0;
  double r_global_mean = 0.0;
  double weight = 0.0;
  double adv_std = 0.0;
  double kl_mean = 0.0;
  double loss = 0.0;
};

struct EvalRecord {
  int step = 0;
  EvalMetrics metrics;
};

struct RunReport {
  RunConfig config;
  std::vector<StepRecord> training;
  std::vector<EvalRecord> evals;
  std::array<int, 3> convergence_steps{};
  int total_steps = 0;  // independent: sum of per-agent steps; otherwise max
  double final_accuracy = 0.0;
  PolicySet final_policies;
};

struct TrainOptions {
  int workers = 1;
  // Observer called after every update step with the current policies;
  // phase_agent is set in independent mode.
  std::function<void(int step, std::optional<AgentId> phase_agent,
                     const PolicySet& policies)>
      on_step;
  std::function<void(const Trajectory&)> trajectory_sink;
};

RunReport train(const RunConfig& cfg, const TrainOptions& options = {});

// Output files for one run: metrics.csv, eval.csv, report.json,
// policies.json under dir.
void write_run_outputs(const RunReport& report, const std::filesystem::path& dir);
RunReport load_run_report(const std::filesystem::path& dir);

struct PolicyFile {
  PolicySet policies;
  EnvConfig env;
  RewardConfig rewards;
};

void save_policy_file(const PolicyFile& file, const std::filesystem::path& path);
PolicyFile load_policy_file(const std::filesystem::path& path);

// Cross-run comparison (the bookkeeping table): per-agent convergence
// steps recomputed from each run's local-reward series, totals per the
// mode's semantics, final accuracy and mean credit weights.
struct RunSummary {
  std::string name;
  std::string mode;
  std::array<int, 3> convergence_steps{};
  int total_steps = 0;
  double final_accuracy = 0.0;
  std::array<double, 3> mean_weights{};
};

struct Comparison {
  std::vector<RunSummary> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

Comparison make_report(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace memrl
