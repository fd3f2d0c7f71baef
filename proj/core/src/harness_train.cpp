#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "memrl/errors.hpp"
#include "memrl/harness.hpp"
#include "memrl/rng.hpp"

namespace memrl {

namespace {

// Seed-derivation tags for the independent logical streams of one run.
constexpr std::uint64_t kTrainDataTag = 0xD1;
constexpr std::uint64_t kEvalDataTag = 0xD2;
constexpr std::uint64_t kShuffleTag = 0xD3;
constexpr std::uint64_t kGroupTag = 0xD4;

// Deterministic strided parallel-for: results must be written by index.
void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) body(i);
    });
  for (std::thread& t : threads) t.join();
}

struct GroupResult {
  TrajectoryGroup group;
  std::array<double, 3> shares{};  // global-reward share per agent (logged)
  FinalRewards final_rewards;
};

// Modes whose shares vary per group (NDCG-adaptive credit).
bool mode_has_adaptive_credit(RunMode mode) {
  return mode == RunMode::joint || mode == RunMode::single_policy ||
         mode == RunMode::ablation_global_only;
}

// Per-group credit per mode: adaptive NDCG weights for joint-style modes,
// fixed shares for the ablations, the configured full share for the
// independent baseline.
void assign_credit(const RunConfig& cfg, GroupResult& result) {
  switch (cfg.mode) {
    case RunMode::joint:
    case RunMode::single_policy: {
      CreditWeights w = credit_weights(consistency_scores(result.group));
      result.shares = w.w;
      result.final_rewards =
          apply_global_shares(result.group, w.w, false, cfg.integration_form);
      return;
    }
    case RunMode::ablation_global_only: {
      CreditWeights w = credit_weights(consistency_scores(result.group));
      result.shares = w.w;
      result.final_rewards =
          apply_global_shares(result.group, w.w, /*zero_local=*/true,
                              cfg.integration_form);
      return;
    }
    case RunMode::ablation_local_only: {
      result.shares = {0.0, 0.0, 0.0};
      result.final_rewards =
          apply_global_shares(result.group, result.shares, false, cfg.integration_form);
      return;
    }
    case RunMode::ablation_equal_lg: {
      result.shares = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      result.final_rewards =
          apply_global_shares(result.group, result.shares, false, cfg.integration_form);
      return;
    }
    case RunMode::ablation_fixed_weight: {
      result.shares = cfg.fixed_weights;
      result.final_rewards =
          apply_global_shares(result.group, result.shares, false, cfg.integration_form);
      return;
    }
    case RunMode::independent: {
      double s = cfg.independent_global_share;
      result.shares = {s, s, s};
      result.final_rewards =
          apply_global_shares(result.group, result.shares, false, cfg.integration_form);
      return;
    }
  }
}

}  // namespace

EvalMetrics evaluate(const PolicySet& policies, std::span<const Episode> episodes,
                     int k, const RewardConfig& reward_cfg) {
  if (episodes.empty()) throw ConfigError("evaluate: episodes must be non-empty");
  PolicyParams ext = policies.params_for(AgentId::extraction);
  PolicyParams prof = policies.params_for(AgentId::profile);
  PolicyParams ret = policies.params_for(AgentId::retrieval);
  EvalMetrics m;
  for (const Episode& ep : episodes) {
    FineMemory fine = extraction_mode(ext, ep);
    CoarseProfile profile = profile_mode(prof, fine, ep);
    RetrievalOutcome outcome = retrieval_mode(ret, fine, profile, ep, k);
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

int convergence_step(std::span<const double> series, int window, double tol) {
  if (window < 1) throw ConfigError("convergence_step: window must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("convergence_step: tol must be > 0");
  const int n = static_cast<int>(series.size());
  if (n < window) return n;
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
  auto window_mean = [&](int start) {
    return (prefix[start + window] - prefix[start]) / window;
  };
  double plateau = window_mean(n - window);
  double tol_abs = plateau == 0.0 ? tol : tol * std::abs(plateau);
  int step = n - window;  // final window equals the plateau by definition
  for (int j = n - window - 1; j >= 0; --j) {
    if (std::abs(window_mean(j) - plateau) <= tol_abs)
      step = j;
    else
      break;
  }
  return step;
}

RunReport train(const RunConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (options.workers < 1) throw ConfigError("train: workers must be >= 1");

  const std::vector<Episode> train_eps = generate_dataset(
      derive_seed(cfg.master_seed, {kTrainDataTag}), cfg.n_train_episodes, cfg.env);
  const std::vector<Episode> eval_eps = generate_dataset(
      derive_seed(cfg.master_seed, {kEvalDataTag}), cfg.n_eval_episodes, cfg.env);

  PolicySet policies = init_policies(cfg.env, cfg.mode == RunMode::single_policy);
  const PolicySet reference = policies;

  RunReport report;
  report.config = cfg;

  std::vector<std::optional<AgentId>> phases;
  if (cfg.mode == RunMode::independent)
    phases = {AgentId::extraction, AgentId::profile, AgentId::retrieval};
  else
    phases = {std::nullopt};

  const int batches_per_epoch =
      std::max(1, cfg.n_train_episodes / cfg.grpo.batch_size);
  int global_step = 0;
  int last_eval_step = -1;

  auto run_eval = [&](int step) {
    report.evals.push_back({step, evaluate(policies, eval_eps, cfg.rewards.k,
                                           cfg.rewards)});
    last_eval_step = step;
  };

  for (std::size_t phase_idx = 0; phase_idx < phases.size(); ++phase_idx) {
    const std::optional<AgentId> phase_agent = phases[phase_idx];
    for (int epoch = 0; epoch < cfg.grpo.epochs; ++epoch) {
      std::vector<int> order(cfg.n_train_episodes);
      std::iota(order.begin(), order.end(), 0);
      Rng shuffle_rng(derive_seed(cfg.master_seed, {kShuffleTag, phase_idx,
                                                    static_cast<std::uint64_t>(epoch)}));
      for (int i = cfg.n_train_episodes - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.next_int(i + 1)]);

      for (int b = 0; b < batches_per_epoch; ++b) {
        ++global_step;
        const int begin = b * cfg.grpo.batch_size;
        const int end =
            std::min(cfg.n_train_episodes, begin + cfg.grpo.batch_size);
        const int batch_n = end - begin;

        std::vector<GroupResult> results(batch_n);
        parallel_for(batch_n, options.workers, [&](int j) {
          const Episode& ep = train_eps[order[begin + j]];
          std::uint64_t group_seed = derive_seed(
              cfg.master_seed,
              {kGroupTag, phase_idx, static_cast<std::uint64_t>(epoch),
               static_cast<std::uint64_t>(ep.episode_id)});
          results[j].group = sample_group(policies, ep, cfg.grpo.group_size,
                                          cfg.rewards.k, cfg.rewards, group_seed);
          assign_credit(cfg, results[j]);
        });

        if (options.trajectory_sink) {
          for (const GroupResult& r : results)
            for (const Trajectory& t : r.group.trajectories)
              options.trajectory_sink(t);
        }

        double r_global_mean = 0.0;
        std::size_t n_traj = 0;
        for (const GroupResult& r : results) {
          for (double g : r.group.global_rewards) r_global_mean += g;
          n_traj += r.group.global_rewards.size();
        }
        r_global_mean /= static_cast<double>(n_traj);

        std::vector<AgentId> updating;
        if (phase_agent)
          updating = {*phase_agent};
        else
          updating = {AgentId::extraction, AgentId::profile, AgentId::retrieval};

        for (AgentId agent : updating) {
          const int a = static_cast<int>(agent);
          std::vector<UpdateSample> samples;
          samples.reserve(n_traj);
          double r_local_sum = 0.0, weight_sum = 0.0;
          for (const GroupResult& r : results) {
            std::vector<double> adv =
                group_advantages(r.final_rewards.per_agent[a], cfg.grpo.std_floor);
            const Episode& ep = train_eps[r.group.episode_id];
            for (std::size_t i = 0; i < r.group.trajectories.size(); ++i) {
              const Trajectory& t = r.group.trajectories[i];
              StepState state;
              state.episode = &ep;
              if (agent != AgentId::extraction) state.fine = t.s1;
              if (agent == AgentId::retrieval) {
                state.profile = t.s2_profile;
                state.k = cfg.rewards.k;
              }
              samples.push_back({std::move(state), t.actions[a].action,
                                 t.actions[a].logprob, adv[i]});
              r_local_sum += r.group.local_rewards[a][i];
            }
            weight_sum += r.shares[a];
          }

          PolicyParams ref_params;
          const PolicyParams* ref_ptr = nullptr;
          if (cfg.grpo.kl_coeff > 0.0) {
            ref_params = reference.params_for(agent);
            ref_ptr = &ref_params;
          }
          auto [new_params, stats] =
              update_agent(policies.params_for(agent), samples, cfg.grpo, ref_ptr);
          policies.set_theta(agent, std::move(new_params.theta));

          StepRecord rec;
          rec.step = global_step;
          rec.agent = agent;
          rec.r_local_mean = r_local_sum / static_cast<double>(n_traj);
          rec.r_global_mean = r_global_mean;
          // fixed-share modes log the exact configured share
          rec.weight = mode_has_adaptive_credit(cfg.mode)
                           ? weight_sum / static_cast<double>(results.size())
                           : results[0].shares[a];
          rec.adv_std = stats.adv_std;
          rec.kl_mean = stats.kl_mean;
          rec.loss = stats.loss;
          report.training.push_back(rec);
        }

        if (options.on_step) options.on_step(global_step, phase_agent, policies);
        if (global_step % cfg.eval_every == 0) run_eval(global_step);
      }
    }
  }
  if (last_eval_step != global_step) run_eval(global_step);

  // Convergence bookkeeping from each agent's local-reward series.
  for (int a = 0; a < 3; ++a) {
    std::vector<double> series;
    for (const StepRecord& rec : report.training)
      if (static_cast<int>(rec.agent) == a) series.push_back(rec.r_local_mean);
    report.convergence_steps[a] =
        convergence_step(series, cfg.convergence_window, cfg.convergence_tol);
  }
  if (cfg.mode == RunMode::independent)
    report.total_steps = report.convergence_steps[0] + report.convergence_steps[1] +
                         report.convergence_steps[2];
  else
    report.total_steps = *std::max_element(report.convergence_steps.begin(),
                                           report.convergence_steps.end());
  report.final_accuracy = report.evals.back().metrics.accuracy;
  report.final_policies = policies;
  return report;
}

}  // namespace memrl
