#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config_json.hpp"
#include "json_util.hpp"
#include "memrl/errors.hpp"
#include "memrl/harness.hpp"

namespace memrl {

using detail::get_optional;
using detail::get_required;
using detail::json;
using detail::require_keys;

namespace {

constexpr std::array<const char*, 7> kModeNames = {
    "joint",
    "independent",
    "single_policy",
    "ablation_local_only",
    "ablation_global_only",
    "ablation_equal_lg",
    "ablation_fixed_weight",
};

}  // namespace

const char* mode_name(RunMode mode) { return kModeNames[static_cast<int>(mode)]; }

RunMode mode_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i)
    if (name == kModeNames[i]) return static_cast<RunMode>(i);
  throw ConfigError("unknown mode \"" + name + "\"");
}

void RunConfig::validate() const {
  env.validate();
  rewards.validate();
  grpo.validate();
  if (n_train_episodes < 1) throw ConfigError("RunConfig.n_train_episodes must be >= 1");
  if (n_eval_episodes < 1) throw ConfigError("RunConfig.n_eval_episodes must be >= 1");
  if (eval_every < 1) throw ConfigError("RunConfig.eval_every must be >= 1");
  if (convergence_window < 1)
    throw ConfigError("RunConfig.convergence_window must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("RunConfig.convergence_tol must be > 0");
  if (!(independent_global_share >= 0.0))
    throw ConfigError("RunConfig.independent_global_share must be >= 0");
  if (mode == RunMode::ablation_fixed_weight) {
    double sum = 0.0;
    for (double w : fixed_weights) {
      if (w < 0.0) throw ConfigError("RunConfig.fixed_weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("RunConfig.fixed_weights must sum to 1");
  }
}

namespace detail {

EnvConfig env_from_json(const json& j) {
  require_keys<ConfigError>(
      j, {"n_items", "n_topics", "n_labels", "d", "evidence_size", "noise_rate"},
      "env");
  EnvConfig cfg;
  cfg.n_items = get_optional<int, ConfigError>(j, "n_items", cfg.n_items, "env");
  cfg.n_topics = get_optional<int, ConfigError>(j, "n_topics", cfg.n_topics, "env");
  cfg.n_labels = get_optional<int, ConfigError>(j, "n_labels", cfg.n_labels, "env");
  cfg.d = get_optional<int, ConfigError>(j, "d", cfg.d, "env");
  cfg.evidence_size =
      get_optional<int, ConfigError>(j, "evidence_size", cfg.evidence_size, "env");
  cfg.noise_rate =
      get_optional<double, ConfigError>(j, "noise_rate", cfg.noise_rate, "env");
  return cfg;
}

json env_to_json(const EnvConfig& cfg) {
  return json{{"n_items", cfg.n_items},     {"n_topics", cfg.n_topics},
              {"n_labels", cfg.n_labels},   {"d", cfg.d},
              {"evidence_size", cfg.evidence_size}, {"noise_rate", cfg.noise_rate}};
}

RewardConfig rewards_from_json(const json& j) {
  require_keys<ConfigError>(j, {"alpha", "beta", "k"}, "rewards");
  RewardConfig cfg;
  cfg.alpha = get_optional<double, ConfigError>(j, "alpha", cfg.alpha, "rewards");
  cfg.beta = get_optional<double, ConfigError>(j, "beta", cfg.beta, "rewards");
  cfg.k = get_optional<int, ConfigError>(j, "k", cfg.k, "rewards");
  return cfg;
}

json rewards_to_json(const RewardConfig& cfg) {
  return json{{"alpha", cfg.alpha}, {"beta", cfg.beta}, {"k", cfg.k}};
}

GrpoConfig grpo_from_json(const json& j) {
  require_keys<ConfigError>(j,
                            {"clip_epsilon", "kl_coeff", "learning_rate", "group_size",
                             "batch_size", "epochs", "inner_epochs", "std_floor"},
                            "grpo");
  GrpoConfig cfg;
  cfg.clip_epsilon =
      get_optional<double, ConfigError>(j, "clip_epsilon", cfg.clip_epsilon, "grpo");
  cfg.kl_coeff = get_optional<double, ConfigError>(j, "kl_coeff", cfg.kl_coeff, "grpo");
  cfg.learning_rate =
      get_optional<double, ConfigError>(j, "learning_rate", cfg.learning_rate, "grpo");
  cfg.group_size = get_optional<int, ConfigError>(j, "group_size", cfg.group_size, "grpo");
  cfg.batch_size = get_optional<int, ConfigError>(j, "batch_size", cfg.batch_size, "grpo");
  cfg.epochs = get_optional<int, ConfigError>(j, "epochs", cfg.epochs, "grpo");
  cfg.inner_epochs =
      get_optional<int, ConfigError>(j, "inner_epochs", cfg.inner_epochs, "grpo");
  cfg.std_floor = get_optional<double, ConfigError>(j, "std_floor", cfg.std_floor, "grpo");
  return cfg;
}

json grpo_to_json(const GrpoConfig& cfg) {
  return json{{"clip_epsilon", cfg.clip_epsilon},
              {"kl_coeff", cfg.kl_coeff},
              {"learning_rate", cfg.learning_rate},
              {"group_size", cfg.group_size},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"inner_epochs", cfg.inner_epochs},
              {"std_floor", cfg.std_floor}};
}

}  // namespace detail

RunConfig parse_run_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  require_keys<ConfigError>(
      j,
      {"mode", "env", "rewards", "grpo", "master_seed", "n_train_episodes",
       "n_eval_episodes", "eval_every", "convergence_window", "convergence_tol",
       "fixed_weights", "independent_global_share", "integration_form",
       "dump_trajectories", "output_dir"},
      "config");
  RunConfig cfg;
  cfg.mode = mode_from_name(
      get_optional<std::string, ConfigError>(j, "mode", "joint", "config"));
  if (j.contains("env")) cfg.env = detail::env_from_json(j.at("env"));
  if (j.contains("rewards"))
    cfg.rewards = detail::rewards_from_json(j.at("rewards"));
  if (j.contains("grpo")) cfg.grpo = detail::grpo_from_json(j.at("grpo"));
  cfg.master_seed = get_optional<std::uint64_t, ConfigError>(j, "master_seed",
                                                             cfg.master_seed, "config");
  cfg.n_train_episodes = get_optional<int, ConfigError>(j, "n_train_episodes",
                                                        cfg.n_train_episodes, "config");
  cfg.n_eval_episodes = get_optional<int, ConfigError>(j, "n_eval_episodes",
                                                       cfg.n_eval_episodes, "config");
  cfg.eval_every = get_optional<int, ConfigError>(j, "eval_every", cfg.eval_every,
                                                  "config");
  cfg.convergence_window = get_optional<int, ConfigError>(
      j, "convergence_window", cfg.convergence_window, "config");
  cfg.convergence_tol = get_optional<double, ConfigError>(j, "convergence_tol",
                                                          cfg.convergence_tol, "config");
  if (j.contains("fixed_weights")) {
    if (cfg.mode != RunMode::ablation_fixed_weight)
      throw ConfigError("config: fixed_weights is only valid for ablation_fixed_weight");
    auto w = get_required<std::vector<double>, ConfigError>(j, "fixed_weights", "config");
    if (w.size() != 3) throw ConfigError("config: fixed_weights must have 3 entries");
    std::copy(w.begin(), w.end(), cfg.fixed_weights.begin());
  } else if (cfg.mode == RunMode::ablation_fixed_weight) {
    throw ConfigError("config: ablation_fixed_weight requires fixed_weights");
  }
  cfg.independent_global_share = get_optional<double, ConfigError>(
      j, "independent_global_share", cfg.independent_global_share, "config");
  std::string form = get_optional<std::string, ConfigError>(
      j, "integration_form", "local_plus_weighted_global", "config");
  if (form == "local_plus_weighted_global")
    cfg.integration_form = IntegrationForm::local_plus_weighted_global;
  else if (form == "global_plus_weighted_local")
    cfg.integration_form = IntegrationForm::global_plus_weighted_local;
  else
    throw ConfigError("config: unknown integration_form \"" + form + "\"");
  cfg.dump_trajectories = get_optional<bool, ConfigError>(j, "dump_trajectories",
                                                          cfg.dump_trajectories, "config");
  cfg.output_dir =
      get_optional<std::string, ConfigError>(j, "output_dir", cfg.output_dir, "config");
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_json(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j{{"mode", mode_name(cfg.mode)},
         {"env", detail::env_to_json(cfg.env)},
         {"rewards", detail::rewards_to_json(cfg.rewards)},
         {"grpo", detail::grpo_to_json(cfg.grpo)},
         {"master_seed", cfg.master_seed},
         {"n_train_episodes", cfg.n_train_episodes},
         {"n_eval_episodes", cfg.n_eval_episodes},
         {"eval_every", cfg.eval_every},
         {"convergence_window", cfg.convergence_window},
         {"convergence_tol", cfg.convergence_tol},
         {"independent_global_share", cfg.independent_global_share},
         {"integration_form",
          cfg.integration_form == IntegrationForm::local_plus_weighted_global
              ? "local_plus_weighted_global"
              : "global_plus_weighted_local"},
         {"dump_trajectories", cfg.dump_trajectories},
         {"output_dir", cfg.output_dir}};
  if (cfg.mode == RunMode::ablation_fixed_weight)
    j["fixed_weights"] = cfg.fixed_weights;
  return j.dump(2);
}

}  // namespace memrl
