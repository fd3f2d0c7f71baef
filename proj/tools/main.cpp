// memrl command line: synthetic data generation, training, evaluation and
// cross-run reporting.
//
//   memrl gen-data --seed 1 --config env.json --out episodes.jsonl --count 64
//   memrl train    --config run.json --out runs/joint [--workers 4]
//   memrl eval     --policies runs/joint/policies.json --episodes eval.jsonl --out m.json
//   memrl report   --runs runs/joint runs/independent --out comparison.csv
//   memrl ablate   --config run.json --modes joint independent --out runs/ablation
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 I/O error.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memrl/env.hpp"
#include "memrl/errors.hpp"
#include "memrl/harness.hpp"

using namespace memrl;

namespace {

EnvConfig read_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  // accept either a bare env object or a full run config
  bool bare_env = j.is_object();
  for (const auto& [key, value] : j.items()) {
    if (key != "n_items" && key != "n_topics" && key != "n_labels" && key != "d" &&
        key != "evidence_size" && key != "noise_rate")
      bare_env = false;
  }
  std::string text = bare_env ? nlohmann::json{{"env", j}}.dump() : j.dump();
  RunConfig cfg = parse_run_config_json(text);
  return cfg.env;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

int run_gen_data(std::uint64_t seed, const std::string& config_path,
                 const std::string& out_path, int count) {
  EnvConfig cfg = config_path.empty() ? EnvConfig{} : read_env_config(config_path);
  cfg.validate();
  if (count < 0) throw ConfigError("--count must be >= 0");
  auto episodes = generate_dataset(seed, count, cfg);
  std::size_t written = save_episodes(episodes, out_path);
  std::cout << "wrote " << written << " episodes to " << out_path << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& out_dir, int workers) {
  RunConfig cfg = parse_run_config_file(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (cfg.output_dir.empty())
    throw ConfigError("no output directory (set --out or output_dir)");

  TrainOptions options;
  options.workers = workers;
  std::ofstream dump;
  if (cfg.dump_trajectories) {
    std::filesystem::create_directories(cfg.output_dir);
    dump.open(std::filesystem::path(cfg.output_dir) / "trajectories.jsonl");
    if (!dump) throw IoError("cannot open trajectory dump in " + cfg.output_dir);
    options.trajectory_sink = [&dump](const Trajectory& t) {
      dump << trajectory_to_json_line(t) << '\n';
    };
  }
  RunReport report = train(cfg, options);
  write_run_outputs(report, cfg.output_dir);
  std::cout << "mode " << mode_name(cfg.mode) << ": " << report.training.size()
            << " step records, final accuracy " << report.final_accuracy << "\n"
            << "outputs in " << cfg.output_dir << "\n";
  return 0;
}

int run_eval(const std::string& policies_path, const std::string& episodes_path,
             const std::string& out_path) {
  PolicyFile pf = load_policy_file(policies_path);
  auto episodes = load_episodes(episodes_path);
  EvalMetrics m = evaluate(pf.policies, episodes, pf.rewards.k, pf.rewards);
  nlohmann::json j{{"accuracy", m.accuracy},
                   {"r_cons_f", m.r_cons_f},
                   {"r_cons_c", m.r_cons_c},
                   {"r_ret", m.r_ret}};
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_report(const std::vector<std::string>& run_dirs, const std::string& out_path) {
  std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
  Comparison cmp = make_report(dirs);
  std::cout << cmp.to_text();
  if (!out_path.empty()) write_text(out_path, cmp.to_csv());
  return 0;
}

// Mode syntax for ablate: a mode name, optionally
// "ablation_fixed_weight=w0,w1,w2".
RunConfig mode_config(const RunConfig& base, const std::string& spec) {
  RunConfig cfg = base;
  auto eq = spec.find('=');
  std::string name = spec.substr(0, eq);
  cfg.mode = mode_from_name(name);
  if (eq != std::string::npos) {
    if (cfg.mode != RunMode::ablation_fixed_weight)
      throw ConfigError("mode \"" + name + "\" takes no weight argument");
    std::stringstream ss(spec.substr(eq + 1));
    std::string tok;
    std::vector<double> w;
    while (std::getline(ss, tok, ',')) w.push_back(std::stod(tok));
    if (w.size() != 3)
      throw ConfigError("ablation_fixed_weight needs three comma-separated weights");
    std::copy(w.begin(), w.end(), cfg.fixed_weights.begin());
  } else if (cfg.mode == RunMode::ablation_fixed_weight) {
    throw ConfigError("ablation_fixed_weight needs =w0,w1,w2");
  }
  cfg.validate();
  return cfg;
}

std::string mode_dir_name(const std::string& spec) {
  std::string name = spec;
  for (char& c : name)
    if (c == '=' || c == ',') c = '_';
  return name;
}

int run_ablate(const std::string& config_path, const std::vector<std::string>& modes,
               const std::string& out_dir, int workers) {
  RunConfig base = parse_run_config_file(config_path);
  std::string root = out_dir.empty() ? base.output_dir : out_dir;
  if (root.empty()) throw ConfigError("no output directory (set --out or output_dir)");
  if (modes.empty()) throw ConfigError("--modes must name at least one mode");

  TrainOptions options;
  options.workers = workers;
  std::vector<std::filesystem::path> dirs;
  for (const std::string& spec : modes) {
    RunConfig cfg = mode_config(base, spec);  // shared master_seed across modes
    cfg.output_dir = (std::filesystem::path(root) / mode_dir_name(spec)).string();
    RunReport report = train(cfg, options);
    write_run_outputs(report, cfg.output_dir);
    std::cout << mode_dir_name(spec) << ": final accuracy " << report.final_accuracy
              << "\n";
    dirs.push_back(cfg.output_dir);
  }
  Comparison cmp = make_report(dirs);
  std::cout << cmp.to_text();
  write_text((std::filesystem::path(root) / "comparison.csv").string(), cmp.to_csv());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale collaborative RL for a three-agent memory pipeline"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "generate synthetic episodes (JSONL)");
  std::uint64_t seed = 1;
  std::string gen_config, gen_out = "episodes.jsonl";
  int count = 128;
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--config", gen_config, "env config JSON (bare or {\"env\": ...})");
  gen->add_option("--out", gen_out, "output JSONL path");
  gen->add_option("--count", count, "number of episodes");

  auto* tr = app.add_subcommand("train", "train policies per a run config");
  std::string train_config, train_out;
  int workers = 1;
  tr->add_option("--config", train_config, "run config JSON")->required();
  tr->add_option("--out", train_out, "output directory (overrides output_dir)");
  tr->add_option("--workers", workers, "parallel group-sampling workers");

  auto* ev = app.add_subcommand("eval", "evaluate saved policies on an episode file");
  std::string eval_policies, eval_episodes, eval_out;
  ev->add_option("--policies", eval_policies, "policies.json from a run")->required();
  ev->add_option("--episodes", eval_episodes, "episodes JSONL")->required();
  ev->add_option("--out", eval_out, "metrics JSON output path");

  auto* rep = app.add_subcommand("report", "compare finished runs");
  std::vector<std::string> run_dirs;
  std::string report_out;
  rep->add_option("--runs", run_dirs, "run directories")->required()->expected(-1);
  rep->add_option("--out", report_out, "comparison CSV output path");

  auto* ab = app.add_subcommand("ablate", "run several modes under shared seeds");
  std::string ablate_config, ablate_out;
  std::vector<std::string> modes;
  int ablate_workers = 1;
  ab->add_option("--config", ablate_config, "base run config JSON")->required();
  ab->add_option("--modes", modes,
                 "mode names (ablation_fixed_weight=w0,w1,w2 for fixed weights)")
      ->required()
      ->expected(-1);
  ab->add_option("--out", ablate_out, "output root directory");
  ab->add_option("--workers", ablate_workers, "parallel group-sampling workers");

  try {
    app.parse(argc, argv);
    if (*gen) return run_gen_data(seed, gen_config, gen_out, count);
    if (*tr) return run_train(train_config, train_out, workers);
    if (*ev) return run_eval(eval_policies, eval_episodes, eval_out);
    if (*rep) return run_report(run_dirs, report_out);
    if (*ab) return run_ablate(ablate_config, modes, ablate_out, ablate_workers);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
