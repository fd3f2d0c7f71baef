#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "config_json.hpp"
#include "fmt_util.hpp"
#include "json_util.hpp"
#include "memrl/errors.hpp"
#include "memrl/harness.hpp"

namespace memrl {

using detail::format_double;
using detail::get_optional;
using detail::get_required;
using detail::json;
using detail::require_keys;

namespace {

json policy_set_to_json(const PolicySet& set) {
  json j{{"shared", set.shared}};
  if (set.shared) {
    j["shared_theta"] = set.shared_theta;
  } else {
    json agents = json::object();
    for (int a = 0; a < 3; ++a)
      agents[agent_name(static_cast<AgentId>(a))] = set.thetas[a];
    j["agents"] = agents;
  }
  return j;
}

PolicySet policy_set_from_json(const json& j, const std::string& ctx) {
  require_keys<DataError>(j, {"shared", "shared_theta", "agents"}, ctx);
  PolicySet set;
  set.shared = get_required<bool, DataError>(j, "shared", ctx);
  if (set.shared) {
    set.shared_theta =
        get_required<std::vector<double>, DataError>(j, "shared_theta", ctx);
  } else {
    if (!j.contains("agents")) throw DataError(ctx + ": missing key \"agents\"");
    const json& agents = j.at("agents");
    require_keys<DataError>(agents, {"extraction", "profile", "retrieval"}, ctx);
    for (int a = 0; a < 3; ++a)
      set.thetas[a] = get_required<std::vector<double>, DataError>(
          agents, agent_name(static_cast<AgentId>(a)), ctx);
  }
  return set;
}

std::string metrics_csv(const RunReport& report) {
  std::string out = "step,agent,r_local_mean,r_global_mean,weight,adv_std,kl_mean,loss\n";
  for (const StepRecord& r : report.training) {
    out += std::to_string(r.step);
    out += ',';
    out += agent_name(r.agent);
    out += ',';
    out += format_double(r.r_local_mean);
    out += ',';
    out += format_double(r.r_global_mean);
    out += ',';
    out += format_double(r.weight);
    out += ',';
    out += format_double(r.adv_std);
    out += ',';
    out += format_double(r.kl_mean);
    out += ',';
    out += format_double(r.loss);
    out += '\n';
  }
  return out;
}

std::string eval_csv(const RunReport& report) {
  std::string out = "step,accuracy,r_cons_f,r_cons_c,r_ret\n";
  for (const EvalRecord& r : report.evals) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.metrics.accuracy);
    out += ',';
    out += format_double(r.metrics.r_cons_f);
    out += ',';
    out += format_double(r.metrics.r_cons_c);
    out += ',';
    out += format_double(r.metrics.r_ret);
    out += '\n';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_run_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output dir " + dir.string() + ": " + ec.message());

  write_file(dir / "metrics.csv", metrics_csv(report));
  write_file(dir / "eval.csv", eval_csv(report));

  json training = json::array();
  for (const StepRecord& r : report.training)
    training.push_back({{"step", r.step},
                        {"agent", agent_name(r.agent)},
                        {"r_local_mean", r.r_local_mean},
                        {"r_global_mean", r.r_global_mean},
                        {"weight", r.weight},
                        {"adv_std", r.adv_std},
                        {"kl_mean", r.kl_mean},
                        {"loss", r.loss}});
  json evals = json::array();
  for (const EvalRecord& r : report.evals)
    evals.push_back({{"step", r.step},
                     {"accuracy", r.metrics.accuracy},
                     {"r_cons_f", r.metrics.r_cons_f},
                     {"r_cons_c", r.metrics.r_cons_c},
                     {"r_ret", r.metrics.r_ret}});
  json j{{"config", json::parse(run_config_to_json(report.config))},
         {"training", training},
         {"evals", evals},
         {"convergence_steps",
          {{"extraction", report.convergence_steps[0]},
           {"profile", report.convergence_steps[1]},
           {"retrieval", report.convergence_steps[2]}}},
         {"total_steps", report.total_steps},
         {"final_accuracy", report.final_accuracy},
         {"policies", policy_set_to_json(report.final_policies)}};
  write_file(dir / "report.json", j.dump(2) + "\n");

  PolicyFile pf{report.final_policies, report.config.env, report.config.rewards};
  save_policy_file(pf, dir / "policies.json");
}

RunReport load_run_report(const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / "report.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string ctx = path.string();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw DataError(ctx + ": parse error: " + e.what());
  }
  RunReport report;
  if (!j.contains("config")) throw DataError(ctx + ": missing config");
  report.config = parse_run_config_json(j.at("config").dump());
  for (const json& r : j.value("training", json::array())) {
    StepRecord rec;
    rec.step = get_required<int, DataError>(r, "step", ctx);
    rec.agent = agent_from_name(get_required<std::string, DataError>(r, "agent", ctx));
    rec.r_local_mean = get_required<double, DataError>(r, "r_local_mean", ctx);
    rec.r_global_mean = get_required<double, DataError>(r, "r_global_mean", ctx);
    rec.weight = get_required<double, DataError>(r, "weight", ctx);
    rec.adv_std = get_required<double, DataError>(r, "adv_std", ctx);
    rec.kl_mean = get_required<double, DataError>(r, "kl_mean", ctx);
    rec.loss = get_required<double, DataError>(r, "loss", ctx);
    report.training.push_back(rec);
  }
  for (const json& r : j.value("evals", json::array())) {
    EvalRecord rec;
    rec.step = get_required<int, DataError>(r, "step", ctx);
    rec.metrics.accuracy = get_required<double, DataError>(r, "accuracy", ctx);
    rec.metrics.r_cons_f = get_required<double, DataError>(r, "r_cons_f", ctx);
    rec.metrics.r_cons_c = get_required<double, DataError>(r, "r_cons_c", ctx);
    rec.metrics.r_ret = get_required<double, DataError>(r, "r_ret", ctx);
    report.evals.push_back(rec);
  }
  if (j.contains("convergence_steps")) {
    const json& c = j.at("convergence_steps");
    report.convergence_steps = {get_required<int, DataError>(c, "extraction", ctx),
                                get_required<int, DataError>(c, "profile", ctx),
                                get_required<int, DataError>(c, "retrieval", ctx)};
  }
  report.total_steps = get_optional<int, DataError>(j, "total_steps", 0, ctx);
  report.final_accuracy = get_optional<double, DataError>(j, "final_accuracy", 0.0, ctx);
  if (j.contains("policies"))
    report.final_policies = policy_set_from_json(j.at("policies"), ctx);
  return report;
}

void save_policy_file(const PolicyFile& file, const std::filesystem::path& path) {
  json j{{"policies", policy_set_to_json(file.policies)},
         {"env", detail::env_to_json(file.env)},
         {"rewards", detail::rewards_to_json(file.rewards)}};
  write_file(path, j.dump(2) + "\n");
}

PolicyFile load_policy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policies: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string ctx = path.string();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw DataError(ctx + ": parse error: " + e.what());
  }
  require_keys<DataError>(j, {"policies", "env", "rewards"}, ctx);
  PolicyFile file;
  if (!j.contains("policies")) throw DataError(ctx + ": missing key \"policies\"");
  file.policies = policy_set_from_json(j.at("policies"), ctx);
  if (!j.contains("env")) throw DataError(ctx + ": missing key \"env\"");
  try {
    file.env = detail::env_from_json(j.at("env"));
  } catch (const Error& e) {
    throw DataError(ctx + ": " + e.what());
  }
  if (j.contains("rewards")) {
    try {
      file.rewards = detail::rewards_from_json(j.at("rewards"));
    } catch (const Error& e) {
      throw DataError(ctx + ": " + e.what());
    }
  }
  for (int a = 0; a < 3; ++a)
    validate_params(file.policies.params_for(static_cast<AgentId>(a)), file.env);
  return file;
}

Comparison make_report(const std::vector<std::filesystem::path>& run_dirs) {
  Comparison cmp;
  for (const std::filesystem::path& dir : run_dirs) {
    RunReport report;
    try {
      report = load_run_report(dir);
    } catch (const IoError& e) {
      throw IoError("run dir " + dir.string() + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("run dir " + dir.string() + ": " + e.what());
    }
    RunSummary row;
    row.name = dir.filename().empty() ? dir.string() : dir.filename().string();
    row.mode = mode_name(report.config.mode);
    std::array<double, 3> weight_sums{};
    std::array<int, 3> counts{};
    for (int a = 0; a < 3; ++a) {
      std::vector<double> series;
      for (const StepRecord& rec : report.training) {
        if (static_cast<int>(rec.agent) != a) continue;
        series.push_back(rec.r_local_mean);
        weight_sums[a] += rec.weight;
        ++counts[a];
      }
      row.convergence_steps[a] =
          convergence_step(series, report.config.convergence_window,
                           report.config.convergence_tol);
      row.mean_weights[a] = counts[a] > 0 ? weight_sums[a] / counts[a] : 0.0;
    }
    if (report.config.mode == RunMode::independent)
      row.total_steps = row.convergence_steps[0] + row.convergence_steps[1] +
                        row.convergence_steps[2];
    else
      row.total_steps = std::max({row.convergence_steps[0], row.convergence_steps[1],
                                  row.convergence_steps[2]});
    row.final_accuracy = report.final_accuracy;
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

std::string Comparison::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(24) << "run" << std::setw(24) << "mode"
      << std::right << std::setw(9) << "extract" << std::setw(9) << "profile"
      << std::setw(10) << "retrieval" << std::setw(7) << "total" << std::setw(10)
      << "accuracy" << std::setw(8) << "w_ext" << std::setw(8) << "w_prof"
      << std::setw(8) << "w_ret" << '\n';
  for (const RunSummary& r : rows) {
    out << std::left << std::setw(24) << r.name << std::setw(24) << r.mode
        << std::right << std::setw(9) << r.convergence_steps[0] << std::setw(9)
        << r.convergence_steps[1] << std::setw(10) << r.convergence_steps[2]
        << std::setw(7) << r.total_steps << std::setw(10) << std::fixed
        << std::setprecision(4) << r.final_accuracy;
    out << std::setprecision(3);
    for (int a = 0; a < 3; ++a) out << std::setw(8) << r.mean_weights[a];
    out.unsetf(std::ios::fixed);
    out << '\n';
  }
  return out.str();
}

std::string Comparison::to_csv() const {
  std::string out =
      "run,mode,extraction_steps,profile_steps,retrieval_steps,total_steps,"
      "final_accuracy,mean_weight_extraction,mean_weight_profile,mean_weight_retrieval\n";
  for (const RunSummary& r : rows) {
    out += r.name;
    out += ',';
    out += r.mode;
    for (int a = 0; a < 3; ++a) out += ',' + std::to_string(r.convergence_steps[a]);
    out += ',' + std::to_string(r.total_steps);
    out += ',' + format_double(r.final_accuracy);
    for (int a = 0; a < 3; ++a) out += ',' + format_double(r.mean_weights[a]);
    out += '\n';
  }
  return out;
}

}  // namespace memrl
