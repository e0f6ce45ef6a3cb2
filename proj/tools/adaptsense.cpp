#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "adaptsense/agent.hpp"
#include "adaptsense/errors.hpp"
#include "adaptsense/radar_lut.hpp"
#include "adaptsense/runner.hpp"
#include "adaptsense/scenario.hpp"

namespace fs = std::filesystem;
using namespace adaptsense;

namespace {

void print_error(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cerr << j.dump() << "\n";
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));
  return dir;
}

void cmd_train(const fs::path& config_path, const std::string& out_override) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = ensure_dir(out_override.empty() ? cfg.output_dir : fs::path(out_override));
  const TrainOutput t = train(cfg);
  t.q.save(out / "qtable.bin");
  write_text_file(out / "learning_curve.csv", learning_curve_csv(t.result));
  nlohmann::ordered_json s;
  s["episodes"] = t.result.curve.size();
  s["steps"] = t.result.total_steps;
  s["converged"] = t.result.converged;
  s["ladders_hash"] = fmt::format("{:016x}", t.q.ladders_hash());
  write_text_file(out / "train_summary.json", s.dump(2) + "\n");
  std::cout << fmt::format("trained {} episodes, {} steps, converged: {}\n", t.result.curve.size(),
                           t.result.total_steps, t.result.converged);
}

void cmd_evaluate(const fs::path& config_path, const fs::path& qtable_path, const std::string& out_override) {
  const RunConfig cfg = load_run_config(config_path);
  const fs::path out = ensure_dir(out_override.empty() ? cfg.output_dir : fs::path(out_override));
  const ActionSpace space(cfg.ladders);
  const QTable q = QTable::load(qtable_path, space.ladders_hash());
  auto policies = standard_policies(space, q);
  const EvaluationResult r = evaluate(policies, cfg.scenarios, cfg, space);

  write_text_file(out / "metrics.json", metrics_json(r.report));
  write_text_file(out / "metrics.csv", metrics_csv(r.report));
  write_text_file(out / "stabilized_actions.csv", stabilized_actions_csv(r.report, space));
  const fs::path traces = ensure_dir(out / "traces");
  for (const auto& t : r.traces) {
    const std::string stem = fmt::format("{}__{}", t.policy, t.scenario);
    export_trace(t, traces / (stem + ".csv"), TraceFormat::kCsv);
    export_trace(t, traces / (stem + ".jsonl"), TraceFormat::kJsonLines);
  }
  for (const auto& s : r.report.summaries) {
    std::cout << fmt::format("{:<10} load {:.3f}  power {:.2f} W  conf {:.3f}  load_red {:+.1f}%  acc_delta {:+.1f}%\n",
                             s.policy, s.mean_gpu_load, s.mean_power_w, s.mean_conf_agg,
                             s.load_reduction_pct, s.accuracy_delta_pct);
  }
}

void cmd_replay(const fs::path& trace_path, bool decisions_only) {
  const EpisodeTrace t = load_trace(trace_path);
  const ActionSpace space;
  const CellMetrics m = cell_metrics(t);
  std::cout << fmt::format("scenario {}  policy {}  seed {}  ticks {}\n", t.scenario, t.policy, t.seed,
                           t.records.size());
  std::cout << fmt::format("mean load {:.4f}  mean power {:.3f} W  mean conf {:.4f}  switches {}  reward {:.4f}\n",
                           m.mean_gpu_load, m.mean_power_w, m.mean_conf_agg, m.switch_count,
                           m.cumulative_reward);
  const bool same_ladders = t.ladders_hash == space.ladders_hash();
  for (const auto& r : t.records) {
    if (decisions_only && !r.decision) continue;
    const std::string action = same_ladders ? to_string(space.decode(r.action)) : std::to_string(r.action);
    std::cout << fmt::format("{:8.3f}  {}  {:<60}  conf {:.3f}  r {:+.4f}\n", r.time, to_string(r.state),
                             action, r.obs.conf_agg, r.reward);
  }
}

void cmd_derive_lut(const std::string& out) {
  const std::string csv = radar_lut_csv();
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
}

void cmd_scenarios_list(const std::string& config_path) {
  const auto scenarios = config_path.empty() ? bundled_scenarios() : load_run_config(config_path).scenarios;
  for (const auto& s : scenarios) {
    std::cout << fmt::format("{:<30} {:>3} phases {:>6.1f} s @ {:g} Hz  seed {}\n", s.name, s.phases.size(),
                             s.total_duration(), s.tick_rate_hz, s.seed);
  }
}

void cmd_scenarios_export(const fs::path& dir) {
  ensure_dir(dir);
  for (const auto& s : bundled_scenarios()) save_scenario(s, dir / (s.name + ".json"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multispectral sensor reconfiguration experiments"};
  app.require_subcommand(1);

  std::string config, out, qtable, trace, config_opt;
  bool decisions_only = false;

  auto* train_cmd = app.add_subcommand("train", "Train the Q-learning agent");
  train_cmd->add_option("--config", config, "Run-config JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", out, "Output directory (defaults to the config's output_dir)");

  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate static, heuristic and adaptive policies");
  eval_cmd->add_option("--config", config, "Run-config JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--qtable", qtable, "Trained Q-table")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", out, "Output directory (defaults to the config's output_dir)");

  auto* replay_cmd = app.add_subcommand("replay", "Summarize a JSON-lines trace");
  replay_cmd->add_option("--trace", trace, "Trace file (.jsonl)")->required()->check(CLI::ExistingFile);
  replay_cmd->add_flag("--decisions", decisions_only, "Only print decision ticks");

  auto* lut_cmd = app.add_subcommand("derive-lut", "Write the radar chirp lookup table as CSV");
  lut_cmd->add_option("--out", out, "Output file (stdout when omitted)");

  auto* scen_cmd = app.add_subcommand("scenarios", "Bundled scenario utilities");
  scen_cmd->require_subcommand(1);
  auto* list_cmd = scen_cmd->add_subcommand("list", "List scenarios");
  list_cmd->add_option("--config", config_opt, "List the scenarios of a run config instead");
  auto* export_cmd = scen_cmd->add_subcommand("export", "Write the bundled scenarios as JSON files");
  export_cmd->add_option("--dir", out, "Target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return 2;
  }

  try {
    if (*train_cmd) cmd_train(config, out);
    if (*eval_cmd) cmd_evaluate(config, qtable, out);
    if (*replay_cmd) cmd_replay(trace, decisions_only);
    if (*lut_cmd) cmd_derive_lut(out);
    if (*list_cmd) cmd_scenarios_list(config_opt);
    if (*export_cmd) cmd_scenarios_export(out);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
