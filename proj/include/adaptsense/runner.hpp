// Experiment orchestration: run configs, the closed sensing loop, training,
// evaluation sweeps, metrics and trace persistence.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "adaptsense/agent.hpp"
#include "adaptsense/discretize.hpp"
#include "adaptsense/domain.hpp"
#include "adaptsense/env_sim.hpp"
#include "adaptsense/scenario.hpp"

namespace adaptsense {

struct TrainingConfig {
  std::size_t episodes = 1000;
  std::size_t max_steps = 50'000;
  std::size_t convergence_sweeps = 5;
  // Sensor noise during training; evaluation is always noise-free.
  bool noise = false;
};

struct RunConfig {
  std::vector<Scenario> scenarios;
  ActionLadders ladders;
  DiscretizerConfig discretizer;
  AgentConfig agent;
  EnvParams env;
  TrainingConfig training;
  std::filesystem::path output_dir = "out";

  void validate() const;
};

// Scenario paths and output_dir are resolved against base_dir. A missing
// "scenarios" key selects the bundled set.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           std::string_view source = "<memory>");
RunConfig load_run_config(const std::filesystem::path& path);

struct ObservationDigest {
  double conf_agg = 0.0;
  double gpu_load = 0.0;
  double power_w = 0.0;
  double latency_s = 0.0;
  double rgb_share = 0.0;
  double thermal_share = 0.0;

  friend bool operator==(const ObservationDigest&, const ObservationDigest&) = default;
};

struct TraceRecord {
  std::size_t tick = 0;
  double time = 0.0;
  DiscreteState state;     // smoothed, after this tick's observation
  std::size_t action = 0;  // configuration commanded for this tick
  bool decision = false;   // last tick of a decision window
  ObservationDigest obs;
  double reward = 0.0;     // non-zero only on decision ticks
  double cumulative_reward = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct EpisodeTrace {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string policy;
  std::uint64_t ladders_hash = 0;
  std::vector<TraceRecord> records;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

// Adapts one scenario to the EpisodicTask interface. Each episode boots with
// the static configuration for one window; afterwards the agent picks a
// configuration once per smoothing window and is rewarded with the change in
// smoothed ConfAgg and the window's mean power and latency.
class ClosedLoop final : public EpisodicTask {
 public:
  ClosedLoop(Scenario scenario, const ActionSpace& space, DiscretizerConfig discretizer,
             RewardWeights weights, EnvParams env, bool record = false);

  std::string name() const override { return scenario_.name; }
  std::size_t action_count() const override { return space_.size(); }
  std::size_t reset() override;
  Transition step(std::size_t action) override;

  std::size_t ticks_per_decision() const { return ticks_per_decision_; }
  // Populated when constructed with record = true.
  const EpisodeTrace& trace() const { return trace_; }
  void set_policy_id(std::string id) { trace_.policy = std::move(id); }

 private:
  struct WindowResult {
    double conf = 0.0;
    double power = 0.0;
    double latency = 0.0;
    DiscreteState state;
  };
  WindowResult run_window(std::size_t action);

  Scenario scenario_;
  const ActionSpace& space_;
  DiscretizerConfig discretizer_;
  RewardWeights weights_;
  EnvParams env_params_;
  bool record_;
  std::size_t ticks_per_decision_;

  std::unique_ptr<Environment> env_;
  WindowBuffer buffer_;
  double conf_prev_ = 0.0;
  std::size_t prev_action_ = 0;
  double cumulative_ = 0.0;
  EpisodeTrace trace_;
};

// One episode of `policy` (noise-free unless cfg.env.noise is set).
EpisodeTrace run_episode(const Scenario& scenario, Policy& policy, const RunConfig& cfg,
                         const ActionSpace& space);
// One learning episode with epsilon-greedy exploration driven by `learner`.
EpisodeTrace run_learning_episode(const Scenario& scenario, QLearner& learner, const RunConfig& cfg,
                                  const ActionSpace& space);

struct TrainOutput {
  QTable q;
  TrainResult result;
};

TrainOutput train(const RunConfig& cfg);

std::string learning_curve_csv(const TrainResult& r);

struct CellMetrics {
  std::string policy;
  std::string scenario;
  double mean_gpu_load = 0.0;
  double mean_power_w = 0.0;
  double mean_latency_s = 0.0;
  double mean_conf_agg = 0.0;
  std::size_t switch_count = 0;
  double cumulative_reward = 0.0;
  std::size_t stabilized_action = 0;
  double load_reduction_pct = 0.0;   // vs baseline on the same scenario
  double accuracy_delta_pct = 0.0;
};

struct PolicySummary {
  std::string policy;
  double mean_gpu_load = 0.0;
  double mean_power_w = 0.0;
  double mean_conf_agg = 0.0;
  std::size_t switch_count = 0;
  double load_reduction_pct = 0.0;
  double accuracy_delta_pct = 0.0;
};

struct MetricsReport {
  std::string baseline;
  std::uint64_t ladders_hash = 0;
  std::vector<CellMetrics> cells;       // policy-major, scenario order preserved
  std::vector<PolicySummary> summaries;
};

// (baseline - candidate) / baseline in percent; NaN when baseline is 0.
double relative_delta_pct(double baseline, double candidate);

// Per-cell metrics of one trace.
CellMetrics cell_metrics(const EpisodeTrace& trace);

struct EvaluationResult {
  MetricsReport report;
  std::vector<EpisodeTrace> traces;  // same order as report.cells
};

// Runs every (policy, scenario) cell noise-free with epsilon = 0. Cells run
// in parallel; results are gathered in a fixed order. `baseline` must name
// one of the policies.
EvaluationResult evaluate(std::vector<std::unique_ptr<Policy>>& policies,
                          const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                          const ActionSpace& space, const std::string& baseline = "heuristic");

// The three standard policies: static, heuristic, and greedy over `q`.
std::vector<std::unique_ptr<Policy>> standard_policies(const ActionSpace& space, const QTable& q);

std::string metrics_json(const MetricsReport& r);
std::string metrics_csv(const MetricsReport& r);

// One row per cell: the action in force at the end of the episode.
std::string stabilized_actions_csv(const MetricsReport& r, const ActionSpace& space);

// Columns: tick,time,illumination,motion,radar_density,system_load,
// sync_health,detection_conf,state_index,action,decision,conf_agg,gpu_load,
// power_w,latency_s,rgb_share,thermal_share,reward,cumulative_reward
std::string trace_csv(const EpisodeTrace& t);
// First line is a header object, then one object per tick.
std::string trace_jsonl(const EpisodeTrace& t);
EpisodeTrace parse_trace_jsonl(std::string_view text);

enum class TraceFormat { kCsv, kJsonLines };
void export_trace(const EpisodeTrace& t, const std::filesystem::path& path, TraceFormat format);
EpisodeTrace load_trace(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace adaptsense
