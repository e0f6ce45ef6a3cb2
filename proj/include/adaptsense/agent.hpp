// Tabular Q-learning reconfiguration agent, its reward, and the static and
// rule-based baseline policies.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptsense/domain.hpp"
#include "adaptsense/rng.hpp"

namespace adaptsense {

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::size_t decay_steps = 20'000;

  // Linear from start to end over decay_steps, then flat.
  double at(std::size_t step) const;
};

enum class LearningRateMode {
  kConstant,
  // Step size max(learning_rate, 1 / n) for the n-th visit of an entry: the
  // first update overwrites the initial value, later ones average.
  kVisitAverage,
};

std::string_view to_string(LearningRateMode m);
LearningRateMode parse_learning_rate_mode(std::string_view text);

struct AgentConfig {
  double learning_rate = 0.1;
  double discount = 0.9;
  EpsilonSchedule epsilon;
  RewardWeights reward;
  std::uint64_t rng_seed = 7;
  LearningRateMode learning_rate_mode = LearningRateMode::kConstant;

  void validate() const;
};

// r = alpha * clip(conf_t - conf_prev, -kappa, kappa) - beta * P - gamma * L
//     - delta * [switched]
double reward(const RewardWeights& w, double conf_agg_t, double conf_agg_prev, double power_w,
              double latency_s, bool switched);
double reward(const RewardWeights& w, double conf_agg_t, double conf_agg_prev, double power_w,
              double latency_s, const SensorConfig& a_t, const SensorConfig& a_prev);

// Dense value table over all 729 states and the action set, zero-initialised.
class QTable {
 public:
  explicit QTable(std::size_t action_count, std::uint64_t ladders_hash = 0,
                  std::size_t state_count = kStateCount);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  std::uint64_t ladders_hash() const { return ladders_hash_; }

  double value(std::size_t s, std::size_t a) const { return values_[offset(s, a)]; }
  void set_value(std::size_t s, std::size_t a, double v) { values_[offset(s, a)] = v; }
  std::uint32_t visits(std::size_t s, std::size_t a) const { return visits_[offset(s, a)]; }
  void add_visit(std::size_t s, std::size_t a) { ++visits_[offset(s, a)]; }
  std::span<const double> row(std::size_t s) const;

  // Highest-valued action; ties go to the lowest index.
  std::size_t greedy_action(std::size_t s) const;
  double max_value(std::size_t s) const;

  // Little-endian binary: "ASQT", u32 version, u32 states, u32 actions,
  // u64 ladders hash, f64 values (row-major), u32 visit counts.
  std::string serialize() const;
  static QTable deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  // Rejects tables whose ladders hash differs from expected_hash.
  static QTable load(const std::filesystem::path& path, std::uint64_t expected_hash);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t offset(std::size_t s, std::size_t a) const;

  std::size_t states_;
  std::size_t actions_;
  std::uint64_t ladders_hash_;
  std::vector<double> values_;
  std::vector<std::uint32_t> visits_;
};

// With probability epsilon a uniform action, otherwise the greedy one.
// epsilon <= 0 never touches the generator.
std::size_t select_action(const QTable& q, const DiscreteState& s, double epsilon, Rng& rng);
std::size_t select_action(const QTable& q, std::size_t state_index, double epsilon, Rng& rng);

// Watkins update of a single entry; returns the new value.
double q_update(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                const AgentConfig& cfg);

// Maximum fidelity everywhere: 27 fps, RGB 1280x720, thermal 320x240,
// range-preferring radar.
SensorConfig static_policy();
// Same idea over arbitrary ladders: fastest rate, most pixels, range mode.
SensorConfig static_policy(const ActionLadders& ladders);

// Rule table keyed on illumination, motion and radar density bins. Every
// value is snapped onto the given ladders.
SensorConfig heuristic_policy(const DiscreteState& s, const ActionLadders& ladders = {});

// Anything that maps a state index to an action index.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string id() const = 0;
  virtual std::size_t select(std::size_t state_index) = 0;
};

class StaticPolicy final : public Policy {
 public:
  explicit StaticPolicy(const ActionSpace& space);
  std::string id() const override { return "static"; }
  std::size_t select(std::size_t) override { return action_; }

 private:
  std::size_t action_;
};

class HeuristicPolicy final : public Policy {
 public:
  explicit HeuristicPolicy(const ActionSpace& space) : space_(space) {}
  std::string id() const override { return "heuristic"; }
  std::size_t select(std::size_t state_index) override;

 private:
  const ActionSpace& space_;
};

// Greedy (epsilon = 0) over a frozen table.
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const QTable& q, std::string id = "adaptive") : q_(q), id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::size_t select(std::size_t state_index) override { return q_.greedy_action(state_index); }

 private:
  const QTable& q_;
  std::string id_;
};

// --- Generic episodic learning -------------------------------------------

struct Transition {
  double reward = 0.0;
  std::size_t next_state = 0;
  bool done = false;
};

// A resettable task with discrete states and actions. Deterministic tasks
// replay identically after reset().
class EpisodicTask {
 public:
  virtual ~EpisodicTask() = default;
  virtual std::string name() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::size_t reset() = 0;
  virtual Transition step(std::size_t action) = 0;
};

struct EpisodeOutcome {
  double cumulative_reward = 0.0;
  std::size_t steps = 0;
  std::vector<std::size_t> actions;
};

// Plays one episode without learning.
EpisodeOutcome play_episode(EpisodicTask& task, Policy& policy);

// Epsilon-greedy Q-learning driver. The epsilon schedule advances with every
// update across episodes.
class QLearner {
 public:
  QLearner(QTable& q, AgentConfig cfg);

  // Stops early once the learner has taken `step_budget` total steps.
  EpisodeOutcome run_episode(EpisodicTask& task, std::size_t step_budget);

  std::size_t steps() const { return steps_; }
  double epsilon() const { return cfg_.epsilon.at(steps_); }
  const AgentConfig& config() const { return cfg_; }

 private:
  QTable& q_;
  AgentConfig cfg_;
  Rng rng_;
  std::size_t steps_ = 0;
};

struct TrainOptions {
  std::size_t episodes = 1000;
  std::size_t max_steps = 50'000;  // 0 = unlimited
  // Stop once the greedy action sequences over the sweep tasks repeat this
  // many sweeps in a row (checked once epsilon has finished decaying). 0
  // disables the check.
  std::size_t convergence_sweeps = 5;
};

struct CurvePoint {
  std::size_t episode = 0;
  std::string task;
  std::size_t steps = 0;
  double cumulative_reward = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  std::size_t total_steps = 0;
  bool converged = false;
};

// Cycles `tasks` round-robin. `sweep_tasks` (typically noise-free copies)
// drive the convergence check.
TrainResult train_round_robin(std::span<EpisodicTask* const> tasks,
                              std::span<EpisodicTask* const> sweep_tasks, QTable& q,
                              const AgentConfig& cfg, const TrainOptions& options);

}  // namespace adaptsense
