#include "adaptsense/agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"

namespace adaptsense {

static_assert(std::endian::native == std::endian::little, "QTable persistence assumes little-endian");

double EpsilonSchedule::at(std::size_t step) const {
  if (decay_steps == 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

std::string_view to_string(LearningRateMode m) {
  return m == LearningRateMode::kConstant ? "constant" : "visit_average";
}

LearningRateMode parse_learning_rate_mode(std::string_view text) {
  if (text == "constant") return LearningRateMode::kConstant;
  if (text == "visit_average") return LearningRateMode::kVisitAverage;
  throw ConfigError(fmt::format("unknown learning rate mode '{}'", text));
}

void AgentConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError(fmt::format("learning_rate {} outside (0, 1]", learning_rate));
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw ConfigError(fmt::format("discount {} outside [0, 1)", discount));
  }
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(epsilon.start) || !unit(epsilon.end)) {
    throw ConfigError("epsilon bounds must lie in [0, 1]");
  }
  if (epsilon.end > epsilon.start) throw ConfigError("epsilon.end must not exceed epsilon.start");
  reward.validate();
}

double reward(const RewardWeights& w, double conf_agg_t, double conf_agg_prev, double power_w,
              double latency_s, bool switched) {
  const double gain = std::clamp(conf_agg_t - conf_agg_prev, -w.kappa, w.kappa);
  return w.alpha * gain - w.beta * power_w - w.gamma * latency_s - (switched ? w.delta : 0.0);
}

double reward(const RewardWeights& w, double conf_agg_t, double conf_agg_prev, double power_w,
              double latency_s, const SensorConfig& a_t, const SensorConfig& a_prev) {
  return reward(w, conf_agg_t, conf_agg_prev, power_w, latency_s, !(a_t == a_prev));
}

// --- QTable ------------------------------------------------------------------

QTable::QTable(std::size_t action_count, std::uint64_t ladders_hash, std::size_t state_count)
    : states_(state_count),
      actions_(action_count),
      ladders_hash_(ladders_hash),
      values_(state_count * action_count, 0.0),
      visits_(state_count * action_count, 0) {
  if (action_count == 0 || state_count == 0) throw ConfigError("QTable needs states and actions");
}

std::size_t QTable::offset(std::size_t s, std::size_t a) const {
  if (s >= states_) throw RangeError(fmt::format("state {} outside [0, {})", s, states_));
  if (a >= actions_) throw UnknownActionError(fmt::format("action {} outside [0, {})", a, actions_));
  return s * actions_ + a;
}

std::span<const double> QTable::row(std::size_t s) const {
  return {values_.data() + offset(s, 0), actions_};
}

std::size_t QTable::greedy_action(std::size_t s) const {
  const auto r = row(s);
  return static_cast<std::size_t>(std::distance(r.begin(), std::max_element(r.begin(), r.end())));
}

double QTable::max_value(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

namespace {

constexpr char kMagic[4] = {'A', 'S', 'Q', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw ParseError("truncated Q-table");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string QTable::serialize() const {
  std::string out;
  out.reserve(kHeaderBytes + values_.size() * (sizeof(double) + sizeof(std::uint32_t)));
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(states_));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(actions_));
  put<std::uint64_t>(out, ladders_hash_);
  for (double v : values_) put<double>(out, v);
  for (std::uint32_t n : visits_) put<std::uint32_t>(out, n);
  return out;
}

QTable QTable::deserialize(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("not a Q-table (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kVersion) throw ParseError(fmt::format("unsupported Q-table version {}", version));
  const auto states = get<std::uint32_t>(bytes, pos);
  const auto actions = get<std::uint32_t>(bytes, pos);
  const auto hash = get<std::uint64_t>(bytes, pos);
  const std::size_t cells = static_cast<std::size_t>(states) * actions;
  if (bytes.size() != kHeaderBytes + cells * (sizeof(double) + sizeof(std::uint32_t))) {
    throw ParseError("Q-table size does not match its header");
  }
  QTable q(actions, hash, states);
  for (auto& v : q.values_) v = get<double>(bytes, pos);
  for (auto& n : q.visits_) n = get<std::uint32_t>(bytes, pos);
  return q;
}

void QTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

QTable QTable::load(const std::filesystem::path& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  QTable q = deserialize(bytes);
  if (q.ladders_hash() != expected_hash) {
    throw ConfigError(fmt::format("Q-table '{}' was trained on ladders {:016x}, expected {:016x}",
                                  path.string(), q.ladders_hash(), expected_hash));
  }
  return q;
}

// --- action selection and update ----------------------------------------------

std::size_t select_action(const QTable& q, std::size_t state_index, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && (epsilon >= 1.0 || rng.uniform() < epsilon)) {
    return rng.uniform_index(q.action_count());
  }
  return q.greedy_action(state_index);
}

std::size_t select_action(const QTable& q, const DiscreteState& s, double epsilon, Rng& rng) {
  return select_action(q, encode_state(s), epsilon, rng);
}

double q_update(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                const AgentConfig& cfg) {
  double lr = cfg.learning_rate;
  if (cfg.learning_rate_mode == LearningRateMode::kVisitAverage) {
    lr = std::max(lr, 1.0 / static_cast<double>(q.visits(s, a) + 1));
  }
  const double target = r + cfg.discount * q.max_value(s_next);
  const double v = q.value(s, a) + lr * (target - q.value(s, a));
  q.set_value(s, a, v);
  q.add_visit(s, a);
  return v;
}

// --- baseline policies ---------------------------------------------------------

SensorConfig static_policy() { return SensorConfig{}; }

namespace {

Resolution most_pixels(const std::vector<Resolution>& ladder) {
  return *std::max_element(ladder.begin(), ladder.end(), [](Resolution a, Resolution b) {
    return a.pixels() < b.pixels();
  });
}

// Nearest ladder value; ties go to the higher rate.
int snap_fps(int fps, const std::vector<int>& ladder) {
  int best = ladder.front();
  for (int v : ladder) {
    const int d = std::abs(v - fps);
    const int bd = std::abs(best - fps);
    if (d < bd || (d == bd && v > best)) best = v;
  }
  return best;
}

Resolution snap_res(Resolution r, const std::vector<Resolution>& ladder) {
  Resolution best = ladder.front();
  for (Resolution v : ladder) {
    const auto d = std::llabs(v.pixels() - r.pixels());
    const auto bd = std::llabs(best.pixels() - r.pixels());
    if (d < bd || (d == bd && v.pixels() > best.pixels())) best = v;
  }
  return best;
}

RadarPreference snap_pref(RadarPreference p, const std::vector<RadarPreference>& ladder) {
  return std::find(ladder.begin(), ladder.end(), p) != ladder.end() ? p : ladder.front();
}

// Next ladder value above fps, or fps itself at the top.
int step_up(int fps, const std::vector<int>& ladder) {
  int next = std::numeric_limits<int>::max();
  for (int v : ladder) {
    if (v > fps) next = std::min(next, v);
  }
  return next == std::numeric_limits<int>::max() ? fps : next;
}

}  // namespace

SensorConfig static_policy(const ActionLadders& ladders) {
  ladders.validate();
  SensorConfig c;
  const int top = *std::max_element(ladders.fps.begin(), ladders.fps.end());
  c.rgb_fps = c.thermal_fps = c.mmwave_fps = top;
  c.rgb_res = most_pixels(ladders.rgb_res);
  c.thermal_res = most_pixels(ladders.thermal_res);
  c.mmwave_pref = snap_pref(RadarPreference::kPreferRange, ladders.radar_prefs);
  return c;
}

SensorConfig heuristic_policy(const DiscreteState& s, const ActionLadders& ladders) {
  if (!s.valid()) throw RangeError("invalid discrete state");
  ladders.validate();
  SensorConfig c;
  c.rgb_res = {960, 540};
  c.rgb_fps = 15;
  c.thermal_res = {320, 240};
  c.thermal_fps = 15;
  c.mmwave_fps = 15;
  c.mmwave_pref = RadarPreference::kPreferRange;

  if (s.illumination == 0) {
    c.thermal_res = {320, 240};
    c.thermal_fps = 27;
    c.rgb_res = {640, 360};
    c.rgb_fps = 5;
  } else if (s.illumination == 2) {
    c.rgb_res = {1280, 720};
    c.rgb_fps = 27;
    c.thermal_res = {160, 120};
    c.thermal_fps = 5;
  }

  c.rgb_fps = snap_fps(c.rgb_fps, ladders.fps);
  c.thermal_fps = snap_fps(c.thermal_fps, ladders.fps);
  c.mmwave_fps = snap_fps(c.mmwave_fps, ladders.fps);

  if (s.motion >= 1) c.mmwave_pref = RadarPreference::kPreferVelocity;
  if (s.motion == 2) {
    c.rgb_fps = step_up(c.rgb_fps, ladders.fps);
    c.thermal_fps = step_up(c.thermal_fps, ladders.fps);
    c.mmwave_fps = step_up(c.mmwave_fps, ladders.fps);
  }
  if (s.radar_density == 2) c.mmwave_fps = snap_fps(kPlatformCapFps, ladders.fps);

  c.rgb_res = snap_res(c.rgb_res, ladders.rgb_res);
  c.thermal_res = snap_res(c.thermal_res, ladders.thermal_res);
  c.mmwave_pref = snap_pref(c.mmwave_pref, ladders.radar_prefs);
  return c;
}

StaticPolicy::StaticPolicy(const ActionSpace& space)
    : action_(space.encode(static_policy(space.ladders()))) {}

std::size_t HeuristicPolicy::select(std::size_t state_index) {
  return space_.encode(heuristic_policy(decode_state(state_index), space_.ladders()));
}

// --- episodic learning -----------------------------------------------------------

EpisodeOutcome play_episode(EpisodicTask& task, Policy& policy) {
  EpisodeOutcome out;
  std::size_t s = task.reset();
  for (;;) {
    const std::size_t a = policy.select(s);
    const Transition t = task.step(a);
    out.actions.push_back(a);
    out.cumulative_reward += t.reward;
    ++out.steps;
    s = t.next_state;
    if (t.done) break;
  }
  return out;
}

QLearner::QLearner(QTable& q, AgentConfig cfg) : q_(q), cfg_(std::move(cfg)), rng_(cfg_.rng_seed) {
  cfg_.validate();
}

EpisodeOutcome QLearner::run_episode(EpisodicTask& task, std::size_t step_budget) {
  if (task.action_count() != q_.action_count()) {
    throw ConfigError(fmt::format("task '{}' has {} actions, table has {}", task.name(),
                                  task.action_count(), q_.action_count()));
  }
  EpisodeOutcome out;
  std::size_t s = task.reset();
  while (step_budget == 0 || steps_ < step_budget) {
    const std::size_t a = select_action(q_, s, epsilon(), rng_);
    const Transition t = task.step(a);
    if (t.done) {
      // Terminal: no bootstrap.
      AgentConfig terminal = cfg_;
      terminal.discount = 0.0;
      q_update(q_, s, a, t.reward, t.next_state, terminal);
    } else {
      q_update(q_, s, a, t.reward, t.next_state, cfg_);
    }
    ++steps_;
    out.actions.push_back(a);
    out.cumulative_reward += t.reward;
    ++out.steps;
    s = t.next_state;
    if (t.done) break;
  }
  return out;
}

TrainResult train_round_robin(std::span<EpisodicTask* const> tasks,
                              std::span<EpisodicTask* const> sweep_tasks, QTable& q,
                              const AgentConfig& cfg, const TrainOptions& options) {
  if (tasks.empty()) throw ConfigError("training needs at least one task");
  QLearner learner(q, cfg);
  TrainResult result;
  std::vector<std::vector<std::size_t>> previous;
  std::size_t stable = 0;

  for (std::size_t ep = 0; ep < options.episodes; ++ep) {
    if (options.max_steps != 0 && learner.steps() >= options.max_steps) break;
    EpisodicTask& task = *tasks[ep % tasks.size()];
    const EpisodeOutcome o = learner.run_episode(task, options.max_steps);
    result.curve.push_back({ep, task.name(), o.steps, o.cumulative_reward, learner.epsilon()});

    const bool end_of_cycle = (ep + 1) % tasks.size() == 0;
    const bool decayed = learner.steps() >= cfg.epsilon.decay_steps;
    if (options.convergence_sweeps == 0 || sweep_tasks.empty() || !end_of_cycle || !decayed) {
      continue;
    }
    GreedyPolicy greedy(q);
    std::vector<std::vector<std::size_t>> sweep;
    sweep.reserve(sweep_tasks.size());
    for (EpisodicTask* t : sweep_tasks) sweep.push_back(play_episode(*t, greedy).actions);
    stable = (!previous.empty() && sweep == previous) ? stable + 1 : 1;
    previous = std::move(sweep);
    if (stable >= options.convergence_sweeps) {
      result.converged = true;
      break;
    }
  }
  result.total_steps = learner.steps();
  return result;
}

}  // namespace adaptsense
