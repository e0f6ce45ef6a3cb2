#include "adaptsense/runner.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "adaptsense/errors.hpp"

namespace adaptsense {

using nlohmann::json;
using nlohmann::ordered_json;

// --- run config ----------------------------------------------------------------

void RunConfig::validate() const {
  if (scenarios.empty()) throw ConfigError("run config has no scenarios");
  std::set<std::string> names;
  for (const auto& s : scenarios) {
    s.validate();
    if (!names.insert(s.name).second) throw ConfigError(fmt::format("duplicate scenario '{}'", s.name));
  }
  ladders.validate();
  discretizer.validate();
  agent.validate();
  env.validate();
  if (training.episodes < 1) throw ConfigError("training.episodes must be >= 1");
}

namespace {

// Strict reader for one JSON object: unknown keys are rejected so typos do not
// silently fall back to defaults.
class Section {
 public:
  Section(const json& j, std::string path, std::string_view source,
          std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail("", "expected an object");
    for (const auto& [key, _] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(key, "unknown field");
    }
  }

  [[noreturn]] void fail(std::string_view field, std::string_view what) const {
    throw ParseError(fmt::format("{}: {}/{}: {}", source_, path_, field, what));
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  const json& at(std::string_view key) const { return j_.at(std::string(key)); }
  std::string child(std::string_view key) const { return fmt::format("{}/{}", path_, key); }

  void number(std::string_view key, double& out) const {
    if (!has(key)) return;
    if (!at(key).is_number()) fail(key, "expected a number");
    out = at(key).get<double>();
  }

  template <typename T>
  void count(std::string_view key, T& out) const {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) fail(key, "expected a nonnegative integer");
    out = static_cast<T>(at(key).get<std::uint64_t>());
  }

  void boolean(std::string_view key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) fail(key, "expected true or false");
    out = at(key).get<bool>();
  }

  void cuts(std::string_view key, Cuts& out) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(key, "expected [low, high]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  template <typename T, typename Fn>
  void list(std::string_view key, std::vector<T>& out, Fn convert) const {
    if (!has(key)) return;
    const auto& v = at(key);
    if (!v.is_array()) fail(key, "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        out.push_back(convert(v[i]));
      } catch (const Error& e) {
        fail(fmt::format("{}/{}", key, i), e.what());
      } catch (const json::exception& e) {
        fail(fmt::format("{}/{}", key, i), e.what());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::string_view source_;
};

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("line {}, column {}", line, col);
}

void parse_modality_cost(const Section& parent, std::string_view key, ModalityCost& m,
                         std::string_view source) {
  if (!parent.has(key)) return;
  const Section s(parent.at(key), parent.child(key), source,
                  {"idle_power_w", "active_power_w_per_mpx_hz", "compute_per_mpx_hz"});
  s.number("idle_power_w", m.idle_power_w);
  s.number("active_power_w_per_mpx_hz", m.active_power_w_per_mpx_hz);
  s.number("compute_per_mpx_hz", m.compute_per_mpx_hz);
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           std::string_view source) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}: invalid JSON: {}", source,
                                 line_context(json_text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }

  RunConfig cfg;
  const Section root(doc, "", source,
                     {"scenarios", "ladders", "discretizer", "agent", "cost_model", "sync", "detection",
                      "env", "training", "output_dir"});

  if (root.has("scenarios")) {
    root.list("scenarios", cfg.scenarios, [&](const json& v) {
      if (!v.is_string()) throw ConfigError("expected a scenario file path");
      return load_scenario(base_dir / v.get<std::string>());
    });
  } else {
    cfg.scenarios = bundled_scenarios();
  }

  if (root.has("ladders")) {
    const Section s(root.at("ladders"), "/ladders", source,
                    {"fps", "rgb_res", "thermal_res", "radar_prefs"});
    s.list("fps", cfg.ladders.fps, [](const json& v) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer");
      return v.get<int>();
    });
    auto res = [](const json& v) { return parse_resolution(v.get<std::string>()); };
    s.list("rgb_res", cfg.ladders.rgb_res, res);
    s.list("thermal_res", cfg.ladders.thermal_res, res);
    s.list("radar_prefs", cfg.ladders.radar_prefs,
           [](const json& v) { return parse_radar_preference(v.get<std::string>()); });
  }

  if (root.has("discretizer")) {
    const Section s(root.at("discretizer"), "/discretizer", source,
                    {"window_seconds", "illumination", "motion", "radar_density", "system_load", "sync",
                     "confidence", "stale_ratio_weight_s"});
    auto& d = cfg.discretizer;
    s.number("window_seconds", d.window_seconds);
    s.cuts("illumination", d.illumination);
    s.cuts("motion", d.motion);
    s.cuts("radar_density", d.radar_density);
    s.cuts("system_load", d.system_load);
    s.cuts("sync", d.sync);
    Cuts conf{d.tau_low, d.tau_high};
    s.cuts("confidence", conf);
    d.tau_low = conf.low;
    d.tau_high = conf.high;
    s.number("stale_ratio_weight_s", d.stale_ratio_weight_s);
  }

  if (root.has("agent")) {
    const Section s(root.at("agent"), "/agent", source,
                    {"learning_rate", "learning_rate_mode", "discount", "epsilon", "reward", "seed"});
    auto& a = cfg.agent;
    s.number("learning_rate", a.learning_rate);
    s.number("discount", a.discount);
    s.count("seed", a.rng_seed);
    if (s.has("learning_rate_mode")) {
      const auto& v = s.at("learning_rate_mode");
      if (!v.is_string()) s.fail("learning_rate_mode", "expected a string");
      try {
        a.learning_rate_mode = parse_learning_rate_mode(v.get<std::string>());
      } catch (const ConfigError& e) {
        s.fail("learning_rate_mode", e.what());
      }
    }
    if (s.has("epsilon")) {
      const Section e(s.at("epsilon"), "/agent/epsilon", source, {"start", "end", "decay_steps"});
      e.number("start", a.epsilon.start);
      e.number("end", a.epsilon.end);
      e.count("decay_steps", a.epsilon.decay_steps);
    }
    if (s.has("reward")) {
      const Section r(s.at("reward"), "/agent/reward", source,
                      {"alpha", "beta", "gamma", "delta", "kappa"});
      r.number("alpha", a.reward.alpha);
      r.number("beta", a.reward.beta);
      r.number("gamma", a.reward.gamma);
      r.number("delta", a.reward.delta);
      r.number("kappa", a.reward.kappa);
    }
  }

  if (root.has("cost_model")) {
    const Section s(root.at("cost_model"), "/cost_model", source,
                    {"rgb", "thermal", "mmwave", "depth", "capacity", "base_latency_s",
                     "latency_per_load_s", "mmwave_range_mpx", "mmwave_velocity_factor", "depth_res",
                     "depth_fps"});
    auto& c = cfg.env.cost;
    for (ModalityId m : kAllModalities) {
      parse_modality_cost(s, to_string(m), c.modality[index_of(m)], source);
    }
    s.number("capacity", c.capacity);
    s.number("base_latency_s", c.base_latency_s);
    s.number("latency_per_load_s", c.latency_per_load_s);
    s.number("mmwave_range_mpx", c.mmwave_range_mpx);
    s.number("mmwave_velocity_factor", c.mmwave_velocity_factor);
    if (s.has("depth_res")) {
      try {
        c.depth_res = parse_resolution(s.at("depth_res").get<std::string>());
      } catch (const std::exception& e) {
        s.fail("depth_res", e.what());
      }
    }
    s.count("depth_fps", c.depth_fps);
  }

  if (root.has("sync")) {
    const Section s(root.at("sync"), "/sync", source, {"load_knee", "max_jitter_s", "max_stale_ratio"});
    s.number("load_knee", cfg.env.sync.load_knee);
    s.number("max_jitter_s", cfg.env.sync.max_jitter_s);
    s.number("max_stale_ratio", cfg.env.sync.max_stale_ratio);
  }

  if (root.has("detection")) {
    const Section s(root.at("detection"), "/detection", source, {"staleness_coeff", "noise_sigma"});
    s.number("staleness_coeff", cfg.env.detection.staleness_coeff);
    s.number("noise_sigma", cfg.env.detection.noise_sigma);
  }

  if (root.has("env")) {
    const Section s(root.at("env"), "/env", source,
                    {"illumination_noise_sigma", "radar_point_noise_sigma", "reconfig_delay_ticks"});
    s.number("illumination_noise_sigma", cfg.env.illumination_noise_sigma);
    s.number("radar_point_noise_sigma", cfg.env.radar_point_noise_sigma);
    if (s.has("reconfig_delay_ticks")) {
      std::vector<int> delays;
      s.list("reconfig_delay_ticks", delays, [](const json& v) {
        if (!v.is_number_unsigned()) throw ConfigError("expected a nonnegative integer");
        return v.get<int>();
      });
      if (delays.size() != 3) s.fail("reconfig_delay_ticks", "expected [rgb, thermal, mmwave]");
      std::copy(delays.begin(), delays.end(), cfg.env.reconfig_delay_ticks.begin());
    }
  }

  if (root.has("training")) {
    const Section s(root.at("training"), "/training", source,
                    {"episodes", "max_steps", "convergence_sweeps", "noise"});
    s.count("episodes", cfg.training.episodes);
    s.count("max_steps", cfg.training.max_steps);
    s.count("convergence_sweeps", cfg.training.convergence_sweeps);
    s.boolean("noise", cfg.training.noise);
  }

  if (root.has("output_dir")) {
    if (!root.at("output_dir").is_string()) root.fail("output_dir", "expected a string");
    cfg.output_dir = base_dir / root.at("output_dir").get<std::string>();
  } else {
    cfg.output_dir = base_dir / "out";
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return parse_run_config(text, path.parent_path(), path.string());
}

// --- closed loop -------------------------------------------------------------------

ClosedLoop::ClosedLoop(Scenario scenario, const ActionSpace& space, DiscretizerConfig discretizer,
                       RewardWeights weights, EnvParams env, bool record)
    : scenario_(std::move(scenario)),
      space_(space),
      discretizer_(discretizer),
      weights_(weights),
      env_params_(env),
      record_(record),
      ticks_per_decision_(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(discretizer.window_seconds * scenario_.tick_rate_hz)))),
      buffer_(discretizer.window_seconds) {
  scenario_.validate();
  discretizer_.validate();
  weights_.validate();
  if (scenario_.tick_count() <= ticks_per_decision_) {
    throw ConfigError(fmt::format("scenario '{}' is shorter than one decision window", scenario_.name));
  }
  trace_.scenario = scenario_.name;
  trace_.seed = scenario_.seed;
  trace_.ladders_hash = space_.ladders_hash();
}

std::size_t ClosedLoop::reset() {
  env_ = std::make_unique<Environment>(scenario_, env_params_);
  buffer_.clear();
  cumulative_ = 0.0;
  trace_.records.clear();
  const std::size_t boot = space_.encode(static_policy(space_.ladders()));
  const WindowResult w = run_window(boot);
  conf_prev_ = w.conf;
  prev_action_ = boot;
  return encode_state(w.state);
}

Transition ClosedLoop::step(std::size_t action) {
  if (!env_) throw EpisodeFinished("step() before reset()");
  if (env_->finished()) throw EpisodeFinished(fmt::format("scenario '{}' already finished", scenario_.name));
  const WindowResult w = run_window(action);
  const double r = reward(weights_, w.conf, conf_prev_, w.power, w.latency, action != prev_action_);
  cumulative_ += r;
  if (record_) {
    trace_.records.back().reward = r;
    trace_.records.back().cumulative_reward = cumulative_;
  }
  conf_prev_ = w.conf;
  prev_action_ = action;
  return {r, encode_state(w.state), env_->finished()};
}

ClosedLoop::WindowResult ClosedLoop::run_window(std::size_t action) {
  const SensorConfig cfg = space_.decode(action);
  const std::size_t n = std::min(ticks_per_decision_, env_->tick_count() - env_->tick());
  WindowResult w;
  RawFactors smoothed;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t tick = env_->tick();
    const Observation obs = env_->step(cfg);
    smoothed = buffer_.push_and_smooth(raw_factors(obs, discretizer_.stale_ratio_weight_s), obs.time);
    w.state = discretize_state(smoothed, discretizer_);
    w.power += obs.power_w;
    w.latency += obs.latency_s;
    if (record_) {
      TraceRecord rec;
      rec.tick = tick;
      rec.time = obs.time;
      rec.state = w.state;
      rec.action = action;
      rec.decision = i + 1 == n;
      rec.obs = {conf_agg(obs.detections), obs.gpu_load, obs.power_w, obs.latency_s,
                 obs.contributions[ModalityId::kRgb], obs.contributions[ModalityId::kThermal]};
      rec.cumulative_reward = cumulative_;
      trace_.records.push_back(rec);
    }
  }
  w.conf = smoothed.confidence;
  w.power /= static_cast<double>(n);
  w.latency /= static_cast<double>(n);
  return w;
}

EpisodeTrace run_episode(const Scenario& scenario, Policy& policy, const RunConfig& cfg,
                         const ActionSpace& space) {
  ClosedLoop loop(scenario, space, cfg.discretizer, cfg.agent.reward, cfg.env, true);
  loop.set_policy_id(policy.id());
  play_episode(loop, policy);
  return loop.trace();
}

EpisodeTrace run_learning_episode(const Scenario& scenario, QLearner& learner, const RunConfig& cfg,
                                  const ActionSpace& space) {
  ClosedLoop loop(scenario, space, cfg.discretizer, cfg.agent.reward, cfg.env, true);
  loop.set_policy_id("learning");
  learner.run_episode(loop, 0);
  return loop.trace();
}

// --- training ------------------------------------------------------------------------

TrainOutput train(const RunConfig& cfg) {
  cfg.validate();
  const ActionSpace space(cfg.ladders);
  EnvParams train_env = cfg.env;
  train_env.noise = cfg.training.noise;
  EnvParams sweep_env = cfg.env;
  sweep_env.noise = false;

  std::vector<std::unique_ptr<ClosedLoop>> loops;
  std::vector<EpisodicTask*> tasks;
  std::vector<EpisodicTask*> sweeps;
  for (const auto& s : cfg.scenarios) {
    loops.push_back(std::make_unique<ClosedLoop>(s, space, cfg.discretizer, cfg.agent.reward, train_env));
    tasks.push_back(loops.back().get());
  }
  for (const auto& s : cfg.scenarios) {
    loops.push_back(std::make_unique<ClosedLoop>(s, space, cfg.discretizer, cfg.agent.reward, sweep_env));
    sweeps.push_back(loops.back().get());
  }

  TrainOutput out{QTable(space.size(), space.ladders_hash()), {}};
  const TrainOptions options{cfg.training.episodes, cfg.training.max_steps, cfg.training.convergence_sweeps};
  out.result = train_round_robin(tasks, sweeps, out.q, cfg.agent, options);
  return out;
}

std::string learning_curve_csv(const TrainResult& r) {
  std::string out = "episode,scenario,steps,cumulative_reward,epsilon\n";
  for (const auto& p : r.curve) {
    out += fmt::format("{},{},{},{:.9g},{:.9g}\n", p.episode, p.task, p.steps, p.cumulative_reward,
                       p.epsilon);
  }
  return out;
}

// --- evaluation ----------------------------------------------------------------------

double relative_delta_pct(double baseline, double candidate) {
  if (baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (baseline - candidate) / baseline * 100.0;
}

CellMetrics cell_metrics(const EpisodeTrace& trace) {
  CellMetrics m;
  m.policy = trace.policy;
  m.scenario = trace.scenario;
  if (trace.records.empty()) return m;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    m.mean_gpu_load += r.obs.gpu_load;
    m.mean_power_w += r.obs.power_w;
    m.mean_latency_s += r.obs.latency_s;
    m.mean_conf_agg += r.obs.conf_agg;
    if (i > 0 && r.action != trace.records[i - 1].action) ++m.switch_count;
  }
  const double n = static_cast<double>(trace.records.size());
  m.mean_gpu_load /= n;
  m.mean_power_w /= n;
  m.mean_latency_s /= n;
  m.mean_conf_agg /= n;
  m.cumulative_reward = trace.records.back().cumulative_reward;
  m.stabilized_action = trace.records.back().action;
  return m;
}

EvaluationResult evaluate(std::vector<std::unique_ptr<Policy>>& policies,
                          const std::vector<Scenario>& scenarios, const RunConfig& cfg,
                          const ActionSpace& space, const std::string& baseline) {
  if (policies.empty() || scenarios.empty()) throw ConfigError("evaluation needs policies and scenarios");
  RunConfig eval_cfg = cfg;
  eval_cfg.env.noise = false;

  std::vector<std::future<EpisodeTrace>> futures;
  for (auto& p : policies) {
    for (const auto& s : scenarios) {
      futures.push_back(std::async(std::launch::async, [&eval_cfg, &space, &s, policy = p.get()] {
        return run_episode(s, *policy, eval_cfg, space);
      }));
    }
  }

  EvaluationResult result;
  result.report.baseline = baseline;
  result.report.ladders_hash = space.ladders_hash();
  for (auto& f : futures) {
    result.traces.push_back(f.get());
    result.report.cells.push_back(cell_metrics(result.traces.back()));
  }

  const std::size_t ns = scenarios.size();
  std::size_t base_index = policies.size();
  for (std::size_t p = 0; p < policies.size(); ++p) {
    if (policies[p]->id() == baseline) base_index = p;
  }
  if (base_index == policies.size()) throw ConfigError(fmt::format("baseline policy '{}' not evaluated", baseline));

  for (std::size_t p = 0; p < policies.size(); ++p) {
    PolicySummary sum;
    sum.policy = policies[p]->id();
    for (std::size_t s = 0; s < ns; ++s) {
      auto& cell = result.report.cells[p * ns + s];
      const auto& base = result.report.cells[base_index * ns + s];
      cell.load_reduction_pct = relative_delta_pct(base.mean_gpu_load, cell.mean_gpu_load);
      cell.accuracy_delta_pct = relative_delta_pct(base.mean_conf_agg, cell.mean_conf_agg);
      sum.mean_gpu_load += cell.mean_gpu_load;
      sum.mean_power_w += cell.mean_power_w;
      sum.mean_conf_agg += cell.mean_conf_agg;
      sum.switch_count += cell.switch_count;
    }
    sum.mean_gpu_load /= static_cast<double>(ns);
    sum.mean_power_w /= static_cast<double>(ns);
    sum.mean_conf_agg /= static_cast<double>(ns);
    result.report.summaries.push_back(sum);
  }
  const PolicySummary base = result.report.summaries[base_index];
  for (auto& sum : result.report.summaries) {
    sum.load_reduction_pct = relative_delta_pct(base.mean_gpu_load, sum.mean_gpu_load);
    sum.accuracy_delta_pct = relative_delta_pct(base.mean_conf_agg, sum.mean_conf_agg);
  }
  return result;
}

std::vector<std::unique_ptr<Policy>> standard_policies(const ActionSpace& space, const QTable& q) {
  std::vector<std::unique_ptr<Policy>> p;
  p.push_back(std::make_unique<StaticPolicy>(space));
  p.push_back(std::make_unique<HeuristicPolicy>(space));
  p.push_back(std::make_unique<GreedyPolicy>(q));
  return p;
}

std::string metrics_json(const MetricsReport& r) {
  ordered_json j;
  j["baseline"] = r.baseline;
  j["ladders_hash"] = fmt::format("{:016x}", r.ladders_hash);
  j["summary"] = ordered_json::array();
  for (const auto& s : r.summaries) {
    ordered_json o;
    o["policy"] = s.policy;
    o["mean_gpu_load"] = s.mean_gpu_load;
    o["mean_power_w"] = s.mean_power_w;
    o["mean_conf_agg"] = s.mean_conf_agg;
    o["switch_count"] = s.switch_count;
    o["load_reduction_vs_baseline_pct"] = s.load_reduction_pct;
    o["accuracy_delta_vs_baseline_pct"] = s.accuracy_delta_pct;
    j["summary"].push_back(o);
  }
  j["cells"] = ordered_json::array();
  for (const auto& c : r.cells) {
    ordered_json o;
    o["policy"] = c.policy;
    o["scenario"] = c.scenario;
    o["mean_gpu_load"] = c.mean_gpu_load;
    o["mean_power_w"] = c.mean_power_w;
    o["mean_latency_s"] = c.mean_latency_s;
    o["mean_conf_agg"] = c.mean_conf_agg;
    o["switch_count"] = c.switch_count;
    o["cumulative_reward"] = c.cumulative_reward;
    o["stabilized_action"] = c.stabilized_action;
    o["load_reduction_vs_baseline_pct"] = c.load_reduction_pct;
    o["accuracy_delta_vs_baseline_pct"] = c.accuracy_delta_pct;
    j["cells"].push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string metrics_csv(const MetricsReport& r) {
  std::string out =
      "policy,scenario,mean_gpu_load,mean_power_w,mean_conf_agg,switch_count,"
      "load_reduction_vs_baseline_pct,accuracy_delta_vs_baseline_pct\n";
  for (const auto& c : r.cells) {
    out += fmt::format("{},{},{:.9g},{:.9g},{:.9g},{},{:.9g},{:.9g}\n", c.policy, c.scenario,
                       c.mean_gpu_load, c.mean_power_w, c.mean_conf_agg, c.switch_count,
                       c.load_reduction_pct, c.accuracy_delta_pct);
  }
  for (const auto& s : r.summaries) {
    out += fmt::format("{},ALL,{:.9g},{:.9g},{:.9g},{},{:.9g},{:.9g}\n", s.policy, s.mean_gpu_load,
                       s.mean_power_w, s.mean_conf_agg, s.switch_count, s.load_reduction_pct,
                       s.accuracy_delta_pct);
  }
  return out;
}

std::string stabilized_actions_csv(const MetricsReport& r, const ActionSpace& space) {
  std::string out =
      "policy,scenario,action,rgb_fps,rgb_res,thermal_fps,thermal_res,mmwave_fps,mmwave_pref,"
      "rgb_budget_px_s,thermal_budget_px_s\n";
  for (const auto& c : r.cells) {
    const SensorConfig a = space.decode(c.stabilized_action);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{:.0f},{:.0f}\n", c.policy, c.scenario,
                       c.stabilized_action, a.rgb_fps, to_string(a.rgb_res), a.thermal_fps,
                       to_string(a.thermal_res), a.mmwave_fps, to_string(a.mmwave_pref),
                       a.pixel_budget(ModalityId::kRgb), a.pixel_budget(ModalityId::kThermal));
  }
  return out;
}

// --- traces --------------------------------------------------------------------------

std::string trace_csv(const EpisodeTrace& t) {
  std::string out =
      "tick,time,illumination,motion,radar_density,system_load,sync_health,detection_conf,"
      "state_index,action,decision,conf_agg,gpu_load,power_w,latency_s,rgb_share,thermal_share,"
      "reward,cumulative_reward\n";
  for (const auto& r : t.records) {
    const auto b = r.state.bins();
    out += fmt::format("{},{:.9g},{},{},{},{},{},{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n",
                       r.tick, r.time, b[0], b[1], b[2], b[3], b[4], b[5], encode_state(r.state),
                       r.action, r.decision ? 1 : 0, r.obs.conf_agg, r.obs.gpu_load, r.obs.power_w,
                       r.obs.latency_s, r.obs.rgb_share, r.obs.thermal_share, r.reward,
                       r.cumulative_reward);
  }
  return out;
}

std::string trace_jsonl(const EpisodeTrace& t) {
  ordered_json h;
  h["type"] = "header";
  h["scenario"] = t.scenario;
  h["seed"] = t.seed;
  h["policy"] = t.policy;
  h["ladders_hash"] = t.ladders_hash;
  h["ticks"] = t.records.size();
  std::string out = h.dump() + "\n";
  for (const auto& r : t.records) {
    ordered_json o;
    o["tick"] = r.tick;
    o["time"] = r.time;
    const auto b = r.state.bins();
    o["state"] = std::vector<int>(b.begin(), b.end());
    o["action"] = r.action;
    o["decision"] = r.decision;
    o["conf_agg"] = r.obs.conf_agg;
    o["gpu_load"] = r.obs.gpu_load;
    o["power_w"] = r.obs.power_w;
    o["latency_s"] = r.obs.latency_s;
    o["rgb_share"] = r.obs.rgb_share;
    o["thermal_share"] = r.obs.thermal_share;
    o["reward"] = r.reward;
    o["cumulative_reward"] = r.cumulative_reward;
    out += o.dump() + "\n";
  }
  return out;
}

EpisodeTrace parse_trace_jsonl(std::string_view text) {
  EpisodeTrace t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        if (j.at("type") != "header") throw ParseError("first line must be the header");
        t.scenario = j.at("scenario").get<std::string>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.policy = j.at("policy").get<std::string>();
        t.ladders_hash = j.at("ladders_hash").get<std::uint64_t>();
        have_header = true;
        continue;
      }
      TraceRecord r;
      r.tick = j.at("tick").get<std::size_t>();
      r.time = j.at("time").get<double>();
      const auto bins = j.at("state").get<std::vector<int>>();
      if (bins.size() != kStateFactorCount) throw ParseError("state needs six bins");
      r.state = {static_cast<std::uint8_t>(bins[0]), static_cast<std::uint8_t>(bins[1]),
                 static_cast<std::uint8_t>(bins[2]), static_cast<std::uint8_t>(bins[3]),
                 static_cast<std::uint8_t>(bins[4]), static_cast<std::uint8_t>(bins[5])};
      if (!r.state.valid()) throw ParseError("state bins must lie in 0..2");
      r.action = j.at("action").get<std::size_t>();
      r.decision = j.at("decision").get<bool>();
      r.obs.conf_agg = j.at("conf_agg").get<double>();
      r.obs.gpu_load = j.at("gpu_load").get<double>();
      r.obs.power_w = j.at("power_w").get<double>();
      r.obs.latency_s = j.at("latency_s").get<double>();
      r.obs.rgb_share = j.at("rgb_share").get<double>();
      r.obs.thermal_share = j.at("thermal_share").get<double>();
      r.reward = j.at("reward").get<double>();
      r.cumulative_reward = j.at("cumulative_reward").get<double>();
      t.records.push_back(r);
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("trace line {}: {}", line_no, e.what()));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("trace line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw ParseError("trace has no header line");
  return t;
}

void export_trace(const EpisodeTrace& t, const std::filesystem::path& path, TraceFormat format) {
  write_text_file(path, format == TraceFormat::kCsv ? trace_csv(t) : trace_jsonl(t));
}

EpisodeTrace load_trace(const std::filesystem::path& path) { return parse_trace_jsonl(read_text_file(path)); }

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace adaptsense
