// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "adaptsense/agent.hpp"
#include "adaptsense/discretize.hpp"
#include "adaptsense/domain.hpp"
#include "adaptsense/env_sim.hpp"
#include "adaptsense/radar_lut.hpp"
#include "adaptsense/rng.hpp"
#include "adaptsense/runner.hpp"
#include "mdp_oracle.hpp"

using namespace adaptsense;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig acceptance_config() {
  return load_run_config(std::filesystem::path(ADAPTSENSE_SOURCE_DIR) / "configs" / "acceptance.json");
}

Outcome c1_state_space() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t idx = 0;
  for (std::uint8_t a = 0; a < 3; ++a)
    for (std::uint8_t b = 0; b < 3; ++b)
      for (std::uint8_t c = 0; c < 3; ++c)
        for (std::uint8_t d = 0; d < 3; ++d)
          for (std::uint8_t e = 0; e < 3; ++e)
            for (std::uint8_t f = 0; f < 3; ++f, ++idx) {
              const DiscreteState s{a, b, c, d, e, f};
              expect(o, encode_state(s) == idx && decode_state(idx) == s, fmt::format("state {}", idx));
            }
  expect(o, idx == 729, "state count");
  const ActionLadders ladders;
  const auto actions = enumerate_actions(ladders);
  expect(o, actions.size() == 768, fmt::format("{} actions", actions.size()));
  for (std::size_t i = 0; i < actions.size(); ++i) {
    expect(o, encode_action(actions[i], ladders) == i && decode_action(i, ladders) == actions[i],
           fmt::format("action {}", i));
  }
  const double secs = seconds_since(t0);
  expect(o, secs < 1.0, fmt::format("took {:.3f} s", secs));
  if (o.pass) o.detail = fmt::format("729 states, 768 actions, {:.4f} s", secs);
  return o;
}

Outcome c2_conf_agg() {
  Outcome o;
  expect(o, conf_agg(DetectionSet{}) == 0.0, "empty set");
  expect(o, conf_agg(DetectionSet({0.9, 0.6, 0.3, 0.1})) == (0.9 + 0.6 + 0.3) / 3.0, "top three");
  expect(o, conf_agg(DetectionSet({0.8})) == 0.8, "single detection");
  return o;
}

Outcome c3_reward() {
  Outcome o;
  RewardWeights w;
  w.alpha = 1.0;
  w.beta = w.gamma = w.delta = 0.0;
  w.kappa = 0.2;
  expect(o, std::abs(reward(w, 0.5, 0.9, 3.0, 0.1, false) + 0.2) <= 1e-12, "clipped drop");
  RewardWeights z = w;
  z.alpha = 0.0;
  expect(o, std::abs(reward(z, 0.5, 0.9, 3.0, 0.1, true)) <= 1e-12, "zero weights");
  RewardWeights s = z;
  s.delta = 0.5;
  expect(o, std::abs(reward(s, 0.5, 0.5, 3.0, 0.1, true) + 0.5) <= 1e-12, "switch penalty");

  Rng rng(2024);
  for (int i = 0; i < 10000; ++i) {
    RewardWeights r = z;
    r.alpha = 0.1 + 2.0 * rng.uniform();
    r.kappa = 0.01 + rng.uniform();
    const double ct = rng.uniform();
    const double cp = rng.uniform();
    const double v = reward(r, ct, cp, 0.0, 0.0, false);
    const double bound = r.alpha * r.kappa;
    expect(o, v <= bound + 1e-15 && v >= -bound - 1e-15, "clip bound exceeded");
    if (std::abs(ct - cp) >= r.kappa) expect(o, std::abs(std::abs(v) - bound) <= 1e-12, "clip not reached");
  }
  return o;
}

Outcome c4_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& m : {oracle::two_state_episodic(), oracle::three_state_chain(), oracle::three_state_ring()}) {
    const auto expected = oracle::value_iteration(m);
    oracle::MdpTask task(m);
    EpisodicTask* tasks[] = {&task};
    AgentConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.discount = m.discount;
    cfg.epsilon = {1.0, 1.0, 1};
    cfg.rng_seed = 11;
    QTable q(m.actions, 0, m.states);
    TrainOptions opt;
    opt.episodes = 1'000'000;
    opt.max_steps = 20'000;
    opt.convergence_sweeps = 0;
    train_round_robin(tasks, {}, q, cfg, opt);
    double worst = 0.0;
    for (std::size_t s = 0; s < m.states; ++s) {
      expect(o, q.greedy_action(s) == oracle::greedy(expected)[s], fmt::format("{} policy at s{}", m.name, s));
      for (std::size_t a = 0; a < m.actions; ++a) worst = std::max(worst, std::abs(q.value(s, a) - expected[s][a]));
    }
    expect(o, worst < 1e-6, fmt::format("{} max |dQ| = {:.3g}", m.name, worst));
  }
  const double secs = seconds_since(t0);
  expect(o, secs < 10.0, fmt::format("took {:.3f} s", secs));
  if (o.pass) o.detail = fmt::format("3 MDPs, {:.3f} s", secs);
  return o;
}

Outcome c5_calibration() {
  Outcome o;
  SceneCondition night;
  night.illumination = 0.05;
  SceneCondition day;
  day.illumination = 0.9;
  const auto n = contribution_scores(night, SensorConfig{});
  const auto d = contribution_scores(day, SensorConfig{});
  const double nt = n[ModalityId::kThermal];
  const double dr = d[ModalityId::kRgb];
  const double dt = d[ModalityId::kThermal];
  expect(o, std::abs(nt - 0.958) <= 0.05, fmt::format("night thermal {:.3f}", nt));
  expect(o, dr >= 0.70 && dr <= 0.80, fmt::format("day rgb {:.3f}", dr));
  expect(o, dt >= 0.19 && dt <= 0.27, fmt::format("day thermal {:.3f}", dt));
  if (o.pass) o.detail = fmt::format("night thermal {:.3f}, day rgb {:.3f} / thermal {:.3f}", nt, dr, dt);
  return o;
}

Outcome c6_radar() {
  Outcome o;
  for (const auto& e : radar_lut()) {
    const auto p = derive_radar_params(e.chirp);
    const double rel = std::abs(p.range_resolution_m * 2.0 * e.chirp.bandwidth_hz - kSpeedOfLight) / kSpeedOfLight;
    expect(o, rel <= 1e-12, fmt::format("range identity at {} fps", e.fps));
  }
  for (int fps : radar_lut_rates()) {
    const auto r = radar_params_for(RadarPreference::kPreferRange, fps);
    const auto v = radar_params_for(RadarPreference::kPreferVelocity, fps);
    expect(o, r.range_resolution_m < v.range_resolution_m, fmt::format("range ordering at {} fps", fps));
    expect(o, v.radial_velocity_resolution_mps < r.radial_velocity_resolution_mps,
           fmt::format("velocity ordering at {} fps", fps));
  }
  if (o.pass) o.detail = fmt::format("{} entries", radar_lut().size());
  return o;
}

struct AcceptanceRun {
  RunConfig cfg;
  TrainOutput trained;
  EvaluationResult eval;
  double train_seconds = 0.0;
};

AcceptanceRun run_acceptance() {
  AcceptanceRun r{acceptance_config(), TrainOutput{QTable(1), {}}, {}, 0.0};
  const ActionSpace space(r.cfg.ladders);
  const auto t0 = std::chrono::steady_clock::now();
  r.trained = train(r.cfg);
  r.train_seconds = seconds_since(t0);
  auto policies = standard_policies(space, r.trained.q);
  r.eval = evaluate(policies, r.cfg.scenarios, r.cfg, space);
  return r;
}

Outcome c7_tradeoff(const AcceptanceRun& r) {
  Outcome o;
  const PolicySummary* adaptive = nullptr;
  for (const auto& s : r.eval.report.summaries)
    if (s.policy == "adaptive") adaptive = &s;
  if (adaptive == nullptr) return {false, "no adaptive summary"};
  expect(o, r.trained.result.total_steps <= 50'000, fmt::format("{} steps", r.trained.result.total_steps));
  expect(o, r.train_seconds < 300.0, fmt::format("training took {:.1f} s", r.train_seconds));
  expect(o, adaptive->load_reduction_pct >= 20.0, fmt::format("load reduction {:.1f}%", adaptive->load_reduction_pct));
  expect(o, adaptive->accuracy_delta_pct <= 10.0, fmt::format("accuracy delta {:.1f}%", adaptive->accuracy_delta_pct));
  if (o.pass) {
    o.detail = fmt::format("load reduction {:.1f}%, accuracy delta {:.1f}%, {} steps in {:.2f} s",
                           adaptive->load_reduction_pct, adaptive->accuracy_delta_pct,
                           r.trained.result.total_steps, r.train_seconds);
  }
  return o;
}

Outcome c8_adaptation(const AcceptanceRun& r) {
  Outcome o;
  const ActionSpace space(r.cfg.ladders);
  std::size_t checked = 0;
  std::string summary;
  for (const auto& c : r.eval.report.cells) {
    if (c.policy != "adaptive") continue;
    const SensorConfig a = space.decode(c.stabilized_action);
    const double rgb = a.pixel_budget(ModalityId::kRgb);
    const double th = a.pixel_budget(ModalityId::kThermal);
    if (c.scenario.rfind("poor_light", 0) == 0) {
      expect(o, th > rgb, fmt::format("{}: thermal {} <= rgb {}", c.scenario, th, rgb));
    } else if (c.scenario == "good_light_static") {
      expect(o, rgb > th, fmt::format("{}: rgb {} <= thermal {}", c.scenario, rgb, th));
    } else {
      continue;
    }
    ++checked;
    summary += fmt::format("{}{} rgb {:.0f} / thermal {:.0f}", summary.empty() ? "" : "; ", c.scenario, rgb, th);
  }
  expect(o, checked == 3, fmt::format("{} scenarios checked", checked));
  if (o.pass) o.detail = summary;
  return o;
}

Outcome c9_determinism(const AcceptanceRun& first) {
  Outcome o;
  const AcceptanceRun second = run_acceptance();
  expect(o, metrics_json(first.eval.report) == metrics_json(second.eval.report), "metrics.json differs");
  expect(o, metrics_csv(first.eval.report) == metrics_csv(second.eval.report), "metrics.csv differs");
  expect(o, first.trained.q.serialize() == second.trained.q.serialize(), "Q-table differs");
  expect(o, learning_curve_csv(first.trained.result) == learning_curve_csv(second.trained.result),
         "learning curve differs");
  return o;
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, fmt::format("exception: {}", e.what())};
  }
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;
  results.emplace_back("1 state/action space round trip", guarded(c1_state_space));
  results.emplace_back("2 ConfAgg examples", guarded(c2_conf_agg));
  results.emplace_back("3 reward arithmetic and clip bounds", guarded(c3_reward));
  results.emplace_back("4 Q-learning matches value iteration", guarded(c4_oracle));
  results.emplace_back("5 contribution calibration", guarded(c5_calibration));
  results.emplace_back("6 radar LUT physics", guarded(c6_radar));

  std::optional<AcceptanceRun> run;
  try {
    run = run_acceptance();
  } catch (const std::exception& e) {
    const Outcome failed{false, fmt::format("exception: {}", e.what())};
    results.emplace_back("7 adaptive vs heuristic trade-off", failed);
    results.emplace_back("8 scenario adaptation", failed);
    results.emplace_back("9 end-to-end determinism", failed);
  }
  if (run) {
    results.emplace_back("7 adaptive vs heuristic trade-off", guarded([&] { return c7_tradeoff(*run); }));
    results.emplace_back("8 scenario adaptation", guarded([&] { return c8_adaptation(*run); }));
    results.emplace_back("9 end-to-end determinism", guarded([&] { return c9_determinism(*run); }));
  }

  int failures = 0;
  for (const auto& [name, o] : results) {
    if (!o.pass) ++failures;
    std::printf("%s  criterion %s%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.empty() ? "" : "  -- ",
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures, results.size());
  return failures == 0 ? 0 : 1;
}
