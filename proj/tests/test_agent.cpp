#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "adaptsense/agent.hpp"
#include "adaptsense/env_sim.hpp"
#include "adaptsense/errors.hpp"
#include "mdp_oracle.hpp"

using namespace adaptsense;

namespace {

RewardWeights zero_weights() {
  RewardWeights w;
  w.alpha = w.beta = w.gamma = w.delta = 0.0;
  return w;
}

// Trains with uniform exploration throughout and returns the table.
QTable train_on(const oracle::Mdp& m, std::size_t steps, std::uint64_t seed) {
  oracle::MdpTask task(m);
  EpisodicTask* tasks[] = {&task};
  AgentConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.discount = m.discount;
  cfg.epsilon = {1.0, 1.0, 1};
  cfg.rng_seed = seed;
  QTable q(m.actions, 0, m.states);
  TrainOptions opt;
  opt.episodes = 1'000'000;
  opt.max_steps = steps;
  opt.convergence_sweeps = 0;
  train_round_robin(tasks, {}, q, cfg, opt);
  return q;
}

}  // namespace

TEST_SUITE("agent") {
  TEST_CASE("reward examples") {
    RewardWeights w = zero_weights();
    w.alpha = 1.0;
    w.kappa = 0.2;
    CHECK(std::abs(reward(w, 0.5, 0.9, 3.0, 0.1, true) - (-0.2)) <= 1e-12);
    CHECK(reward(zero_weights(), 0.3, 0.9, 12.0, 0.5, true) == 0.0);
    RewardWeights s = zero_weights();
    s.delta = 0.5;
    SensorConfig a;
    SensorConfig b;
    b.rgb_fps = 5;
    CHECK(std::abs(reward(s, 0.4, 0.4, 5.0, 0.05, a, b) - (-0.5)) <= 1e-12);
    CHECK(reward(s, 0.4, 0.4, 5.0, 0.05, a, a) == 0.0);
  }

  TEST_CASE("reward default weights by direct substitution") {
    const RewardWeights w;
    const double r = reward(w, 0.70, 0.65, 8.0, 0.06, true);
    CHECK(r == doctest::Approx(1.0 * 0.05 - 0.02 * 8.0 - 0.5 * 0.06 - 0.05).epsilon(1e-12));
  }

  TEST_CASE("quality term is clipped to +-alpha*kappa") {
    Rng rng(17);
    RewardWeights w = zero_weights();
    for (int i = 0; i < 5000; ++i) {
      w.alpha = 3.0 * rng.uniform();
      w.kappa = 0.01 + rng.uniform();
      const double ct = rng.uniform();
      const double cp = rng.uniform();
      const double r = reward(w, ct, cp, 0.0, 0.0, false);
      REQUIRE(r <= w.alpha * w.kappa + 1e-15);
      REQUIRE(r >= -w.alpha * w.kappa - 1e-15);
      if (std::abs(ct - cp) >= w.kappa) REQUIRE(std::abs(r) == doctest::Approx(w.alpha * w.kappa));
    }
  }

  TEST_CASE("reward decreases in power and latency") {
    const RewardWeights w;
    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
      const double p = 20.0 * rng.uniform();
      const double l = rng.uniform();
      const double dp = 0.01 + rng.uniform();
      REQUIRE(reward(w, 0.5, 0.5, p + dp, l, false) < reward(w, 0.5, 0.5, p, l, false));
      REQUIRE(reward(w, 0.5, 0.5, p, l + dp, false) < reward(w, 0.5, 0.5, p, l, false));
    }
  }

  TEST_CASE("greedy selection and tie-breaking") {
    QTable q(768);
    Rng rng(1);
    CHECK(select_action(q, DiscreteState{}, 0.0, rng) == 0);
    q.set_value(0, 5, 1.0);
    CHECK(select_action(q, DiscreteState{}, 0.0, rng) == 5);
    q.set_value(0, 9, 1.0);
    CHECK(select_action(q, DiscreteState{}, 0.0, rng) == 5);
  }

  TEST_CASE("epsilon 1 draws reproduce under a fixed seed") {
    const QTable q(768);
    Rng a(99);
    Rng b(99);
    std::vector<std::size_t> xs;
    for (int i = 0; i < 200; ++i) {
      const auto x = select_action(q, 17, 1.0, a);
      REQUIRE(x == select_action(q, 17, 1.0, b));
      xs.push_back(x);
    }
    CHECK(std::count(xs.begin(), xs.end(), xs.front()) < 10);
  }

  TEST_CASE("greedy choice is invariant to adding a constant to a row") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      QTable q(12, 0, 3);
      for (std::size_t a = 0; a < 12; ++a) q.set_value(1, a, std::round(rng.uniform() * 4.0));
      const auto before = q.greedy_action(1);
      const double k = 100.0 * (rng.uniform() - 0.5);
      for (std::size_t a = 0; a < 12; ++a) q.set_value(1, a, q.value(1, a) + k);
      REQUIRE(q.greedy_action(1) == before);
    }
  }

  TEST_CASE("q_update examples") {
    AgentConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.discount = 0.0;
    QTable q(4, 0, 3);
    CHECK(q_update(q, 0, 1, 0.7, 2, cfg) == 0.7);
    CHECK(q.visits(0, 1) == 1);

    // lr = 0 is outside the validated range; the update itself leaves the value.
    AgentConfig frozen = cfg;
    frozen.learning_rate = 0.0;
    q.set_value(1, 1, 0.25);
    CHECK(q_update(q, 1, 1, 123.0, 2, frozen) == 0.25);
  }

  TEST_CASE("q_update follows the Watkins formula") {
    AgentConfig cfg;
    cfg.learning_rate = 0.3;
    cfg.discount = 0.9;
    QTable q(3, 0, 2);
    q.set_value(0, 0, 0.5);
    q.set_value(1, 0, -1.0);
    q.set_value(1, 2, 2.0);
    const double expected = 0.7 * 0.5 + 0.3 * (0.1 + 0.9 * 2.0);
    CHECK(q_update(q, 0, 0, 0.1, 1, cfg) == doctest::Approx(expected).epsilon(1e-15));
  }

  TEST_CASE("q_update touches a single entry") {
    Rng rng(12);
    AgentConfig cfg;
    QTable q(6, 0, 4);
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t a = 0; a < 6; ++a) q.set_value(s, a, rng.uniform());
    for (int i = 0; i < 200; ++i) {
      const QTable before = q;
      const auto s = rng.uniform_index(4);
      const auto a = rng.uniform_index(6);
      q_update(q, s, a, rng.uniform(), rng.uniform_index(4), cfg);
      for (std::size_t s2 = 0; s2 < 4; ++s2)
        for (std::size_t a2 = 0; a2 < 6; ++a2) {
          if (s2 == s && a2 == a) continue;
          REQUIRE(q.value(s2, a2) == before.value(s2, a2));
          REQUIRE(q.visits(s2, a2) == before.visits(s2, a2));
        }
    }
  }

  TEST_CASE("visit-average step size") {
    AgentConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.discount = 0.0;
    cfg.learning_rate_mode = LearningRateMode::kVisitAverage;
    QTable q(1, 0, 1);
    q_update(q, 0, 0, 1.0, 0, cfg);
    CHECK(q.value(0, 0) == 1.0);
    q_update(q, 0, 0, 3.0, 0, cfg);
    CHECK(q.value(0, 0) == 2.0);
    q_update(q, 0, 0, 5.0, 0, cfg);
    CHECK(q.value(0, 0) == doctest::Approx(3.0));
  }

  TEST_CASE("epsilon schedule") {
    const EpsilonSchedule e{1.0, 0.1, 100};
    CHECK(e.at(0) == 1.0);
    CHECK(e.at(50) == doctest::Approx(0.55));
    CHECK(e.at(100) == 0.1);
    CHECK(e.at(1000) == 0.1);
  }

  TEST_CASE("agent config validation") {
    AgentConfig c;
    CHECK_NOTHROW(c.validate());
    c.discount = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = AgentConfig{};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = AgentConfig{};
    c.epsilon.start = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("value iteration oracle on the two-state MDP by hand") {
    const auto q = oracle::value_iteration(oracle::two_state_episodic());
    CHECK(q[0][0] == doctest::Approx(1.8));
    CHECK(q[0][1] == doctest::Approx(1.0));
    CHECK(q[1][0] == doctest::Approx(2.0));
    CHECK(q[1][1] == doctest::Approx(1.62));
  }

  TEST_CASE("Q-learning matches the oracle on small deterministic MDPs") {
    for (const auto& m : {oracle::two_state_episodic(), oracle::three_state_chain(), oracle::three_state_ring()}) {
      CAPTURE(m.name);
      const auto expected = oracle::value_iteration(m);
      const QTable q = train_on(m, 20'000, 3);
      for (std::size_t s = 0; s < m.states; ++s) {
        CHECK(q.greedy_action(s) == oracle::greedy(expected)[s]);
        for (std::size_t a = 0; a < m.actions; ++a) CHECK(std::abs(q.value(s, a) - expected[s][a]) < 1e-6);
      }
    }
  }

  TEST_CASE("static policy is the max configuration") {
    const auto c = static_policy();
    CHECK(c.rgb_fps == 27);
    CHECK(c.thermal_fps == 27);
    CHECK(c.mmwave_fps == 27);
    CHECK(c.rgb_res == Resolution{1280, 720});
    CHECK(c.thermal_res == Resolution{320, 240});
    CHECK(c.mmwave_pref == RadarPreference::kPreferRange);
    CHECK(static_policy(ActionLadders{}) == c);
    const ActionSpace space;
    StaticPolicy p(space);
    for (std::size_t s = 0; s < kStateCount; s += 17) CHECK(p.select(s) == space.encode(c));
  }

  TEST_CASE("static policy has the highest load of the range-mode actions") {
    const CostModel m;
    const double load = compute_cost(static_policy(), m).raw_load;
    for (const auto& a : enumerate_actions(ActionLadders{})) {
      if (a.mmwave_pref == RadarPreference::kPreferRange) REQUIRE(compute_cost(a, m).raw_load <= load);
      REQUIRE(compute_cost(a, m).gpu_load <= compute_cost(static_policy(), m).gpu_load);
    }
  }

  TEST_CASE("heuristic rule table") {
    const auto dark = heuristic_policy({0, 0, 0, 0, 0, 0});
    CHECK(dark.thermal_res == Resolution{320, 240});
    CHECK(dark.thermal_fps == 27);
    CHECK(dark.rgb_res == Resolution{640, 360});
    CHECK(dark.rgb_fps == 5);

    const auto bright = heuristic_policy({2, 0, 0, 0, 0, 0});
    CHECK(bright.rgb_res == Resolution{1280, 720});
    CHECK(bright.rgb_fps == 27);
    CHECK(bright.thermal_res == Resolution{160, 120});
    CHECK(bright.thermal_fps == 5);

    const auto mid = heuristic_policy({1, 0, 0, 0, 0, 0});
    CHECK(mid.rgb_res == Resolution{960, 540});
    CHECK(mid.rgb_fps == 15);
    CHECK(mid.mmwave_pref == RadarPreference::kPreferRange);

    const auto fast = heuristic_policy({2, 2, 0, 0, 0, 0});
    CHECK(fast.rgb_fps == 27);
    CHECK(fast.thermal_fps == 15);
    CHECK(fast.mmwave_fps == 27);
    CHECK(fast.mmwave_pref == RadarPreference::kPreferVelocity);

    CHECK(heuristic_policy({1, 0, 2, 0, 0, 0}).mmwave_fps == 27);
    CHECK_THROWS_AS(heuristic_policy({3, 0, 0, 0, 0, 0}), RangeError);
  }

  TEST_CASE("heuristic is a pure function landing on the ladders") {
    const ActionSpace space;
    for (std::size_t s = 0; s < kStateCount; ++s) {
      const auto a = heuristic_policy(decode_state(s));
      REQUIRE(a == heuristic_policy(decode_state(s)));
      REQUIRE(space.contains(a));
    }
    ActionLadders coarse;
    coarse.fps = {1, 10, 30};
    for (std::size_t s = 0; s < kStateCount; s += 7) {
      REQUIRE(ActionSpace(coarse).contains(heuristic_policy(decode_state(s), coarse)));
    }
  }

  TEST_CASE("qtable binary round trip") {
    QTable q(5, 0xabcdefULL, 3);
    q.set_value(2, 4, -1.25);
    q.set_value(0, 0, 3.5e-7);
    q.add_visit(2, 4);
    const auto copy = QTable::deserialize(q.serialize());
    CHECK(copy == q);

    const auto path = std::filesystem::temp_directory_path() / "adaptsense_q_roundtrip.bin";
    q.save(path);
    CHECK(QTable::load(path, 0xabcdefULL) == q);
    CHECK_THROWS_AS(QTable::load(path, 0x1234ULL), ConfigError);
    std::filesystem::remove(path);
  }

  TEST_CASE("qtable rejects corrupt data") {
    const QTable q(4, 1, 2);
    std::string bytes = q.serialize();
    CHECK_THROWS_AS(QTable::deserialize(bytes.substr(0, bytes.size() - 1)), ParseError);
    bytes[0] = 'X';
    CHECK_THROWS_AS(QTable::deserialize(bytes), ParseError);
    CHECK_THROWS_AS(QTable::load("/nonexistent/q.bin", 1), IoError);
  }

  TEST_CASE("qtable index checks") {
    QTable q(768);
    CHECK(q.state_count() == 729);
    CHECK_THROWS_AS(q.value(729, 0), RangeError);
    CHECK_THROWS_AS(q.value(0, 768), UnknownActionError);
  }

  TEST_CASE("frozen greedy policy is a pure function of the state") {
    QTable q(768);
    Rng rng(2);
    for (int i = 0; i < 5000; ++i) q.set_value(rng.uniform_index(729), rng.uniform_index(768), rng.uniform());
    GreedyPolicy p(q);
    for (std::size_t s = 0; s < kStateCount; ++s) REQUIRE(p.select(s) == p.select(s));
  }

  TEST_CASE("training stops on the convergence criterion") {
    oracle::MdpTask task(oracle::two_state_episodic());
    oracle::MdpTask sweep(oracle::two_state_episodic(), 0, 50);
    EpisodicTask* tasks[] = {&task};
    EpisodicTask* sweeps[] = {&sweep};
    AgentConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.discount = 0.9;
    cfg.epsilon = {1.0, 0.2, 200};
    QTable q(2, 0, 2);
    TrainOptions opt;
    opt.episodes = 100'000;
    opt.max_steps = 0;
    opt.convergence_sweeps = 5;
    const auto r = train_round_robin(tasks, sweeps, q, cfg, opt);
    CHECK(r.converged);
    CHECK(r.curve.size() < 100'000);
    CHECK(r.total_steps >= 200);
    CHECK(q.greedy_action(0) == 0);
    CHECK(q.greedy_action(1) == 0);
  }

  TEST_CASE("training honours the episode and step budgets") {
    oracle::MdpTask task(oracle::three_state_chain());
    EpisodicTask* tasks[] = {&task};
    QTable q(2, 0, 3);
    TrainOptions opt;
    opt.episodes = 3;
    opt.max_steps = 250;
    opt.convergence_sweeps = 0;
    const auto r = train_round_robin(tasks, {}, q, AgentConfig{}, opt);
    CHECK(r.total_steps == 250);
    CHECK(r.curve.size() == 1);
  }
}
