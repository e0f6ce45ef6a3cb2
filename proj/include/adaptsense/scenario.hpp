#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adaptsense {

struct SceneCondition {
  double illumination = 1.0;        // 0 = dark
  double target_speed = 0.0;        // m/s
  double occlusion = 0.0;           // fraction of the target hidden from optical sensors
  double fog_density = 0.0;
  bool target_present = true;
  double radar_reflectivity = 0.5;
  double platform_speed = 0.0;      // m/s, ego-motion of the rover

  // Clamps fractional fields to [0, 1] and speeds to >= 0.
  SceneCondition clamped() const;
  friend bool operator==(const SceneCondition&, const SceneCondition&) = default;
};

struct ScenarioPhase {
  double duration_s = 0.0;
  SceneCondition scene;
  friend bool operator==(const ScenarioPhase&, const ScenarioPhase&) = default;
};

struct Scenario {
  std::string name;
  double tick_rate_hz = 30.0;
  std::vector<ScenarioPhase> phases;
  std::uint64_t seed = 0;

  void validate() const;
  double total_duration() const;
  // ceil(total_duration * tick_rate)
  std::size_t tick_count() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Piecewise-constant lookup over half-open phase intervals [start, end).
// Throws EpisodeFinished for t >= total duration and RangeError for t < 0.
SceneCondition scene_at(const Scenario& scenario, double t);

// JSON schema: {name, tick_rate, seed, phases: [{duration_s, illumination,
// target_speed, occlusion, fog, target_present, radar_reflectivity,
// platform_speed?}]}. Errors carry line/column or the offending field path.
Scenario parse_scenario(std::string_view json_text, std::string_view source = "<memory>");
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// The six in-lab scenarios: good/poor lighting with a static or moving target,
// and two good-lighting occlusion cases.
std::vector<Scenario> bundled_scenarios();

}  // namespace adaptsense
