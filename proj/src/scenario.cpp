#include "adaptsense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "adaptsense/errors.hpp"

namespace adaptsense {

using nlohmann::json;

SceneCondition SceneCondition::clamped() const {
  SceneCondition s = *this;
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  s.illumination = unit(illumination);
  s.occlusion = unit(occlusion);
  s.fog_density = unit(fog_density);
  s.radar_reflectivity = unit(radar_reflectivity);
  s.target_speed = std::max(0.0, target_speed);
  s.platform_speed = std::max(0.0, platform_speed);
  return s;
}

void Scenario::validate() const {
  if (phases.empty()) throw ConfigError(fmt::format("scenario '{}' has no phases", name));
  if (!(tick_rate_hz > 0.0)) throw ConfigError(fmt::format("scenario '{}' tick_rate must be > 0", name));
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!(phases[i].duration_s > 0.0)) {
      throw ConfigError(fmt::format("scenario '{}' phase {} duration must be > 0", name, i));
    }
  }
}

double Scenario::total_duration() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration_s;
  return total;
}

std::size_t Scenario::tick_count() const {
  // The tolerance absorbs representation error in products such as 0.1 * 30.
  return static_cast<std::size_t>(std::ceil(total_duration() * tick_rate_hz - 1e-9));
}

SceneCondition scene_at(const Scenario& scenario, double t) {
  if (t < 0.0) throw RangeError(fmt::format("scene time {} is negative", t));
  double start = 0.0;
  for (const auto& phase : scenario.phases) {
    const double end = start + phase.duration_s;
    if (t < end) return phase.scene.clamped();
    start = end;
  }
  throw EpisodeFinished(
      fmt::format("t = {} is past the end of scenario '{}' ({} s)", t, scenario.name, start));
}

namespace {

// Field access with the JSON path reported on failure.
class Reader {
 public:
  Reader(const json& j, std::string path, std::string_view source)
      : j_(j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(std::string_view field, std::string_view what) const {
    throw ParseError(fmt::format("{}: {}/{}: {}", source_, path_, field, what));
  }

  const json& field(std::string_view key) const {
    if (!j_.is_object()) fail("", "expected an object");
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) fail(key, "missing required field");
    return *it;
  }

  double number(std::string_view key) const {
    const auto& v = field(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double number_or(std::string_view key, double fallback) const {
    return j_.contains(std::string(key)) ? number(key) : fallback;
  }

  bool boolean(std::string_view key) const {
    const auto& v = field(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(std::string_view key) const {
    const auto& v = field(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::uint64_t u64(std::string_view key) const {
    const auto& v = field(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
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

}  // namespace

Scenario parse_scenario(std::string_view json_text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}: invalid JSON: {}", source,
                                 line_context(json_text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }

  const Reader root(doc, "", source);
  Scenario s;
  s.name = root.string("name");
  s.tick_rate_hz = root.number("tick_rate");
  s.seed = root.u64("seed");
  const auto& phases = root.field("phases");
  if (!phases.is_array()) root.fail("phases", "expected an array");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Reader p(phases[i], fmt::format("/phases/{}", i), source);
    ScenarioPhase phase;
    phase.duration_s = p.number("duration_s");
    phase.scene.illumination = p.number("illumination");
    phase.scene.target_speed = p.number("target_speed");
    phase.scene.occlusion = p.number("occlusion");
    phase.scene.fog_density = p.number("fog");
    phase.scene.target_present = p.boolean("target_present");
    phase.scene.radar_reflectivity = p.number("radar_reflectivity");
    phase.scene.platform_speed = p.number_or("platform_speed", 0.0);
    s.phases.push_back(phase);
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ParseError(fmt::format("{}: {}", source, e.what()));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open scenario file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["tick_rate"] = s.tick_rate_hz;
  j["seed"] = s.seed;
  j["phases"] = nlohmann::ordered_json::array();
  for (const auto& p : s.phases) {
    nlohmann::ordered_json pj;
    pj["duration_s"] = p.duration_s;
    pj["illumination"] = p.scene.illumination;
    pj["target_speed"] = p.scene.target_speed;
    pj["occlusion"] = p.scene.occlusion;
    pj["fog"] = p.scene.fog_density;
    pj["target_present"] = p.scene.target_present;
    pj["radar_reflectivity"] = p.scene.radar_reflectivity;
    pj["platform_speed"] = p.scene.platform_speed;
    j["phases"].push_back(pj);
  }
  return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write scenario file '{}'", path.string()));
  out << scenario_to_json(s);
}

namespace {

constexpr double kGoodLight = 0.85;
constexpr double kPoorLight = 0.08;
// The rover keeps patrolling in every setup; "static" refers to the target.
constexpr double kPatrolSpeed = 0.3;

SceneCondition scene(double illumination, double target_speed, double occlusion,
                     double reflectivity) {
  SceneCondition c;
  c.illumination = illumination;
  c.target_speed = target_speed;
  c.occlusion = occlusion;
  c.fog_density = 0.0;
  c.target_present = true;
  c.radar_reflectivity = reflectivity;
  c.platform_speed = kPatrolSpeed;
  return c;
}

}  // namespace

std::vector<Scenario> bundled_scenarios() {
  return {
      {"good_light_static", 30.0, {{30.0, scene(kGoodLight, 0.0, 0.0, 0.5)}}, 101},
      {"poor_light_static", 30.0, {{30.0, scene(kPoorLight, 0.0, 0.0, 0.5)}}, 102},
      {"good_light_moving",
       30.0,
       {{12.0, scene(kGoodLight, 1.1, 0.0, 0.5)}, {18.0, scene(kGoodLight, 1.4, 0.0, 0.5)}},
       103},
      {"poor_light_moving",
       30.0,
       {{12.0, scene(kPoorLight, 1.1, 0.0, 0.5)}, {18.0, scene(kPoorLight, 1.4, 0.0, 0.5)}},
       104},
      {"good_light_partial_occlusion",
       30.0,
       {{10.0, scene(kGoodLight, 0.0, 0.3, 0.5)}, {20.0, scene(kGoodLight, 0.0, 0.45, 0.5)}},
       105},
      {"good_light_heavy_occlusion",
       30.0,
       {{30.0, scene(kGoodLight, 0.6, 0.75, 0.8)}},
       106},
  };
}

}  // namespace adaptsense
