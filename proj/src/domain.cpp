#include "adaptsense/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"

namespace adaptsense {

std::string_view to_string(ModalityId m) {
  switch (m) {
    case ModalityId::kRgb: return "rgb";
    case ModalityId::kThermal: return "thermal";
    case ModalityId::kMmWave: return "mmwave";
    case ModalityId::kDepth: return "depth";
  }
  return "unknown";
}

std::string to_string(Resolution r) { return fmt::format("{}x{}", r.width, r.height); }

Resolution parse_resolution(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    throw ConfigError(fmt::format("resolution '{}' is not WIDTHxHEIGHT", text));
  }
  Resolution r;
  const auto w = text.substr(0, x);
  const auto h = text.substr(x + 1);
  const auto rw = std::from_chars(w.data(), w.data() + w.size(), r.width);
  const auto rh = std::from_chars(h.data(), h.data() + h.size(), r.height);
  if (rw.ec != std::errc{} || rw.ptr != w.data() + w.size() || rh.ec != std::errc{} ||
      rh.ptr != h.data() + h.size() || !r.valid()) {
    throw ConfigError(fmt::format("resolution '{}' is not WIDTHxHEIGHT", text));
  }
  return r;
}

std::string_view to_string(RadarPreference p) {
  return p == RadarPreference::kPreferRange ? "range" : "velocity";
}

RadarPreference parse_radar_preference(std::string_view text) {
  if (text == "range") return RadarPreference::kPreferRange;
  if (text == "velocity") return RadarPreference::kPreferVelocity;
  throw ConfigError(fmt::format("radar preference '{}' must be 'range' or 'velocity'", text));
}

bool RadarParams::valid() const {
  return range_resolution_m > 0.0 && max_unambiguous_range_m > 0.0 &&
         max_radial_velocity_mps > 0.0 && radial_velocity_resolution_mps > 0.0 &&
         max_unambiguous_range_m >= range_resolution_m &&
         max_radial_velocity_mps >= radial_velocity_resolution_mps;
}

double SensorConfig::pixel_budget(ModalityId m) const {
  switch (m) {
    case ModalityId::kRgb: return static_cast<double>(rgb_res.pixels()) * rgb_fps;
    case ModalityId::kThermal: return static_cast<double>(thermal_res.pixels()) * thermal_fps;
    default: return 0.0;
  }
}

bool SensorConfig::fps_within_sync_bounds() const {
  auto ok = [](int f) { return f >= kMinFps && f <= kSyncCapFps; };
  return ok(rgb_fps) && ok(thermal_fps) && ok(mmwave_fps);
}

std::string to_string(const SensorConfig& c) {
  return fmt::format("rgb {}@{} thermal {}@{} mmwave {}@{}", to_string(c.rgb_res), c.rgb_fps,
                     to_string(c.thermal_res), c.thermal_fps, to_string(c.mmwave_pref),
                     c.mmwave_fps);
}

double ContributionVector::sum() const { return std::accumulate(share.begin(), share.end(), 0.0); }

DetectionSet::DetectionSet(std::vector<double> confidences) : confidences_(std::move(confidences)) {
  for (double c : confidences_) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw DomainError(fmt::format("detection confidence {} outside [0, 1]", c));
    }
  }
  std::sort(confidences_.begin(), confidences_.end(), std::greater<>());
}

std::array<std::uint8_t, kStateFactorCount> DiscreteState::bins() const {
  return {illumination, motion, radar_density, system_load, sync_health, detection_conf};
}

bool DiscreteState::valid() const {
  const auto b = bins();
  return std::all_of(b.begin(), b.end(), [](std::uint8_t v) { return v < kBinsPerFactor; });
}

std::string to_string(const DiscreteState& s) {
  return fmt::format("({},{},{},{},{},{})", s.illumination, s.motion, s.radar_density,
                     s.system_load, s.sync_health, s.detection_conf);
}

std::size_t encode_state(const DiscreteState& s) {
  if (!s.valid()) throw RangeError(fmt::format("state {} has a bin outside 0..2", to_string(s)));
  std::size_t index = 0;
  for (std::uint8_t b : s.bins()) index = index * kBinsPerFactor + b;
  return index;
}

DiscreteState decode_state(std::size_t index) {
  if (index >= kStateCount) {
    throw RangeError(fmt::format("state index {} outside [0, {})", index, kStateCount));
  }
  std::array<std::uint8_t, kStateFactorCount> digits{};
  for (std::size_t i = kStateFactorCount; i-- > 0;) {
    digits[i] = static_cast<std::uint8_t>(index % kBinsPerFactor);
    index /= kBinsPerFactor;
  }
  return {digits[0], digits[1], digits[2], digits[3], digits[4], digits[5]};
}

void RewardWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 && delta >= 0.0)) {
    throw ConfigError("reward weights alpha, beta, gamma, delta must be nonnegative");
  }
  if (!(kappa > 0.0)) throw ConfigError("reward clip bound kappa must be positive");
}

namespace {

template <typename T>
void require_unique_nonempty(const std::vector<T>& values, std::string_view what) {
  if (values.empty()) throw ConfigError(fmt::format("{} ladder is empty", what));
  std::set<T> seen(values.begin(), values.end());
  if (seen.size() != values.size()) {
    throw ConfigError(fmt::format("{} ladder has duplicate entries", what));
  }
}

template <typename T>
std::size_t position_of(const std::vector<T>& values, const T& v) {
  const auto it = std::find(values.begin(), values.end(), v);
  return it == values.end() ? values.size() : static_cast<std::size_t>(it - values.begin());
}

}  // namespace

void ActionLadders::validate() const {
  require_unique_nonempty(fps, "fps");
  require_unique_nonempty(rgb_res, "rgb resolution");
  require_unique_nonempty(thermal_res, "thermal resolution");
  require_unique_nonempty(radar_prefs, "radar preference");
  for (int f : fps) {
    if (f < kMinFps || f > kSyncCapFps) {
      throw ConfigError(
          fmt::format("fps {} outside synchronization bounds [{}, {}]", f, kMinFps, kSyncCapFps));
    }
  }
  for (const auto& r : rgb_res) {
    if (!r.valid()) throw ConfigError("rgb resolution must be positive");
  }
  for (const auto& r : thermal_res) {
    if (!r.valid()) throw ConfigError("thermal resolution must be positive");
  }
}

std::size_t ActionLadders::action_count() const {
  const std::size_t f = fps.size();
  return f * rgb_res.size() * f * thermal_res.size() * f * radar_prefs.size();
}

std::string ActionLadders::canonical() const {
  std::string out = "fps:";
  for (std::size_t i = 0; i < fps.size(); ++i) out += (i ? "," : "") + std::to_string(fps[i]);
  out += ";rgb:";
  for (std::size_t i = 0; i < rgb_res.size(); ++i) out += (i ? "," : "") + to_string(rgb_res[i]);
  out += ";thermal:";
  for (std::size_t i = 0; i < thermal_res.size(); ++i) {
    out += (i ? "," : "") + to_string(thermal_res[i]);
  }
  out += ";radar:";
  for (std::size_t i = 0; i < radar_prefs.size(); ++i) {
    out += (i ? "," : "") + std::string(to_string(radar_prefs[i]));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ActionLadders::hash() const { return fnv1a64(canonical()); }

std::vector<SensorConfig> enumerate_actions(const ActionLadders& ladders) {
  ladders.validate();
  std::vector<SensorConfig> out;
  out.reserve(ladders.action_count());
  for (int rf : ladders.fps)
    for (const auto& rr : ladders.rgb_res)
      for (int tf : ladders.fps)
        for (const auto& tr : ladders.thermal_res)
          for (int mf : ladders.fps)
            for (auto mp : ladders.radar_prefs) out.push_back({rf, rr, tf, tr, mf, mp});
  return out;
}

std::size_t encode_action(const SensorConfig& a, const ActionLadders& l) {
  const std::array<std::pair<std::size_t, std::size_t>, 6> digits{{
      {position_of(l.fps, a.rgb_fps), l.fps.size()},
      {position_of(l.rgb_res, a.rgb_res), l.rgb_res.size()},
      {position_of(l.fps, a.thermal_fps), l.fps.size()},
      {position_of(l.thermal_res, a.thermal_res), l.thermal_res.size()},
      {position_of(l.fps, a.mmwave_fps), l.fps.size()},
      {position_of(l.radar_prefs, a.mmwave_pref), l.radar_prefs.size()},
  }};
  std::size_t index = 0;
  for (const auto& [digit, radix] : digits) {
    if (digit >= radix) {
      throw UnknownActionError(fmt::format("configuration [{}] is not in the action set", to_string(a)));
    }
    index = index * radix + digit;
  }
  return index;
}

SensorConfig decode_action(std::size_t index, const ActionLadders& l) {
  if (index >= l.action_count()) {
    throw UnknownActionError(
        fmt::format("action index {} outside [0, {})", index, l.action_count()));
  }
  SensorConfig a;
  auto take = [&index](std::size_t radix) {
    const std::size_t d = index % radix;
    index /= radix;
    return d;
  };
  a.mmwave_pref = l.radar_prefs[take(l.radar_prefs.size())];
  a.mmwave_fps = l.fps[take(l.fps.size())];
  a.thermal_res = l.thermal_res[take(l.thermal_res.size())];
  a.thermal_fps = l.fps[take(l.fps.size())];
  a.rgb_res = l.rgb_res[take(l.rgb_res.size())];
  a.rgb_fps = l.fps[take(l.fps.size())];
  return a;
}

ActionSpace::ActionSpace(ActionLadders ladders) : ladders_(std::move(ladders)) {
  ladders_.validate();
  size_ = ladders_.action_count();
  hash_ = ladders_.hash();
}

bool ActionSpace::contains(const SensorConfig& a) const {
  try {
    encode(a);
    return true;
  } catch (const UnknownActionError&) {
    return false;
  }
}

}  // namespace adaptsense
