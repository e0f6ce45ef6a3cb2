// Core value types shared by every module: modalities, sensor configurations
// (which double as agent actions), discrete states and their dense indices.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adaptsense {

enum class ModalityId : std::uint8_t { kRgb = 0, kThermal = 1, kMmWave = 2, kDepth = 3 };

inline constexpr std::size_t kModalityCount = 4;
inline constexpr std::array<ModalityId, kModalityCount> kAllModalities{
    ModalityId::kRgb, ModalityId::kThermal, ModalityId::kMmWave, ModalityId::kDepth};

constexpr std::size_t index_of(ModalityId m) { return static_cast<std::size_t>(m); }
std::string_view to_string(ModalityId m);

struct Resolution {
  int width = 0;
  int height = 0;

  constexpr std::int64_t pixels() const {
    return static_cast<std::int64_t>(width) * static_cast<std::int64_t>(height);
  }
  constexpr bool valid() const { return width > 0 && height > 0; }
  friend constexpr auto operator<=>(const Resolution&, const Resolution&) = default;
};

std::string to_string(Resolution r);
// Accepts "WIDTHxHEIGHT".
Resolution parse_resolution(std::string_view text);

inline constexpr std::array<Resolution, 3> kRgbResolutions{
    Resolution{1280, 720}, Resolution{960, 540}, Resolution{640, 360}};
inline constexpr std::array<Resolution, 2> kThermalResolutions{
    Resolution{160, 120}, Resolution{320, 240}};

// Synchronization bounds. Every commanded rate lies in [kMinFps, kSyncCapFps];
// the on-device ladder tops out at kPlatformCapFps.
inline constexpr int kMinFps = 1;
inline constexpr int kSyncCapFps = 30;
inline constexpr int kPlatformCapFps = 27;
inline constexpr std::array<int, 4> kDefaultFpsLadder{1, 5, 15, 27};

enum class RadarPreference : std::uint8_t { kPreferRange = 0, kPreferVelocity = 1 };

std::string_view to_string(RadarPreference p);
RadarPreference parse_radar_preference(std::string_view text);

struct RadarParams {
  double range_resolution_m = 0.0;
  double max_unambiguous_range_m = 0.0;
  double max_radial_velocity_mps = 0.0;
  double radial_velocity_resolution_mps = 0.0;

  bool valid() const;
};

// A full joint sensor configuration. Depth is not part of it: the depth camera
// runs at a fixed configuration owned by the cost model.
struct SensorConfig {
  int rgb_fps = kPlatformCapFps;
  Resolution rgb_res = kRgbResolutions[0];
  int thermal_fps = kPlatformCapFps;
  Resolution thermal_res = kThermalResolutions[1];
  int mmwave_fps = kPlatformCapFps;
  RadarPreference mmwave_pref = RadarPreference::kPreferRange;

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;

  // Pixel throughput (pixels per second) of a camera modality.
  double pixel_budget(ModalityId m) const;
  bool fps_within_sync_bounds() const;
};

std::string to_string(const SensorConfig& c);

// Per-modality share of the task output, indexed by ModalityId. The RGB entry
// is the aggregate of the three colour channels.
struct ContributionVector {
  std::array<double, kModalityCount> share{};

  double operator[](ModalityId m) const { return share[index_of(m)]; }
  double sum() const;
};

// Detection confidences sorted in descending order.
class DetectionSet {
 public:
  DetectionSet() = default;
  // Sorts descending; every value must lie in [0, 1].
  explicit DetectionSet(std::vector<double> confidences);

  const std::vector<double>& confidences() const { return confidences_; }
  std::size_t count() const { return confidences_.size(); }
  bool empty() const { return confidences_.empty(); }

 private:
  std::vector<double> confidences_;
};

inline constexpr std::size_t kBinsPerFactor = 3;
inline constexpr std::size_t kStateFactorCount = 6;
inline constexpr std::size_t kStateCount = 729;  // 3^6

// Ordinal bins for illumination, motion, radar density, system load,
// synchronization health (0 = good, 2 = poor) and detection confidence.
struct DiscreteState {
  std::uint8_t illumination = 0;
  std::uint8_t motion = 0;
  std::uint8_t radar_density = 0;
  std::uint8_t system_load = 0;
  std::uint8_t sync_health = 0;
  std::uint8_t detection_conf = 0;

  std::array<std::uint8_t, kStateFactorCount> bins() const;
  bool valid() const;
  friend auto operator<=>(const DiscreteState&, const DiscreteState&) = default;
};

std::string to_string(const DiscreteState& s);

// Mixed-radix base-3 encoding with illumination as the most significant digit.
std::size_t encode_state(const DiscreteState& s);
DiscreteState decode_state(std::size_t index);

struct RewardWeights {
  double alpha = 1.0;   // quality gain
  double beta = 0.02;   // per watt
  double gamma = 0.5;   // per second of latency
  double delta = 0.05;  // switching penalty
  double kappa = 0.2;   // clip bound of the quality delta

  void validate() const;
};

// The discrete values each action knob may take. Actions are the Cartesian
// product, enumerated with rgb_fps varying slowest and mmwave_pref fastest.
struct ActionLadders {
  std::vector<int> fps{kDefaultFpsLadder.begin(), kDefaultFpsLadder.end()};
  std::vector<Resolution> rgb_res{kRgbResolutions.begin(), kRgbResolutions.end()};
  std::vector<Resolution> thermal_res{kThermalResolutions.begin(), kThermalResolutions.end()};
  std::vector<RadarPreference> radar_prefs{RadarPreference::kPreferRange,
                                           RadarPreference::kPreferVelocity};

  void validate() const;
  std::size_t action_count() const;
  std::string canonical() const;
  // FNV-1a over canonical(); stamps persisted Q-tables and traces.
  std::uint64_t hash() const;
};

std::vector<SensorConfig> enumerate_actions(const ActionLadders& ladders);
std::size_t encode_action(const SensorConfig& a, const ActionLadders& ladders);
SensorConfig decode_action(std::size_t index, const ActionLadders& ladders);

// Validated ladders plus O(1) index <-> configuration mapping.
class ActionSpace {
 public:
  explicit ActionSpace(ActionLadders ladders = {});

  std::size_t size() const { return size_; }
  SensorConfig decode(std::size_t index) const { return decode_action(index, ladders_); }
  std::size_t encode(const SensorConfig& a) const { return encode_action(a, ladders_); }
  bool contains(const SensorConfig& a) const;
  const ActionLadders& ladders() const { return ladders_; }
  std::uint64_t ladders_hash() const { return hash_; }

 private:
  ActionLadders ladders_;
  std::size_t size_ = 0;
  std::uint64_t hash_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace adaptsense
