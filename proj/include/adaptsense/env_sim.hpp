// Scenario-driven simulator of the multispectral sensing platform.
//
// One tick composes: scene lookup -> modality contribution scores -> detection
// confidences -> compute/power/latency cost -> synchronization health.
#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "adaptsense/domain.hpp"
#include "adaptsense/rng.hpp"
#include "adaptsense/scenario.hpp"

namespace adaptsense {

struct ModalityCost {
  double idle_power_w = 0.0;
  double active_power_w_per_mpx_hz = 0.0;  // watts per megapixel per second
  double compute_per_mpx_hz = 0.0;         // load units per megapixel per second
};

struct CostModel {
  // Indexed by ModalityId.
  std::array<ModalityCost, kModalityCount> modality{{
      {0.9, 0.25, 1.0},  // rgb
      {0.6, 0.25, 1.0},  // thermal
      {1.1, 0.25, 1.0},  // mmwave
      {1.4, 0.25, 1.0},  // depth
  }};
  // Sized so the all-max configuration at 27 fps just saturates the GPU.
  double capacity = 30.0;
  double base_latency_s = 0.02;
  double latency_per_load_s = 0.08;
  // Radar frames are costed as an equivalent pixel count per frame.
  double mmwave_range_mpx = 0.1;
  double mmwave_velocity_factor = 1.25;
  // Depth is always on at a fixed configuration.
  Resolution depth_res{424, 240};
  int depth_fps = 6;

  void validate() const;
};

struct CostBreakdown {
  double power_w = 0.0;
  double latency_s = 0.0;
  double gpu_load = 0.0;  // min(1, raw_load)
  double raw_load = 0.0;
};

// Megapixels per second (pixel-equivalents for radar) streamed by a modality.
double modality_throughput_mpx(const SensorConfig& cfg, const CostModel& model, ModalityId m);
CostBreakdown compute_cost(const SensorConfig& cfg, const CostModel& model);

struct SyncModel {
  double load_knee = 0.7;
  double max_jitter_s = 0.04;
  double max_stale_ratio = 0.4;

  void validate() const;
};

struct SyncMetrics {
  double jitter_s = 0.0;
  double stale_ratio = 0.0;
};

// Zero below the knee, linear in (load - knee) above it, reaching the maxima
// exactly at full load.
SyncMetrics sync_metrics(double gpu_load, const SyncModel& model = {});

// Scene-driven utility of each modality before any configuration effect.
std::array<double, kModalityCount> raw_utilities(const SceneCondition& scene);

// Quality of the radar's configured preference for the scene's motion.
double radar_quality(const SceneCondition& scene, RadarPreference pref);

// Per-modality fidelity attributable to resolution (or radar preference),
// floored at 0.5. Depth is fixed at 1.
std::array<double, kModalityCount> resolution_fidelity(const SceneCondition& scene,
                                                       const SensorConfig& cfg);

ContributionVector normalize_utilities(const std::array<double, kModalityCount>& utilities);

// Raw utilities scaled by resolution fidelity, normalized to sum to one.
ContributionVector contribution_scores(const SceneCondition& scene, const SensorConfig& cfg);

// 1 / (1 + relative_speed * coeff / fps)
double staleness_factor(double relative_speed, int fps, double coeff);

struct DetectionModel {
  double staleness_coeff = 2.0;
  double noise_sigma = 0.03;
};

// Resolution * motion staleness * optical attenuation, per modality.
std::array<double, kModalityCount> modality_fidelity(const SceneCondition& scene,
                                                     const SensorConfig& cfg,
                                                     const DetectionModel& model = {});

// Empty when no target is present; otherwise the target plus up to two weaker
// fragment detections as occlusion splits it. Noise is drawn from `noise`
// when provided.
DetectionSet detection_confidences(const SceneCondition& scene, const SensorConfig& cfg,
                                   const ContributionVector& contrib,
                                   const DetectionModel& model = {}, Rng* noise = nullptr);

struct EnvParams {
  CostModel cost;
  SyncModel sync;
  DetectionModel detection;
  bool noise = false;
  double illumination_noise_sigma = 0.02;
  double radar_point_noise_sigma = 4.0;
  // Ticks between commanding a change and it taking effect, per modality
  // (rgb, thermal, mmwave).
  std::array<int, 3> reconfig_delay_ticks{0, 0, 0};

  void validate() const;
};

struct Observation {
  double time = 0.0;
  ContributionVector contributions;
  DetectionSet detections;
  double power_w = 0.0;
  double latency_s = 0.0;
  double gpu_load = 0.0;
  double timestamp_jitter_s = 0.0;
  double stale_frame_ratio = 0.0;
  int radar_point_count = 0;
  double platform_speed = 0.0;
  double target_speed = 0.0;
  double illumination_estimate = 0.0;
  SceneCondition scene;
  SensorConfig effective_config;
};

// One scenario run. Single-threaded; distinct instances are independent.
class Environment {
 public:
  explicit Environment(Scenario scenario, EnvParams params = {});

  // Advances the clock by one tick. Throws EpisodeFinished past the end.
  Observation step(const SensorConfig& commanded);

  bool finished() const { return tick_ >= tick_count_; }
  std::size_t tick() const { return tick_; }
  std::size_t tick_count() const { return tick_count_; }
  double time() const { return static_cast<double>(tick_) / scenario_.tick_rate_hz; }
  const Scenario& scenario() const { return scenario_; }
  const EnvParams& params() const { return params_; }
  const std::optional<SensorConfig>& effective_config() const { return effective_; }

 private:
  void actuate(const SensorConfig& commanded);

  Scenario scenario_;
  EnvParams params_;
  Rng rng_;
  std::size_t tick_ = 0;
  std::size_t tick_count_ = 0;
  std::optional<SensorConfig> effective_;
  SensorConfig pending_;
  std::array<int, 3> countdown_{0, 0, 0};
};

}  // namespace adaptsense
