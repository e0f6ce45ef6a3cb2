#include "adaptsense/env_sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"
#include "adaptsense/radar_lut.hpp"

namespace adaptsense {

void CostModel::validate() const {
  for (const auto& m : modality) {
    if (m.idle_power_w < 0.0 || m.active_power_w_per_mpx_hz < 0.0 || m.compute_per_mpx_hz < 0.0) {
      throw ConfigError("cost model coefficients must be nonnegative");
    }
  }
  if (!(capacity > 0.0)) throw ConfigError("cost model capacity must be positive");
  if (base_latency_s < 0.0 || latency_per_load_s < 0.0) {
    throw ConfigError("cost model latency coefficients must be nonnegative");
  }
  if (mmwave_range_mpx < 0.0 || mmwave_velocity_factor < 0.0) {
    throw ConfigError("mmwave pixel-equivalent constants must be nonnegative");
  }
  if (!depth_res.valid() || depth_fps < kMinFps || depth_fps > kSyncCapFps) {
    throw ConfigError("depth stream configuration is invalid");
  }
}

double modality_throughput_mpx(const SensorConfig& cfg, const CostModel& model, ModalityId m) {
  constexpr double kMega = 1e-6;
  switch (m) {
    case ModalityId::kRgb: return cfg.pixel_budget(m) * kMega;
    case ModalityId::kThermal: return cfg.pixel_budget(m) * kMega;
    case ModalityId::kMmWave: {
      const double per_frame = cfg.mmwave_pref == RadarPreference::kPreferVelocity
                                   ? model.mmwave_range_mpx * model.mmwave_velocity_factor
                                   : model.mmwave_range_mpx;
      return per_frame * cfg.mmwave_fps;
    }
    case ModalityId::kDepth:
      return static_cast<double>(model.depth_res.pixels()) * model.depth_fps * kMega;
  }
  return 0.0;
}

CostBreakdown compute_cost(const SensorConfig& cfg, const CostModel& model) {
  double load_units = 0.0;
  double power = 0.0;
  for (ModalityId m : kAllModalities) {
    const auto& c = model.modality[index_of(m)];
    const double mpx = modality_throughput_mpx(cfg, model, m);
    load_units += mpx * c.compute_per_mpx_hz;
    power += c.idle_power_w + mpx * c.active_power_w_per_mpx_hz;
  }
  CostBreakdown out;
  out.raw_load = load_units / model.capacity;
  out.gpu_load = std::min(1.0, out.raw_load);
  out.power_w = power;
  out.latency_s = model.base_latency_s + model.latency_per_load_s * out.raw_load;
  return out;
}

void SyncModel::validate() const {
  if (!(load_knee >= 0.0 && load_knee < 1.0)) throw ConfigError("sync load_knee must lie in [0, 1)");
  if (max_jitter_s < 0.0 || !(max_stale_ratio >= 0.0 && max_stale_ratio <= 1.0)) {
    throw ConfigError("sync maxima must be nonnegative and stale ratio at most 1");
  }
}

SyncMetrics sync_metrics(double gpu_load, const SyncModel& model) {
  const double load = std::clamp(gpu_load, 0.0, 1.0);
  if (load <= model.load_knee) return {};
  const double frac = (load - model.load_knee) / (1.0 - model.load_knee);
  return {model.max_jitter_s * frac, model.max_stale_ratio * frac};
}

namespace {

// Surrogate contribution model, calibrated once against measured attribution
// shares (clear day: RGB 70-80 %, thermal 19-27 %, radar negligible; night:
// thermal ~0.958) and then frozen.
constexpr double kRgbFogLoss = 0.6;
constexpr double kThermalFogLoss = 0.3;
constexpr double kThermalOcclusionLoss = 0.5;
constexpr double kThermalBase = 0.2;
constexpr double kThermalDarkGain = 0.95;
constexpr double kRadarBase = 0.02;
constexpr double kRadarFogGain = 0.3;
constexpr double kRadarMotionGain = 0.2;
constexpr double kDepthUtility = 0.005;

constexpr double kResolutionFloor = 0.5;

// Optical attenuation inside the detector.
constexpr double kRgbDarkFloor = 0.2;
constexpr double kRgbOcclusionAtten = 0.8;
constexpr double kRgbFogAtten = 0.5;
constexpr double kThermalOcclusionAtten = 0.5;
constexpr double kThermalFogAtten = 0.2;

// Occlusion splits the target into weaker fragment detections.
constexpr double kFragmentDecay = 0.5;

double pixel_fraction(Resolution r, Resolution max_res) {
  return std::max(kResolutionFloor,
                  static_cast<double>(r.pixels()) / static_cast<double>(max_res.pixels()));
}

struct RadarQualityPair {
  double range;
  double velocity;
};

// Range and velocity quality of a preference relative to the best mode,
// evaluated on the table at the platform frame-rate cap.
RadarQualityPair preference_quality(RadarPreference pref) {
  static const auto table = [] {
    const auto r = radar_params_for(RadarPreference::kPreferRange, kPlatformCapFps);
    const auto v = radar_params_for(RadarPreference::kPreferVelocity, kPlatformCapFps);
    const double best_range = std::min(r.range_resolution_m, v.range_resolution_m);
    const double best_vel =
        std::min(r.radial_velocity_resolution_mps, v.radial_velocity_resolution_mps);
    return std::array<RadarQualityPair, 2>{{
        {best_range / r.range_resolution_m, best_vel / r.radial_velocity_resolution_mps},
        {best_range / v.range_resolution_m, best_vel / v.radial_velocity_resolution_mps},
    }};
  }();
  return table[static_cast<std::size_t>(pref)];
}

}  // namespace

std::array<double, kModalityCount> raw_utilities(const SceneCondition& raw) {
  const auto s = raw.clamped();
  std::array<double, kModalityCount> u{};
  u[index_of(ModalityId::kRgb)] =
      s.illumination * (1.0 - s.occlusion) * (1.0 - kRgbFogLoss * s.fog_density);
  u[index_of(ModalityId::kThermal)] = (1.0 - kThermalFogLoss * s.fog_density) *
                                      (1.0 - kThermalOcclusionLoss * s.occlusion) *
                                      (kThermalBase + kThermalDarkGain * (1.0 - s.illumination));
  u[index_of(ModalityId::kMmWave)] =
      s.radar_reflectivity * (kRadarBase + kRadarFogGain * s.fog_density +
                              kRadarMotionGain * std::min(s.target_speed, 1.0));
  u[index_of(ModalityId::kDepth)] = kDepthUtility;
  return u;
}

double radar_quality(const SceneCondition& scene, RadarPreference pref) {
  const auto q = preference_quality(pref);
  const double w = std::min(1.0, std::max(0.0, scene.target_speed));
  return std::max(kResolutionFloor, (1.0 - w) * q.range + w * q.velocity);
}

std::array<double, kModalityCount> resolution_fidelity(const SceneCondition& scene,
                                                       const SensorConfig& cfg) {
  std::array<double, kModalityCount> g{};
  g[index_of(ModalityId::kRgb)] = pixel_fraction(cfg.rgb_res, kRgbResolutions[0]);
  g[index_of(ModalityId::kThermal)] = pixel_fraction(cfg.thermal_res, kThermalResolutions[1]);
  g[index_of(ModalityId::kMmWave)] = radar_quality(scene, cfg.mmwave_pref);
  g[index_of(ModalityId::kDepth)] = 1.0;
  return g;
}

ContributionVector normalize_utilities(const std::array<double, kModalityCount>& utilities) {
  double total = 0.0;
  for (double u : utilities) {
    if (u < 0.0 || !std::isfinite(u)) throw DomainError("modality utilities must be finite and >= 0");
    total += u;
  }
  ContributionVector c;
  if (total <= 0.0) {
    c.share.fill(1.0 / kModalityCount);
    return c;
  }
  for (std::size_t i = 0; i < kModalityCount; ++i) c.share[i] = utilities[i] / total;
  return c;
}

ContributionVector contribution_scores(const SceneCondition& scene, const SensorConfig& cfg) {
  auto u = raw_utilities(scene);
  const auto g = resolution_fidelity(scene, cfg);
  for (std::size_t i = 0; i < kModalityCount; ++i) u[i] *= g[i];
  return normalize_utilities(u);
}

double staleness_factor(double relative_speed, int fps, double coeff) {
  if (fps <= 0) throw DomainError("fps must be positive");
  return 1.0 / (1.0 + std::max(0.0, relative_speed) * coeff / fps);
}

std::array<double, kModalityCount> modality_fidelity(const SceneCondition& raw,
                                                     const SensorConfig& cfg,
                                                     const DetectionModel& model) {
  const auto s = raw.clamped();
  const double relative_speed = s.target_speed + s.platform_speed;
  auto f = resolution_fidelity(s, cfg);

  auto& rgb = f[index_of(ModalityId::kRgb)];
  rgb *= staleness_factor(relative_speed, cfg.rgb_fps, model.staleness_coeff);
  rgb *= (kRgbDarkFloor + (1.0 - kRgbDarkFloor) * s.illumination) *
         (1.0 - kRgbOcclusionAtten * s.occlusion) * (1.0 - kRgbFogAtten * s.fog_density);

  auto& thermal = f[index_of(ModalityId::kThermal)];
  thermal *= staleness_factor(relative_speed, cfg.thermal_fps, model.staleness_coeff);
  thermal *= (1.0 - kThermalOcclusionAtten * s.occlusion) * (1.0 - kThermalFogAtten * s.fog_density);

  f[index_of(ModalityId::kMmWave)] *=
      staleness_factor(relative_speed, cfg.mmwave_fps, model.staleness_coeff);
  return f;
}

DetectionSet detection_confidences(const SceneCondition& raw, const SensorConfig& cfg,
                                   const ContributionVector& contrib, const DetectionModel& model,
                                   Rng* noise) {
  const auto s = raw.clamped();
  if (!s.target_present) return {};

  const auto f = modality_fidelity(s, cfg, model);
  double top = 0.0;
  for (std::size_t i = 0; i < kModalityCount; ++i) top += contrib.share[i] * f[i];
  if (noise) top += noise->normal(0.0, model.noise_sigma);
  top = std::clamp(top, 0.0, 1.0);

  std::vector<double> confs{top};
  const int fragments = (s.occlusion >= 1.0 / 3.0 ? 1 : 0) + (s.occlusion >= 2.0 / 3.0 ? 1 : 0);
  double c = top;
  for (int k = 0; k < fragments; ++k) {
    c *= kFragmentDecay;
    confs.push_back(c);
  }
  return DetectionSet(std::move(confs));
}

void EnvParams::validate() const {
  cost.validate();
  sync.validate();
  if (detection.staleness_coeff < 0.0 || detection.noise_sigma < 0.0) {
    throw ConfigError("detection model coefficients must be nonnegative");
  }
  if (illumination_noise_sigma < 0.0 || radar_point_noise_sigma < 0.0) {
    throw ConfigError("noise sigmas must be nonnegative");
  }
  for (int d : reconfig_delay_ticks) {
    if (d < 0) throw ConfigError("reconfiguration delay must be >= 0 ticks");
  }
}

Environment::Environment(Scenario scenario, EnvParams params)
    : scenario_(std::move(scenario)), params_(std::move(params)), rng_(scenario_.seed) {
  scenario_.validate();
  params_.validate();
  tick_count_ = scenario_.tick_count();
}

void Environment::actuate(const SensorConfig& commanded) {
  if (!effective_) {
    effective_ = commanded;
    pending_ = commanded;
    return;
  }
  SensorConfig& eff = *effective_;
  auto advance = [this](std::size_t slot, bool changed) {
    if (changed) countdown_[slot] = params_.reconfig_delay_ticks[slot];
    if (countdown_[slot] == 0) return true;
    --countdown_[slot];
    return false;
  };

  const bool rgb_changed = commanded.rgb_fps != pending_.rgb_fps || commanded.rgb_res != pending_.rgb_res;
  const bool thermal_changed =
      commanded.thermal_fps != pending_.thermal_fps || commanded.thermal_res != pending_.thermal_res;
  const bool radar_changed =
      commanded.mmwave_fps != pending_.mmwave_fps || commanded.mmwave_pref != pending_.mmwave_pref;
  pending_ = commanded;

  if (advance(0, rgb_changed)) {
    eff.rgb_fps = pending_.rgb_fps;
    eff.rgb_res = pending_.rgb_res;
  }
  if (advance(1, thermal_changed)) {
    eff.thermal_fps = pending_.thermal_fps;
    eff.thermal_res = pending_.thermal_res;
  }
  if (advance(2, radar_changed)) {
    eff.mmwave_fps = pending_.mmwave_fps;
    eff.mmwave_pref = pending_.mmwave_pref;
  }
}

Observation Environment::step(const SensorConfig& commanded) {
  if (finished()) {
    throw EpisodeFinished(fmt::format("scenario '{}' finished after {} ticks", scenario_.name, tick_count_));
  }
  if (!commanded.fps_within_sync_bounds()) {
    throw ConfigError(fmt::format("commanded configuration [{}] violates fps bounds", to_string(commanded)));
  }
  actuate(commanded);

  Observation obs;
  obs.time = time();
  obs.scene = scene_at(scenario_, obs.time);
  obs.effective_config = *effective_;
  const auto& cfg = obs.effective_config;
  Rng* noise = params_.noise ? &rng_ : nullptr;

  obs.contributions = contribution_scores(obs.scene, cfg);
  obs.detections = detection_confidences(obs.scene, cfg, obs.contributions, params_.detection, noise);

  const auto cost = compute_cost(cfg, params_.cost);
  obs.power_w = cost.power_w;
  obs.latency_s = cost.latency_s;
  obs.gpu_load = cost.gpu_load;

  const auto sync = sync_metrics(cost.gpu_load, params_.sync);
  obs.timestamp_jitter_s = sync.jitter_s;
  obs.stale_frame_ratio = sync.stale_ratio;

  double points = 8.0 + 150.0 * obs.scene.radar_reflectivity * (obs.scene.target_present ? 1.0 : 0.2);
  double illum = obs.scene.illumination;
  if (noise) {
    points += noise->normal(0.0, params_.radar_point_noise_sigma);
    illum = std::clamp(illum + noise->normal(0.0, params_.illumination_noise_sigma), 0.0, 1.0);
  }
  obs.radar_point_count = static_cast<int>(std::lround(std::max(0.0, points)));
  obs.illumination_estimate = illum;
  obs.platform_speed = obs.scene.platform_speed;
  obs.target_speed = obs.scene.target_speed;

  ++tick_;
  return obs;
}

}  // namespace adaptsense
