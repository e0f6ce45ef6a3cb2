#include "adaptsense/discretize.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"

namespace adaptsense {

double conf_agg(const DetectionSet& d) {
  if (d.empty()) return 0.0;
  const std::size_t k = std::min<std::size_t>(3, d.count());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += d.confidences()[i];
  return sum / static_cast<double>(k);
}

void DiscretizerConfig::validate() const {
  if (!(window_seconds >= 0.5 && window_seconds <= 1.0)) {
    throw ConfigError(fmt::format("window_seconds {} outside [0.5, 1.0]", window_seconds));
  }
  auto check = [](const Cuts& c, std::string_view name) {
    if (!(c.low < c.high)) throw ConfigError(fmt::format("{} cuts need low < high", name));
  };
  check(illumination, "illumination");
  check(motion, "motion");
  check(radar_density, "radar_density");
  check(system_load, "system_load");
  check(sync, "sync");
  if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0)) {
    throw ConfigError("confidence thresholds need 0 <= tau_low < tau_high <= 1");
  }
  if (stale_ratio_weight_s < 0.0) throw ConfigError("stale_ratio_weight_s must be >= 0");
}

RawFactors raw_factors(const Observation& obs, double stale_ratio_weight_s) {
  RawFactors f;
  f.illumination = obs.illumination_estimate;
  f.motion = std::max(obs.platform_speed, obs.target_speed);
  f.radar_density = obs.radar_point_count;
  f.system_load = obs.gpu_load;
  f.sync = obs.timestamp_jitter_s + stale_ratio_weight_s * obs.stale_frame_ratio;
  f.confidence = conf_agg(obs.detections);
  return f;
}

WindowBuffer::WindowBuffer(double window_seconds) : window_(window_seconds) {
  if (!(window_seconds > 0.0)) throw ConfigError("window must be positive");
}

RawFactors WindowBuffer::push_and_smooth(const RawFactors& sample, double t) {
  if (!samples_.empty()) {
    if (t < samples_.back().time) {
      throw ClockError(fmt::format("sample time {} precedes newest sample {}", t, samples_.back().time));
    }
    if (t == samples_.back().time) samples_.pop_back();
  }
  constexpr double kTolerance = 1e-9;
  while (!samples_.empty() && samples_.front().time <= t - window_ + kTolerance) {
    samples_.pop_front();
  }
  samples_.push_back({t, sample});
  return mean();
}

RawFactors WindowBuffer::mean() const {
  RawFactors m;
  if (samples_.empty()) return m;
  for (const auto& e : samples_) {
    m.illumination += e.factors.illumination;
    m.motion += e.factors.motion;
    m.radar_density += e.factors.radar_density;
    m.system_load += e.factors.system_load;
    m.sync += e.factors.sync;
    m.confidence += e.factors.confidence;
  }
  const double n = static_cast<double>(samples_.size());
  m.illumination /= n;
  m.motion /= n;
  m.radar_density /= n;
  m.system_load /= n;
  m.sync /= n;
  m.confidence /= n;
  return m;
}

std::uint8_t bin(double value, double low_cut, double high_cut) {
  if (value < low_cut) return 0;
  if (value < high_cut) return 1;
  return 2;
}

DiscreteState discretize_state(const RawFactors& f, const DiscretizerConfig& cfg) {
  DiscreteState s;
  s.illumination = bin(f.illumination, cfg.illumination.low, cfg.illumination.high);
  s.motion = bin(f.motion, cfg.motion.low, cfg.motion.high);
  s.radar_density = bin(f.radar_density, cfg.radar_density.low, cfg.radar_density.high);
  s.system_load = bin(f.system_load, cfg.system_load.low, cfg.system_load.high);
  s.sync_health = bin(f.sync, cfg.sync.low, cfg.sync.high);
  s.detection_conf = bin(f.confidence, cfg.tau_low, cfg.tau_high);
  return s;
}

}  // namespace adaptsense
