// Sliding-window smoothing of raw observation factors and their binning into
// the six-factor discrete state.
#pragma once

#include <array>
#include <deque>

#include "adaptsense/domain.hpp"
#include "adaptsense/env_sim.hpp"

namespace adaptsense {

// Mean of the top min(3, N) confidences; 0 when there are no detections.
double conf_agg(const DetectionSet& d);

struct Cuts {
  double low = 0.0;
  double high = 1.0;
};

struct DiscretizerConfig {
  double window_seconds = 0.5;
  Cuts illumination{0.33, 0.66};
  Cuts motion{0.2, 1.0};          // m/s
  Cuts radar_density{20.0, 100.0};  // points
  Cuts system_load{0.4, 0.75};
  Cuts sync{0.02, 0.08};          // seconds of jitter-equivalent
  double tau_low = 0.3;
  double tau_high = 0.6;
  // Stale-frame ratio is folded into the sync score at this many seconds per unit.
  double stale_ratio_weight_s = 0.1;

  void validate() const;
};

// Smoothed values of the six state factors. `sync` is a badness score, so
// higher means worse synchronization.
struct RawFactors {
  double illumination = 0.0;
  double motion = 0.0;
  double radar_density = 0.0;
  double system_load = 0.0;
  double sync = 0.0;
  double confidence = 0.0;
};

RawFactors raw_factors(const Observation& obs, double stale_ratio_weight_s = 0.1);

// Time-ordered samples covering the last window_seconds.
class WindowBuffer {
 public:
  explicit WindowBuffer(double window_seconds = 0.5);

  // Evicts samples with time <= t - window (with a 1e-9 s tolerance), appends
  // the new one and returns the per-factor mean over the window. A sample
  // carrying the same timestamp as the newest entry replaces it. Throws
  // ClockError if t decreases.
  RawFactors push_and_smooth(const RawFactors& sample, double t);

  RawFactors mean() const;
  std::size_t size() const { return samples_.size(); }
  double window_seconds() const { return window_; }
  void clear() { samples_.clear(); }

 private:
  struct Entry {
    double time;
    RawFactors factors;
  };
  double window_;
  std::deque<Entry> samples_;
};

// 0 below low, 1 in [low, high), 2 at or above high.
std::uint8_t bin(double value, double low_cut, double high_cut);

DiscreteState discretize_state(const RawFactors& smoothed, const DiscretizerConfig& cfg);

}  // namespace adaptsense
