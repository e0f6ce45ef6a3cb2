#include "adaptsense/radar_lut.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"

namespace adaptsense {

RadarParams derive_radar_params(const ChirpConfig& c, int num_range_bins) {
  if (!(c.bandwidth_hz > 0.0) || !(c.chirp_duration_s > 0.0) || !(c.carrier_wavelength_m > 0.0)) {
    throw DomainError("chirp bandwidth, duration and wavelength must be positive");
  }
  if (c.num_chirps_per_frame < 2) throw DomainError("a frame needs at least two chirps");
  if (num_range_bins < 1) throw DomainError("num_range_bins must be positive");

  RadarParams p;
  p.range_resolution_m = kSpeedOfLight / (2.0 * c.bandwidth_hz);
  p.max_unambiguous_range_m = p.range_resolution_m * num_range_bins;
  p.max_radial_velocity_mps = c.carrier_wavelength_m / (4.0 * c.chirp_duration_s);
  p.radial_velocity_resolution_mps =
      c.carrier_wavelength_m / (2.0 * c.num_chirps_per_frame * c.chirp_duration_s);
  return p;
}

namespace {

constexpr std::array<int, 7> kLutRates{1, 5, 10, 15, 20, 27, 30};

// Each mode has a fixed sweep (bandwidth, chirp duration) and a chirp-rate
// budget of the radar front end; the chirps per frame shrink as the frame rate
// rises. Range mode sweeps wide and slow, velocity mode narrow with a longer
// chirp train.
struct ModeProfile {
  double bandwidth_hz;
  double chirp_duration_s;
  int chirps_per_second;
  int max_chirps;
};

constexpr ModeProfile kRangeProfile{3.8e9, 80e-6, 480, 128};
constexpr ModeProfile kVelocityProfile{1.5e9, 50e-6, 1440, 255};

ChirpConfig chirp_from_profile(const ModeProfile& m, int fps) {
  ChirpConfig c;
  c.bandwidth_hz = m.bandwidth_hz;
  c.chirp_duration_s = m.chirp_duration_s;
  c.num_chirps_per_frame = std::clamp(m.chirps_per_second / fps, 2, m.max_chirps);
  c.carrier_wavelength_m = kRadarWavelength;
  return c;
}

const std::array<RadarLutEntry, 2 * kLutRates.size()>& table() {
  static const auto entries = [] {
    std::array<RadarLutEntry, 2 * kLutRates.size()> t{};
    std::size_t i = 0;
    for (auto pref : {RadarPreference::kPreferRange, RadarPreference::kPreferVelocity}) {
      const auto& profile = pref == RadarPreference::kPreferRange ? kRangeProfile : kVelocityProfile;
      for (int fps : kLutRates) t[i++] = {pref, fps, chirp_from_profile(profile, fps)};
    }
    return t;
  }();
  return entries;
}

}  // namespace

std::span<const int> radar_lut_rates() { return kLutRates; }

std::span<const RadarLutEntry> radar_lut() { return table(); }

const ChirpConfig& chirp_for(RadarPreference pref, int fps) {
  for (const auto& e : table()) {
    if (e.pref == pref && e.fps == fps) return e.chirp;
  }
  throw UnknownConfigurationError(
      fmt::format("no radar chirp profile for preference '{}' at {} fps", to_string(pref), fps));
}

RadarParams radar_params_for(RadarPreference pref, int fps) {
  return derive_radar_params(chirp_for(pref, fps));
}

std::string radar_lut_csv() {
  std::string out = "pref,fps,range_res_m,max_range_m,max_vel_mps,vel_res_mps\n";
  for (const auto& e : table()) {
    const auto p = derive_radar_params(e.chirp);
    out += fmt::format("{},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", to_string(e.pref), e.fps,
                       p.range_resolution_m, p.max_unambiguous_range_m, p.max_radial_velocity_mps,
                       p.radial_velocity_resolution_mps);
  }
  return out;
}

}  // namespace adaptsense
