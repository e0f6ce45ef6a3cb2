// FMCW chirp physics behind the two mmWave preference modes.
//
// The radar cannot trade range and velocity resolution independently: range
// resolution is fixed by sweep bandwidth, maximum radial velocity by chirp
// duration, and velocity resolution by the total observation time of the
// chirp train, which must fit inside one frame period.
#pragma once

#include <span>
#include <string>

#include "adaptsense/domain.hpp"

namespace adaptsense {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kRadarCarrierHz = 60e9;
inline constexpr double kRadarWavelength = kSpeedOfLight / kRadarCarrierHz;
inline constexpr int kDefaultRangeBins = 256;

struct ChirpConfig {
  double bandwidth_hz = 0.0;
  double chirp_duration_s = 0.0;
  int num_chirps_per_frame = 0;
  double carrier_wavelength_m = kRadarWavelength;

  // Frame time actually spent chirping.
  double observation_time_s() const { return num_chirps_per_frame * chirp_duration_s; }
  bool fits_frame(int fps) const { return observation_time_s() <= 1.0 / fps; }
};

// range_res = c / 2B, v_max = lambda / 4Tc, v_res = lambda / (2 N Tc),
// r_max = range_res * num_range_bins.
RadarParams derive_radar_params(const ChirpConfig& c, int num_range_bins = kDefaultRangeBins);

struct RadarLutEntry {
  RadarPreference pref;
  int fps;
  ChirpConfig chirp;
};

// Frame rates covered by the built-in table.
std::span<const int> radar_lut_rates();
std::span<const RadarLutEntry> radar_lut();

// Throws UnknownConfigurationError when fps has no table entry.
const ChirpConfig& chirp_for(RadarPreference pref, int fps);
RadarParams radar_params_for(RadarPreference pref, int fps);

// Columns: pref,fps,range_res_m,max_range_m,max_vel_mps,vel_res_mps.
std::string radar_lut_csv();

}  // namespace adaptsense
