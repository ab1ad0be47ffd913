#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace codesign {

constexpr int kHoursPerDay = 24;
constexpr int kDaysPerYear = 365;
constexpr int kProfileLength = kHoursPerDay * kDaysPerYear;  // 8760

// One year of hourly values: either a load in kW or a normalized PV
// production in kW per kWp installed.
struct HourlyProfile {
  std::vector<double> values;  // length 8760, all >= 0
  std::string label;
};

struct Dataset {
  HourlyProfile load;     // kW
  HourlyProfile pv_norm;  // kW/kWp
};

// A slice of aligned load and PV values served to the optimizers.
struct Window {
  std::vector<double> load;
  std::vector<double> pv_norm;
};

// Knobs of the synthetic office-building generator.
struct SynthConfig {
  double base_load_kw = 4.0;      // around-the-clock floor
  double weekday_peak_kw = 10.0;  // office-hours plateau on top of the floor
  double weekend_factor = 0.25;   // weekend office activity relative to weekdays
  double load_noise = 0.10;       // bounded multiplicative load noise
  double pv_amp_mean = 0.60;      // clear-sky peak, annual mean
  double pv_amp_swing = 0.30;     // seasonal swing of the clear-sky peak
  double cloud_depth = 0.40;      // worst-case daily cloud attenuation
  double pv_jitter = 0.15;        // hourly multiplicative PV noise
};

// Comma-separated text with header `hour,load_kw,pv_norm` and exactly 8760
// data rows. Errors carry the offending row number.
Dataset load_dataset(const std::string& path);

// Inverse of load_dataset; values formatted at 9 significant digits.
void write_dataset(const Dataset& ds, const std::string& path);

// Deterministic synthetic year: office-shaped diurnal load and a clear-sky
// half-sine PV curve with seasonal amplitude and cloud noise.
Dataset synthesize_dataset(uint64_t seed, const SynthConfig& config = {});

// `t` consecutive hourly values starting at hour start_day*24, wrapping
// modulo the profile length at year end.
Window slice_window(const Dataset& ds, int start_day, int t);

// A year-long dataset that replays the 168 hours starting at `start_day`
// over and over, so that any one-week episode within it visits the same
// 168 time steps regardless of its start day.
Dataset tile_week(const Dataset& ds, int start_day);

}  // namespace codesign
