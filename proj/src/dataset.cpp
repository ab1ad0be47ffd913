#include "codesign/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "codesign/rng.hpp"

namespace codesign {

namespace {

double parse_field(const std::string& text, int row) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("dataset row " + std::to_string(row) + ": malformed number '" +
                             text + "'");
  }
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "hour,load_kw,pv_norm")
    throw std::runtime_error("dataset header must be 'hour,load_kw,pv_norm', got '" + line + "'");

  Dataset ds;
  ds.load.label = "load_kw";
  ds.pv_norm.label = "pv_norm";
  ds.load.values.reserve(kProfileLength);
  ds.pv_norm.values.reserve(kProfileLength);

  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw std::runtime_error("dataset row " + std::to_string(row) + ": expected 3 fields");
    const double hour = parse_field(line.substr(0, c1), row);
    const double load = parse_field(line.substr(c1 + 1, c2 - c1 - 1), row);
    const double pv = parse_field(line.substr(c2 + 1), row);
    if (hour != static_cast<double>(row - 1))
      throw std::runtime_error("dataset row " + std::to_string(row) + ": hour index " +
                               std::to_string(static_cast<long>(hour)) + " not contiguous");
    if (load < 0.0)
      throw std::runtime_error("dataset row " + std::to_string(row) + ": negative load");
    if (pv < 0.0)
      throw std::runtime_error("dataset row " + std::to_string(row) + ": negative pv_norm");
    ds.load.values.push_back(load);
    ds.pv_norm.values.push_back(pv);
  }
  if (row != kProfileLength)
    throw std::runtime_error("dataset has " + std::to_string(row) + " rows, expected " +
                             std::to_string(kProfileLength));
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  if (ds.load.values.size() != static_cast<size_t>(kProfileLength) ||
      ds.pv_norm.values.size() != static_cast<size_t>(kProfileLength))
    throw std::invalid_argument("write_dataset: profiles must have length 8760");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "hour,load_kw,pv_norm\n";
  char buf[96];
  for (int h = 0; h < kProfileLength; ++h) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", h, ds.load.values[h], ds.pv_norm.values[h]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset synthesize_dataset(uint64_t seed, const SynthConfig& cfg) {
  Dataset ds;
  ds.load.label = "load_kw";
  ds.pv_norm.label = "pv_norm";
  ds.load.values.resize(kProfileLength);
  ds.pv_norm.values.resize(kProfileLength);

  Rng64 rng(Rng64::mix(seed, 0xda7a5e7dULL));
  const double two_pi = 6.283185307179586476925287;

  for (int d = 0; d < kDaysPerYear; ++d) {
    const int dow = d % 7;
    const bool weekday = dow < 5;
    // season = +1 at the summer solstice (day 172), -1 mid-winter
    const double season = std::cos(two_pi * (d - 172) / 365.0);
    const double daylen = 12.0 + 4.0 * season;
    const double sunrise = 12.0 - daylen / 2.0;
    const double amp = cfg.pv_amp_mean + cfg.pv_amp_swing * season;
    const double cloud = 1.0 - cfg.cloud_depth * rng.uniform01();

    for (int h = 0; h < kHoursPerDay; ++h) {
      const int idx = d * kHoursPerDay + h;

      const double x = h + 0.5;  // mid-hour sun position
      double pv = 0.0;
      if (x > sunrise && x < sunrise + daylen) {
        const double shape = std::sin(3.14159265358979323846 * (x - sunrise) / daylen);
        const double jitter = 1.0 - cfg.pv_jitter * rng.uniform01();
        pv = std::clamp(amp * shape * cloud * jitter, 0.0, 1.0);
      }
      ds.pv_norm.values[idx] = pv;

      double office = 0.0;
      if (h >= 6 && h < 9) office = (h - 6 + 1.0) / 3.0;
      else if (h >= 9 && h < 17) office = 1.0;
      else if (h >= 17 && h < 21) office = (21.0 - h) / 4.0;
      const double activity = weekday ? 1.0 : cfg.weekend_factor;
      const double noise = 1.0 + cfg.load_noise * (2.0 * rng.uniform01() - 1.0);
      const double load = (cfg.base_load_kw + cfg.weekday_peak_kw * office * activity) * noise;
      ds.load.values[idx] = std::max(load, 0.0);
    }
  }
  return ds;
}

Window slice_window(const Dataset& ds, int start_day, int t) {
  if (start_day < 0 || start_day >= kDaysPerYear)
    throw std::invalid_argument("slice_window: start_day outside [0, 364]");
  if (t < 1) throw std::invalid_argument("slice_window: t must be >= 1");
  Window w;
  w.load.resize(t);
  w.pv_norm.resize(t);
  const int start = start_day * kHoursPerDay;
  for (int i = 0; i < t; ++i) {
    const int idx = (start + i) % kProfileLength;
    w.load[i] = ds.load.values[idx];
    w.pv_norm[i] = ds.pv_norm.values[idx];
  }
  return w;
}

Dataset tile_week(const Dataset& ds, int start_day) {
  const Window week = slice_window(ds, start_day, 168);
  Dataset out;
  out.load.label = ds.load.label;
  out.pv_norm.label = ds.pv_norm.label;
  out.load.values.resize(kProfileLength);
  out.pv_norm.values.resize(kProfileLength);
  for (int i = 0; i < kProfileLength; ++i) {
    out.load.values[i] = week.load[i % 168];
    out.pv_norm.values[i] = week.pv_norm[i % 168];
  }
  return out;
}

}  // namespace codesign
