#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codesign/dataset.hpp"
#include "codesign/economics.hpp"
#include "codesign/milp.hpp"
#include "codesign/policy_search.hpp"

namespace codesign {

enum class HorizonPreset { week, year };

struct ExperimentConfig {
  std::string data_path;    // empty -> synthetic from seed
  std::string params_path;  // empty -> built-in defaults
  uint64_t seed = 0;
  HorizonPreset horizon = HorizonPreset::week;
  Scenario scenario = Scenario::ctr;
  std::optional<DesignPoint> ctr_design;  // absent -> preset default
  long iterations = 0;                    // 0 -> preset default
  int eval_episodes = 1000;
  int week_start_day = 186;
  bool embedded_year = false;
  std::string out_dir = ".";
  LpLimits lp_limits;
  double ema_alpha = 0.01;
  long progress_every = 0;

  DesignPoint effective_ctr_design() const;
  long effective_iterations() const;
  TrainConfig train_config(const SystemParameters& p) const;
};

struct MethodResult {
  bool ok = false;
  bool exported_only = false;  // routed to LP-file export instead of solving
  std::string error;
  double t_hours = 0.0;
  double reward = 0.0;   // weekly-averaged for year-horizon solves
  double income = 0.0;
  double battery_kwh = 0.0;
  double pv_kwp = 0.0;
  double wall_seconds = 0.0;
  double adjusted_reward = 0.0;   // reward minus cyclic correction (policy column)
  double correction_cost = 0.0;   // policy column
  bool relaxation_exact = true;   // dispatch columns
  double max_overlap = 0.0;       // dispatch columns
};

struct BenchmarkReport {
  Scenario scenario = Scenario::ctr;
  HorizonPreset horizon = HorizonPreset::week;
  uint64_t seed = 0;
  MethodResult rl;
  MethodResult milp;
  MethodResult milp_on_rl;
  bool has_cross = false;
};

// Runs the configured cells (policy search, perfect-foresight dispatch, and
// the cross evaluation of the learned design), writing report.csv,
// curves.csv and companion files under config.out_dir. A failing cell is
// recorded in its column; the remaining cells still run.
BenchmarkReport run_benchmark(const ExperimentConfig& config);

// Per-iteration training curves: iteration,reward,income,pv_kwp,
// battery_kwh,reward_smoothed. The smoothed column is an EMA recomputed
// from the raw rewards with the given alpha; its first value equals the
// first raw value.
void emit_curves(const TrainStats& stats, const std::string& path, double ema_alpha = 0.01);

void write_report(const BenchmarkReport& report, const ExperimentConfig& config,
                  const std::string& path);

struct CliUsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliOptions {
  std::string command;  // simulate | solve-milp | train | evaluate | benchmark | export-lp
  ExperimentConfig experiment;
  std::string checkpoint;
  bool help_requested = false;
  std::string help_text;
};

// Parses an argv-style vector (argv[0] = program name). Throws
// CliUsageError on unknown flags, bad values or forbidden combinations;
// the caller maps that to exit code 2.
CliOptions parse_cli(const std::vector<std::string>& args);

}  // namespace codesign
