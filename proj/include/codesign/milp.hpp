#pragma once

#include <optional>
#include <string>
#include <vector>

#include "codesign/dataset.hpp"
#include "codesign/economics.hpp"
#include "codesign/lp.hpp"

namespace codesign {

enum class Scenario { ctr, ctr_des };

struct FormulationOptions {
  Scenario scenario = Scenario::ctr;
  int t_horizon = 168;
  bool enforce_exclusivity = false;  // one binary per step forbids charge*discharge overlap
  bool enforce_cyclic_soc = true;    // soc_T = soc_0
  std::optional<DesignPoint> fixed_design;  // required for ctr, forbidden for ctr_des
};

// Column layout of the built program, exposed so that callers and tests can
// address variables without string lookups.
struct VariableLayout {
  int t_horizon = 0;
  bool has_design = false;
  int charge(int t) const { return 5 * t; }
  int discharge(int t) const { return 5 * t + 1; }
  int battery_power(int t) const { return 5 * t + 2; }
  int import_power(int t) const { return 5 * t + 3; }
  int export_power(int t) const { return 5 * t + 4; }
  int soc(int t) const { return 5 * t_horizon + t; }  // t in 0..t_horizon
  int pv_size() const { return 6 * t_horizon + 1; }
  int battery_size() const { return 6 * t_horizon + 2; }
  int n_continuous() const { return 6 * t_horizon + 1 + (has_design ? 2 : 0); }
};

struct BuildResult {
  LinearProgram lp;
  BinaryMarking binaries;
  VariableLayout layout;
};

// Perfect-foresight dispatch (and, for ctr_des, sizing) extracted from an
// optimal program solution.
struct DispatchSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  DesignPoint design;
  std::vector<double> soc;        // length T+1
  std::vector<double> charge;     // kW, length T
  std::vector<double> discharge;  // kW
  std::vector<double> p_imp;      // kW
  std::vector<double> p_exp;      // kW
  CostBreakdown costs;
  double avg_weekly_reward = 0.0;  // -totex scaled to a 168 h horizon
  long iterations = 0;
  // Largest simultaneous charge/discharge and import/export overlaps; both
  // near zero when the relaxation without binaries is physically exact.
  double max_charge_overlap = 0.0;
  double max_grid_overlap = 0.0;
  bool relaxation_exact = true;
};

// Translates a load/PV window into a linear program with the charge and
// discharge split per step, optional exclusivity binaries (big-M = B/dt)
// and optional cyclic state-of-charge coupling.
BuildResult build(const Window& window, const SystemParameters& p,
                  const FormulationOptions& options);

// Builds, solves (LP, or branch and bound when binaries are requested),
// verifies the physical constraints on the extracted schedule, and prices
// it through the shared cost model.
DispatchSolution solve_and_extract(const Window& window, const SystemParameters& p,
                                   const FormulationOptions& options, const LpLimits& limits = {});

// Control-only solve with the design pinned to an externally chosen point.
DispatchSolution cross_evaluate_design(const Window& window, const SystemParameters& p,
                                       const DesignPoint& design, int t_horizon,
                                       const LpLimits& limits = {});

// Comma-separated dump: one row per step plus a trailing soc row.
void write_dispatch(const DispatchSolution& sol, const std::string& path);

}  // namespace codesign
