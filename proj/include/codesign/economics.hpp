#pragma once

#include <string>
#include <utility>
#include <vector>

namespace codesign {

constexpr double kHoursPerYear = 8760.0;

// Prices, cost coefficients, physical bounds and horizon constants of the
// PV-battery-grid system. Defaults are the reference parameter set used by
// every benchmark in this repository.
struct SystemParameters {
  double c_imp = 1.0;          // import price, EUR/kWh
  double c_exp = -0.05;        // export price, EUR/kWh (negative: exporting costs money)
  double p_grid_max = 10000.0; // grid connection limit, kW
  double p_nom_min = 0.0;      // PV nameplate bounds, kWp
  double p_nom_max = 200.0;
  double b_min = 0.0;          // battery capacity bounds, kWh
  double b_max = 200.0;
  double eta_b = 0.9;          // battery charge/discharge efficiency
  double l_pv = 20.0;          // component lifetimes, years
  double l_b = 30.0;
  double cx_pv_fix = 50.0;     // PV capex, EUR + EUR/kWp
  double cx_pv_var = 200.0;
  double ox_pv_fix = 3.0;      // PV annual opex, EUR + EUR/kWp
  double ox_pv_var = 10.0;
  double cx_b_fix = 30.0;      // battery capex, EUR + EUR/kWh
  double cx_b_var = 110.0;
  double ox_b_fix = 5.0;       // battery annual opex, EUR + EUR/kWh
  double ox_b_var = 6.0;
  double r = 0.05;             // annual discount rate
  double dt = 1.0;             // step length, hours

  // Throws std::invalid_argument when a physical invariant is violated.
  void validate() const;

  // Flat key=value config, keys named exactly as the fields above.
  // Missing keys keep their defaults; unknown keys are rejected.
  static SystemParameters from_config_file(const std::string& path);
};

// The two sizing decisions: PV nameplate power and battery capacity.
struct DesignPoint {
  double p_nom = 0.0;  // kWp
  double b = 0.0;      // kWh
};

struct CostBreakdown {
  double capex_amortized = 0.0;
  double opex_scaled = 0.0;
  double grid_cost = 0.0;
  double totex = 0.0;
  double income = 0.0;
};

// Annuity factor scaling an investment over lifetime `l` years to a horizon
// of `t` hours at discount rate `r`. r == 0 degenerates to straight-line 1/l.
double annuity_factor(double r, double l, double t);

// {capex, annual opex} for a PV plant of `p_nom` kWp.
std::pair<double, double> pv_costs(double p_nom, const SystemParameters& p);

// {capex, annual opex} for a battery of `b` kWh.
std::pair<double, double> battery_costs(double b, const SystemParameters& p);

// Cost of one step of grid exchange. Both powers must lie in [0, p_grid_max].
double grid_step_cost(double p_imp, double p_exp, const SystemParameters& p);

// Amortized capex plus horizon-scaled opex: the design-dependent, schedule-
// independent part of the total cost over `t` hours.
double fixed_cost_per_horizon(const DesignPoint& d, const SystemParameters& p, double t);

// Negated grid cost of an import/export schedule.
double income(const std::vector<double>& imports, const std::vector<double>& exports,
              const SystemParameters& p);

// Assembles the full cost decomposition of a dispatch over `t` hours.
CostBreakdown cost_breakdown(const DesignPoint& d, const std::vector<double>& imports,
                             const std::vector<double>& exports, const SystemParameters& p,
                             double t);

}  // namespace codesign
