#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "codesign/dataset.hpp"
#include "codesign/economics.hpp"
#include "codesign/rng.hpp"

namespace codesign {

// Full observable state of the dispatch process.
struct MdpState {
  int h = 0;                // hour of day, 0..23
  int d = 0;                // day of year, 0..364
  double soc = 0.0;         // stored energy, kWh
  double p_prod_bar = 0.0;  // expected PV power this hour, kW
  double p_load_bar = 0.0;  // expected load this hour, kW
};

// Requested battery power; positive charges, negative discharges. Requests
// outside the feasible range are projected, not rejected.
struct Action {
  double p_b_requested = 0.0;  // kW
};

struct StepOutcome {
  MdpState next_state;
  double reward = 0.0;       // EUR
  double p_b_applied = 0.0;  // kW after projection
  double p_imp = 0.0;        // kW
  double p_exp = 0.0;        // kW
};

enum class InitSocMode { uniform_random, half_capacity };
enum class InitDayMode { uniform_week, uniform_year, fixed };

struct EpisodeConfig {
  int t_horizon = 168;
  InitSocMode init_soc_mode = InitSocMode::uniform_random;
  InitDayMode init_day_mode = InitDayMode::uniform_year;
  int fixed_day = 0;  // used when init_day_mode == fixed
  uint64_t seed = 0;
};

// Clamps a battery power request to what the current charge level allows.
// Charging is capped by headroom (b - soc)/dt; discharging by the bus power
// a full drain can deliver, soc*eta/dt, so that the updated charge level
// stays in [0, b].
double project_action(double soc, double b, double dt, double eta, double requested);

// Charge update: charging stores p_b*eta*dt, discharging drains |p_b|/eta*dt.
// Input must already be projected; the result is asserted to lie in [0, b].
double soc_update(double soc, double p_b, double eta, double dt);

// Splits the net bus imbalance into grid import/export. Throws when the
// exchange would exceed p_grid_max.
std::pair<double, double> settle_grid(double p_prod, double p_load, double p_b,
                                      const SystemParameters& p);

// One transition of the dispatch process. `t_horizon` sets the per-step
// amortization of the design-dependent fixed cost inside the reward.
StepOutcome step(const MdpState& state, const Action& action, const DesignPoint& design,
                 const SystemParameters& p, const Dataset& ds, int t_horizon);

// Draws the initial state: hour 0, day per init_day_mode, charge level per
// init_soc_mode.
MdpState reset(const EpisodeConfig& config, const DesignPoint& design, const Dataset& ds,
               Rng64& rng);

using PolicyFn = std::function<double(const MdpState&)>;

struct Rollout {
  std::vector<StepOutcome> trajectory;
  double episode_return = 0.0;  // EUR
  double episode_income = 0.0;  // EUR
  double initial_soc = 0.0;
  double final_soc = 0.0;
};

// Runs `config.t_horizon` steps from a fresh reset.
Rollout rollout(const PolicyFn& policy, const DesignPoint& design, const EpisodeConfig& config,
                const Dataset& ds, const SystemParameters& p, Rng64& rng);

// Grid cost of restoring the initial charge level after an episode: buying
// the deficit back through charging losses, or discharging the surplus to
// the grid at the export price.
double cyclic_correction_cost(double soc_final, double soc_initial, const SystemParameters& p);

// Comma-separated dump, one row per step: t,h,d,soc,p_b,p_imp,p_exp,reward.
// soc is the stored energy at the start of the step.
void write_trajectory(const MdpState& initial, const std::vector<StepOutcome>& trajectory,
                      const std::string& path);

}  // namespace codesign
