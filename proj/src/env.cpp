#include "codesign/env.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace codesign {

double project_action(double soc, double b, double dt, double eta, double requested) {
  if (soc < 0.0 || soc > b)
    throw std::invalid_argument("project_action: soc outside [0, b]");
  if (!std::isfinite(requested))
    throw std::invalid_argument("project_action: non-finite request");
  if (requested >= 0.0) return std::min(requested, (b - soc) / dt);
  // A full drain of `soc` delivers soc*eta/dt of bus power, which is the
  // same effective limit the soc >= 0 constraint imposes on the scheduler.
  return std::max(requested, -soc * eta / dt);
}

double soc_update(double soc, double p_b, double eta, double dt) {
  const double next = p_b >= 0.0 ? soc + p_b * eta * dt : soc + (p_b / eta) * dt;
  return next;
}

std::pair<double, double> settle_grid(double p_prod, double p_load, double p_b,
                                      const SystemParameters& p) {
  if (!std::isfinite(p_prod) || !std::isfinite(p_load) || !std::isfinite(p_b))
    throw std::invalid_argument("settle_grid: non-finite input");
  const double net = p_load + p_b - p_prod;
  const double p_imp = net >= 0.0 ? net : 0.0;
  const double p_exp = net >= 0.0 ? 0.0 : -net;
  if (p_imp > p.p_grid_max || p_exp > p.p_grid_max)
    throw std::runtime_error("settle_grid: grid connection limit exceeded");
  return {p_imp, p_exp};
}

StepOutcome step(const MdpState& state, const Action& action, const DesignPoint& design,
                 const SystemParameters& p, const Dataset& ds, int t_horizon) {
  StepOutcome out;
  out.p_b_applied = project_action(state.soc, design.b, p.dt, p.eta_b, action.p_b_requested);
  double soc_next = soc_update(state.soc, out.p_b_applied, p.eta_b, p.dt);
  if (soc_next < -1e-9 || soc_next > design.b + 1e-9)
    throw std::logic_error("step: charge level escaped [0, b] after projection");
  soc_next = std::min(std::max(soc_next, 0.0), design.b);  // shed float dust
  auto [p_imp, p_exp] = settle_grid(state.p_prod_bar, state.p_load_bar, out.p_b_applied, p);
  out.p_imp = p_imp;
  out.p_exp = p_exp;

  out.next_state.h = (state.h + 1) % kHoursPerDay;
  out.next_state.d = out.next_state.h == 0 ? (state.d + 1) % kDaysPerYear : state.d;
  out.next_state.soc = soc_next;
  const int idx = out.next_state.d * kHoursPerDay + out.next_state.h;
  out.next_state.p_prod_bar = ds.pv_norm.values[idx] * design.p_nom;
  out.next_state.p_load_bar = ds.load.values[idx];

  const double fixed_per_step = fixed_cost_per_horizon(design, p, t_horizon) / t_horizon;
  out.reward = -fixed_per_step - grid_step_cost(out.p_imp, out.p_exp, p);
  return out;
}

MdpState reset(const EpisodeConfig& config, const DesignPoint& design, const Dataset& ds,
               Rng64& rng) {
  MdpState s;
  s.h = 0;
  switch (config.init_day_mode) {
    case InitDayMode::uniform_week: s.d = rng.uniform_int(0, 6); break;
    case InitDayMode::uniform_year: s.d = rng.uniform_int(0, kDaysPerYear - 1); break;
    case InitDayMode::fixed: s.d = config.fixed_day; break;
  }
  s.soc = config.init_soc_mode == InitSocMode::half_capacity ? design.b / 2.0
                                                             : rng.uniform(0.0, design.b);
  const int idx = s.d * kHoursPerDay + s.h;
  s.p_prod_bar = ds.pv_norm.values[idx] * design.p_nom;
  s.p_load_bar = ds.load.values[idx];
  return s;
}

Rollout rollout(const PolicyFn& policy, const DesignPoint& design, const EpisodeConfig& config,
                const Dataset& ds, const SystemParameters& p, Rng64& rng) {
  Rollout out;
  if (config.t_horizon <= 0) return out;
  MdpState s = reset(config, design, ds, rng);
  out.initial_soc = s.soc;
  out.trajectory.reserve(config.t_horizon);
  for (int t = 0; t < config.t_horizon; ++t) {
    const Action a{policy(s)};
    StepOutcome o = step(s, a, design, p, ds, config.t_horizon);
    out.episode_return += o.reward;
    out.episode_income += -grid_step_cost(o.p_imp, o.p_exp, p);
    s = o.next_state;
    out.trajectory.push_back(std::move(o));
  }
  out.final_soc = s.soc;
  return out;
}

double cyclic_correction_cost(double soc_final, double soc_initial, const SystemParameters& p) {
  if (soc_final < 0.0 || soc_initial < 0.0)
    throw std::invalid_argument("cyclic_correction_cost: negative charge level");
  const double deficit = soc_initial - soc_final;
  if (deficit > 0.0) return (deficit / p.eta_b) * p.c_imp;
  if (deficit < 0.0) return -(-deficit) * p.eta_b * p.c_exp;
  return 0.0;
}

void write_trajectory(const MdpState& initial, const std::vector<StepOutcome>& trajectory,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,h,d,soc,p_b,p_imp,p_exp,reward\n";
  char buf[256];
  MdpState s = initial;
  for (size_t t = 0; t < trajectory.size(); ++t) {
    const StepOutcome& o = trajectory[t];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", t, s.h, s.d, s.soc,
                  o.p_b_applied, o.p_imp, o.p_exp, o.reward);
    out << buf;
    s = o.next_state;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace codesign
