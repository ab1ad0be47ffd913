#include "codesign/milp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace codesign {

namespace {

void check_options(const Window& window, const SystemParameters& p,
                   const FormulationOptions& options) {
  p.validate();
  if (options.t_horizon < 1) throw std::invalid_argument("t_horizon must be >= 1");
  if (static_cast<int>(window.load.size()) != options.t_horizon ||
      static_cast<int>(window.pv_norm.size()) != options.t_horizon)
    throw std::invalid_argument("window length does not match t_horizon");
  if (options.scenario == Scenario::ctr) {
    if (!options.fixed_design) throw std::invalid_argument("ctr scenario requires a fixed design");
    const DesignPoint& d = *options.fixed_design;
    if (d.p_nom < p.p_nom_min - 1e-9 || d.p_nom > p.p_nom_max + 1e-9 || d.b < p.b_min - 1e-9 ||
        d.b > p.b_max + 1e-9)
      throw std::invalid_argument("fixed design outside the allowed ranges");
  } else if (options.fixed_design) {
    throw std::invalid_argument("ctr_des scenario forbids a fixed design");
  }
}

}  // namespace

BuildResult build(const Window& window, const SystemParameters& p,
                  const FormulationOptions& options) {
  check_options(window, p, options);
  const int T = options.t_horizon;
  const bool sizing = options.scenario == Scenario::ctr_des;
  const double b_cap_max = sizing ? p.b_max : options.fixed_design->b;
  const double rate_cap = b_cap_max / p.dt;  // loosest sensible power bound

  BuildResult out;
  out.layout.t_horizon = T;
  out.layout.has_design = sizing;
  LinearProgram& lp = out.lp;
  lp.sense = Sense::minimize;

  const double r_pv = annuity_factor(p.r, p.l_pv, T);
  const double r_b = annuity_factor(p.r, p.l_b, T);
  const double opex_scale = T / kHoursPerYear;

  for (int t = 0; t < T; ++t) {
    const std::string s = std::to_string(t);
    lp.add_variable("c_" + s, 0.0, rate_cap);
    lp.add_variable("d_" + s, 0.0, rate_cap);
    lp.add_variable("pb_" + s, -rate_cap, rate_cap);
    lp.add_variable("imp_" + s, 0.0, p.p_grid_max, p.c_imp * p.dt);
    lp.add_variable("exp_" + s, 0.0, p.p_grid_max, -p.c_exp * p.dt);
  }
  for (int t = 0; t <= T; ++t)
    lp.add_variable("soc_" + std::to_string(t), 0.0, b_cap_max);
  if (sizing) {
    lp.add_variable("p_nom", p.p_nom_min, p.p_nom_max,
                    p.cx_pv_var * r_pv + p.ox_pv_var * opex_scale);
    lp.add_variable("b_cap", p.b_min, p.b_max, p.cx_b_var * r_b + p.ox_b_var * opex_scale);
  }

  const VariableLayout& L = out.layout;

  // Design-independent share of capex and opex enters as a constant.
  if (sizing) {
    lp.objective_offset = p.cx_pv_fix * r_pv + p.cx_b_fix * r_b +
                          (p.ox_pv_fix + p.ox_b_fix) * opex_scale;
  } else {
    lp.objective_offset = fixed_cost_per_horizon(*options.fixed_design, p, T);
  }

  for (int t = 0; t < T; ++t) {
    const std::string s = std::to_string(t);
    lp.add_constraint({{L.battery_power(t), 1.0}, {L.charge(t), -1.0}, {L.discharge(t), 1.0}},
                      Relation::equal, 0.0, "link_" + s);
    lp.add_constraint({{L.soc(t + 1), 1.0},
                       {L.soc(t), -1.0},
                       {L.charge(t), -p.eta_b * p.dt},
                       {L.discharge(t), p.dt / p.eta_b}},
                      Relation::equal, 0.0, "soc_rec_" + s);
    if (sizing) {
      lp.add_constraint({{L.charge(t), p.dt}, {L.soc(t), 1.0}, {L.battery_size(), -1.0}},
                        Relation::less_equal, 0.0, "chg_cap_" + s);
    } else {
      lp.add_constraint({{L.charge(t), p.dt}, {L.soc(t), 1.0}}, Relation::less_equal,
                        options.fixed_design->b, "chg_cap_" + s);
    }
    lp.add_constraint({{L.discharge(t), p.dt}, {L.soc(t), -1.0}}, Relation::less_equal, 0.0,
                      "dis_cap_" + s);
    if (sizing) {
      lp.add_constraint({{L.pv_size(), window.pv_norm[t]},
                         {L.import_power(t), 1.0},
                         {L.battery_power(t), -1.0},
                         {L.export_power(t), -1.0}},
                        Relation::equal, window.load[t], "balance_" + s);
    } else {
      lp.add_constraint(
          {{L.import_power(t), 1.0}, {L.battery_power(t), -1.0}, {L.export_power(t), -1.0}},
          Relation::equal, window.load[t] - options.fixed_design->p_nom * window.pv_norm[t],
          "balance_" + s);
    }
  }

  if (sizing) {
    lp.add_constraint({{L.soc(0), 1.0}, {L.battery_size(), -0.5}}, Relation::equal, 0.0,
                      "soc_init");
    for (int t = 0; t <= T; ++t)
      lp.add_constraint({{L.soc(t), 1.0}, {L.battery_size(), -1.0}}, Relation::less_equal, 0.0,
                        "soc_cap_" + std::to_string(t));
  } else {
    lp.add_constraint({{L.soc(0), 1.0}}, Relation::equal, options.fixed_design->b / 2.0,
                      "soc_init");
  }
  if (options.enforce_cyclic_soc)
    lp.add_constraint({{L.soc(T), 1.0}, {L.soc(0), -1.0}}, Relation::equal, 0.0, "soc_cyclic");

  if (options.enforce_exclusivity) {
    const double big_m = rate_cap;
    for (int t = 0; t < T; ++t) {
      const std::string s = std::to_string(t);
      const int u = lp.add_variable("u_" + s, 0.0, 1.0);
      out.binaries.indices.push_back(u);
      lp.add_constraint({{L.charge(t), 1.0}, {u, -big_m}}, Relation::less_equal, 0.0,
                        "excl_c_" + s);
      lp.add_constraint({{L.discharge(t), 1.0}, {u, big_m}}, Relation::less_equal, big_m,
                        "excl_d_" + s);
    }
  }

  lp.validate();
  return out;
}

DispatchSolution solve_and_extract(const Window& window, const SystemParameters& p,
                                   const FormulationOptions& options, const LpLimits& limits) {
  BuildResult built = build(window, p, options);
  const LpSolution sol = built.binaries.indices.empty()
                             ? solve_lp(built.lp, limits)
                             : solve_mip(built.lp, built.binaries, limits);
  if (sol.status != SolveStatus::optimal) {
    const char* tag = options.scenario == Scenario::ctr ? "ctr" : "ctr_des";
    throw std::runtime_error(std::string("dispatch solve failed (") + tag +
                             "): " + to_string(sol.status));
  }

  const int T = options.t_horizon;
  const VariableLayout& L = built.layout;
  DispatchSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.design = L.has_design ? DesignPoint{sol.x[L.pv_size()], sol.x[L.battery_size()]}
                            : *options.fixed_design;
  out.soc.resize(T + 1);
  for (int t = 0; t <= T; ++t) out.soc[t] = sol.x[L.soc(t)];
  out.charge.resize(T);
  out.discharge.resize(T);
  out.p_imp.resize(T);
  out.p_exp.resize(T);
  for (int t = 0; t < T; ++t) {
    out.charge[t] = sol.x[L.charge(t)];
    out.discharge[t] = sol.x[L.discharge(t)];
    out.p_imp[t] = sol.x[L.import_power(t)];
    out.p_exp[t] = sol.x[L.export_power(t)];
  }

  // Re-verify the physical model on the extracted schedule, independently
  // of the algebra that produced the rows.
  const double tol = 1e-6;
  const DesignPoint& D = out.design;
  if (std::abs(out.soc[0] - D.b / 2.0) > tol)
    throw std::logic_error("extracted schedule violates the initial soc rule");
  if (options.enforce_cyclic_soc && std::abs(out.soc[T] - out.soc[0]) > tol)
    throw std::logic_error("extracted schedule violates the cyclic soc rule");
  for (int t = 0; t < T; ++t) {
    const double pb = sol.x[L.battery_power(t)];
    if (std::abs(pb - (out.charge[t] - out.discharge[t])) > tol)
      throw std::logic_error("extracted schedule violates the power split");
    const double soc_next = out.soc[t] + (p.eta_b * out.charge[t] - out.discharge[t] / p.eta_b) * p.dt;
    if (std::abs(out.soc[t + 1] - soc_next) > tol)
      throw std::logic_error("extracted schedule violates the soc recursion");
    if (out.charge[t] * p.dt > D.b - out.soc[t] + tol)
      throw std::logic_error("extracted schedule violates the charge headroom");
    if (out.discharge[t] * p.dt > out.soc[t] + tol)
      throw std::logic_error("extracted schedule violates the discharge stock");
    if (out.soc[t] < -tol || out.soc[t] > D.b + tol)
      throw std::logic_error("extracted schedule violates the soc range");
    const double balance =
        D.p_nom * window.pv_norm[t] + out.p_imp[t] - window.load[t] - pb - out.p_exp[t];
    if (std::abs(balance) > tol) throw std::logic_error("extracted schedule violates the bus balance");
    out.max_charge_overlap = std::max(out.max_charge_overlap,
                                      std::min(out.charge[t], out.discharge[t]));
    out.max_grid_overlap = std::max(out.max_grid_overlap,
                                    std::min(out.p_imp[t], out.p_exp[t]));
  }
  out.relaxation_exact = out.max_charge_overlap <= tol && out.max_grid_overlap <= tol;

  std::vector<double> imports(out.p_imp);
  std::vector<double> exports(out.p_exp);
  for (auto& v : imports) v = std::max(0.0, std::min(v, p.p_grid_max));
  for (auto& v : exports) v = std::max(0.0, std::min(v, p.p_grid_max));
  out.costs = cost_breakdown(out.design, imports, exports, p, T);
  out.avg_weekly_reward = -out.costs.totex * (168.0 / T);
  return out;
}

DispatchSolution cross_evaluate_design(const Window& window, const SystemParameters& p,
                                       const DesignPoint& design, int t_horizon,
                                       const LpLimits& limits) {
  FormulationOptions options;
  options.scenario = Scenario::ctr;
  options.t_horizon = t_horizon;
  options.fixed_design = design;
  return solve_and_extract(window, p, options, limits);
}

void write_dispatch(const DispatchSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# design p_nom=%.9g b=%.9g totex=%.9g income=%.9g\n",
                sol.design.p_nom, sol.design.b, sol.costs.totex, sol.costs.income);
  out << buf;
  out << "t,soc,charge,discharge,p_imp,p_exp\n";
  for (size_t t = 0; t < sol.charge.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", t, sol.soc[t],
                  sol.charge[t], sol.discharge[t], sol.p_imp[t], sol.p_exp[t]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,,,,\n", sol.charge.size(), sol.soc.back());
  out << buf;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace codesign
