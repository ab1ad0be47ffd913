#include "codesign/economics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace codesign {

void SystemParameters::validate() const {
  if (!(eta_b > 0.0 && eta_b <= 1.0)) throw std::invalid_argument("eta_b must be in (0,1]");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (l_pv < 1.0 || l_b < 1.0) throw std::invalid_argument("lifetimes must be >= 1 year");
  if (p_nom_min > p_nom_max) throw std::invalid_argument("p_nom_min > p_nom_max");
  if (b_min > b_max) throw std::invalid_argument("b_min > b_max");
  if (!(p_grid_max > 0.0)) throw std::invalid_argument("p_grid_max must be positive");
}

SystemParameters SystemParameters::from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  SystemParameters p;
  std::map<std::string, double*> fields = {
      {"c_imp", &p.c_imp},           {"c_exp", &p.c_exp},
      {"p_grid_max", &p.p_grid_max}, {"p_nom_min", &p.p_nom_min},
      {"p_nom_max", &p.p_nom_max},   {"b_min", &p.b_min},
      {"b_max", &p.b_max},           {"eta_b", &p.eta_b},
      {"l_pv", &p.l_pv},             {"l_b", &p.l_b},
      {"cx_pv_fix", &p.cx_pv_fix},   {"cx_pv_var", &p.cx_pv_var},
      {"ox_pv_fix", &p.ox_pv_fix},   {"ox_pv_var", &p.ox_pv_var},
      {"cx_b_fix", &p.cx_b_fix},     {"cx_b_var", &p.cx_b_var},
      {"ox_b_fix", &p.ox_b_fix},     {"ox_b_var", &p.ox_b_var},
      {"r", &p.r},                   {"dt", &p.dt}};

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = fields.find(key);
    if (it == fields.end())
      throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      size_t used = 0;
      *it->second = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": bad number '" + value + "'");
    }
  }
  p.validate();
  return p;
}

double annuity_factor(double r, double l, double t) {
  if (r < 0.0) throw std::invalid_argument("annuity_factor: negative rate");
  if (l < 1.0) throw std::invalid_argument("annuity_factor: lifetime must be >= 1 year");
  if (t < 0.0) throw std::invalid_argument("annuity_factor: negative horizon");
  const double scale = t / kHoursPerYear;
  if (r == 0.0) return scale / l;  // straight-line limit
  const double growth = std::pow(1.0 + r, l);
  return r * growth / (growth - 1.0) * scale;
}

std::pair<double, double> pv_costs(double p_nom, const SystemParameters& p) {
  if (p_nom < 0.0) throw std::invalid_argument("pv_costs: negative size");
  return {p.cx_pv_fix + p.cx_pv_var * p_nom, p.ox_pv_fix + p.ox_pv_var * p_nom};
}

std::pair<double, double> battery_costs(double b, const SystemParameters& p) {
  if (b < 0.0) throw std::invalid_argument("battery_costs: negative size");
  return {p.cx_b_fix + p.cx_b_var * b, p.ox_b_fix + p.ox_b_var * b};
}

double grid_step_cost(double p_imp, double p_exp, const SystemParameters& p) {
  if (p_imp < 0.0 || p_imp > p.p_grid_max || p_exp < 0.0 || p_exp > p.p_grid_max)
    throw std::invalid_argument("grid_step_cost: power outside [0, p_grid_max]");
  return p_imp * p.c_imp * p.dt - p_exp * p.c_exp * p.dt;
}

double fixed_cost_per_horizon(const DesignPoint& d, const SystemParameters& p, double t) {
  const auto [capex_pv, opex_pv] = pv_costs(d.p_nom, p);
  const auto [capex_b, opex_b] = battery_costs(d.b, p);
  return capex_pv * annuity_factor(p.r, p.l_pv, t) + capex_b * annuity_factor(p.r, p.l_b, t) +
         (opex_pv + opex_b) * (t / kHoursPerYear);
}

double income(const std::vector<double>& imports, const std::vector<double>& exports,
              const SystemParameters& p) {
  if (imports.size() != exports.size())
    throw std::invalid_argument("income: import/export series lengths differ");
  double total = 0.0;
  for (size_t t = 0; t < imports.size(); ++t)
    total += (-imports[t] * p.c_imp + exports[t] * p.c_exp) * p.dt;
  return total;
}

CostBreakdown cost_breakdown(const DesignPoint& d, const std::vector<double>& imports,
                             const std::vector<double>& exports, const SystemParameters& p,
                             double t) {
  if (imports.size() != exports.size())
    throw std::invalid_argument("cost_breakdown: import/export series lengths differ");
  CostBreakdown out;
  const auto [capex_pv, opex_pv] = pv_costs(d.p_nom, p);
  const auto [capex_b, opex_b] = battery_costs(d.b, p);
  out.capex_amortized = capex_pv * annuity_factor(p.r, p.l_pv, t) +
                        capex_b * annuity_factor(p.r, p.l_b, t);
  out.opex_scaled = (opex_pv + opex_b) * (t / kHoursPerYear);
  out.grid_cost = 0.0;
  for (size_t i = 0; i < imports.size(); ++i)
    out.grid_cost += grid_step_cost(imports[i], exports[i], p);
  out.totex = out.capex_amortized + out.opex_scaled + out.grid_cost;
  out.income = -out.grid_cost;
  return out;
}

}  // namespace codesign
