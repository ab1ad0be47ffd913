#include "codesign/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <stdexcept>

namespace codesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr long kRefactorEvery = 500;

enum VarState : int { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFree = 3 };

// Bounded-variable primal simplex over the equality form [A | I] x = b.
// Column 0..n_struct-1 are the problem variables, then one slack per row,
// then (during phase 1 only) artificials for rows whose slack start value
// violates its bounds.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpTolerances& tol, long max_iterations)
      : tol_(tol), max_iterations_(max_iterations) {
    m_ = static_cast<int>(lp.constraints.size());
    n_struct_ = lp.n_vars();
    minimize_ = lp.sense == Sense::minimize;

    cols_.resize(n_struct_ + m_);
    for (int i = 0; i < m_; ++i) {
      for (const auto& [j, v] : lp.constraints[i].terms)
        if (v != 0.0) cols_[j].push_back({i, v});
    }
    // Merge duplicate indices within a column.
    for (auto& col : cols_) {
      std::sort(col.begin(), col.end());
      size_t w = 0;
      for (size_t r = 0; r < col.size(); ++r) {
        if (w > 0 && col[w - 1].first == col[r].first) col[w - 1].second += col[r].second;
        else col[w++] = col[r];
      }
      col.resize(w);
    }

    lo_.assign(n_struct_ + m_, 0.0);
    up_.assign(n_struct_ + m_, 0.0);
    cost_.assign(n_struct_ + m_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      cost_[j] = minimize_ ? lp.objective[j] : -lp.objective[j];
    }
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const auto& c = lp.constraints[i];
      b_[i] = c.rhs;
      const int js = n_struct_ + i;
      cols_[js].push_back({i, 1.0});
      switch (c.rel) {
        case Relation::less_equal: lo_[js] = 0.0; up_[js] = kInf; break;
        case Relation::equal: lo_[js] = 0.0; up_[js] = 0.0; break;
        case Relation::greater_equal: lo_[js] = -kInf; up_[js] = 0.0; break;
      }
    }
  }

  SolveStatus run() {
    init_point();
    const bool needs_phase1 = install_artificials();
    if (needs_phase1) {
      const SolveStatus s = iterate(phase1_cost_);
      if (s != SolveStatus::optimal) return s == SolveStatus::unbounded ? SolveStatus::infeasible : s;
      double infeas = 0.0;
      for (int j = n_total(); j < n_with_artificials(); ++j) infeas += std::abs(x_[j]);
      if (infeas > tol_.feasibility) return SolveStatus::infeasible;
      // Pin artificials at zero for phase 2.
      for (int j = n_total(); j < n_with_artificials(); ++j) {
        lo_[j] = up_[j] = 0.0;
        if (state_[j] != kBasic) { state_[j] = kAtLower; x_[j] = 0.0; }
      }
    }
    const SolveStatus s = iterate(cost_);
    if (s != SolveStatus::optimal) return s;
    refresh();
    return verify() ? SolveStatus::optimal : SolveStatus::iteration_limit;
  }

  long iterations() const { return iterations_; }

  void extract(const LinearProgram& lp, LpSolution& out) const {
    out.x.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      double v = x_[j];
      if (lo_[j] > -kInf) v = std::max(v, lo_[j]);
      if (up_[j] < kInf) v = std::min(v, up_[j]);
      out.x[j] = v;
    }
    out.objective = lp.objective_offset;
    for (int j = 0; j < n_struct_; ++j) out.objective += lp.objective[j] * out.x[j];

    // Duals and reduced costs in the problem's own sense.
    std::vector<double> y(m_);
    btran(y);
    const double sign = minimize_ ? 1.0 : -1.0;
    out.row_duals.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) out.row_duals[i] = sign * y[i];
    out.reduced_costs.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      double d = cost_[j];
      for (const auto& [i, v] : cols_[j]) d -= y[i] * v;
      out.reduced_costs[j] = sign * d;
    }
  }

 private:
  int n_total() const { return n_struct_ + m_; }
  int n_with_artificials() const { return static_cast<int>(cols_.size()); }

  void init_point() {
    const int n = n_total();
    x_.assign(n, 0.0);
    state_.assign(n, kAtLower);
    for (int j = 0; j < n_struct_; ++j) {
      if (lo_[j] > -kInf) { x_[j] = lo_[j]; state_[j] = kAtLower; }
      else if (up_[j] < kInf) { x_[j] = up_[j]; state_[j] = kAtUpper; }
      else { x_[j] = 0.0; state_[j] = kFree; }
    }
    basis_.resize(m_);
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_struct_ + i;
      state_[n_struct_ + i] = kBasic;
      binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    }
    // Start the slacks at the activity implied by the nonbasic point.
    for (int i = 0; i < m_; ++i) x_[n_struct_ + i] = b_[i];
    for (int j = 0; j < n_struct_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols_[j]) x_[n_struct_ + i] -= v * x_[j];
    }
  }

  // Returns true when any artificial columns were added.
  bool install_artificials() {
    phase1_cost_.assign(n_total(), 0.0);
    bool any = false;
    for (int i = 0; i < m_; ++i) {
      const int js = n_struct_ + i;
      const double s = x_[js];
      double target = s;
      if (s < lo_[js] - 1e-12) target = lo_[js];
      else if (s > up_[js] + 1e-12) target = up_[js];
      else continue;
      any = true;
      const double viol = s - target;  // nonzero, sign gives the artificial column sign
      const int ja = static_cast<int>(cols_.size());
      cols_.push_back({{i, viol > 0 ? 1.0 : -1.0}});
      lo_.push_back(0.0);
      up_.push_back(kInf);
      cost_.push_back(0.0);
      phase1_cost_.push_back(1.0);
      x_.push_back(std::abs(viol));
      state_.push_back(kBasic);
      // The artificial takes the slack's place in the basis.
      x_[js] = target;
      state_[js] = target == lo_[js] ? kAtLower : kAtUpper;
      basis_[i] = ja;
    }
    phase1_cost_.resize(cols_.size(), 1.0);
    return any;
  }

  void ftran(int col, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    for (const auto& [i, v] : cols_[col])
      for (int r = 0; r < m_; ++r) w[r] += binv_[static_cast<size_t>(r) * m_ + i] * v;
  }

  void btran(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = active_cost_ ? (*active_cost_)[basis_[i]] : cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int j = 0; j < m_; ++j) y[j] += cb * row[j];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = (*active_cost_)[j];
    for (const auto& [i, v] : cols_[j]) d -= y[i] * v;
    return d;
  }

  SolveStatus iterate(const std::vector<double>& active_cost) {
    active_cost_ = &active_cost;
    std::vector<double> y, w;
    long stall = 0;
    bool bland = false;

    while (true) {
      if (iterations_ >= max_iterations_) return SolveStatus::iteration_limit;
      if (iterations_ > 0 && iterations_ % kRefactorEvery == 0) refresh();

      btran(y);
      int enter = -1;
      double best_score = tol_.optimality;
      const int n = n_with_artificials();
      for (int j = 0; j < n; ++j) {
        if (state_[j] == kBasic) continue;
        if (up_[j] - lo_[j] < 1e-14 && state_[j] != kFree) continue;  // fixed
        const double d = reduced_cost(j, y);
        double score = 0.0;
        if (state_[j] == kAtLower && d < -tol_.optimality) score = -d;
        else if (state_[j] == kAtUpper && d > tol_.optimality) score = d;
        else if (state_[j] == kFree && std::abs(d) > tol_.optimality) score = std::abs(d);
        if (score <= 0.0) continue;
        if (bland) { enter = j; break; }
        if (score > best_score) { best_score = score; enter = j; }
      }
      if (enter < 0) {
        active_cost_ = nullptr;
        return SolveStatus::optimal;
      }

      const double d_enter = reduced_cost(enter, y);
      const double dir = state_[enter] == kAtUpper ? -1.0 : (state_[enter] == kFree && d_enter > 0 ? -1.0 : 1.0);
      ftran(enter, w);

      // Ratio test: first blocking basic variable, or the entering
      // variable's own opposite bound.
      double t_flip = kInf;
      if (lo_[enter] > -kInf && up_[enter] < kInf) t_flip = up_[enter] - lo_[enter];
      double t_best = kInf;
      int leave = -1;
      double leave_delta = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * w[i];
        if (std::abs(delta) <= kPivotTol) continue;
        const int jb = basis_[i];
        double t;
        if (delta < 0.0) {
          if (lo_[jb] <= -kInf) continue;
          t = (x_[jb] - lo_[jb]) / (-delta);
        } else {
          if (up_[jb] >= kInf) continue;
          t = (up_[jb] - x_[jb]) / delta;
        }
        if (t < 0.0) t = 0.0;  // tolerate slightly out-of-bound basics
        const bool better =
            t < t_best - 1e-10 ||
            (t < t_best + 1e-10 &&
             (leave < 0 ||
              (bland ? basis_[i] < basis_[leave] : std::abs(delta) > std::abs(leave_delta))));
        if (better) { t_best = t; leave = i; leave_delta = delta; }
      }

      if (t_best >= kInf && t_flip >= kInf) {
        active_cost_ = nullptr;
        return SolveStatus::unbounded;
      }

      ++iterations_;
      if (t_flip < t_best) {
        // Bound flip, basis unchanged.
        for (int i = 0; i < m_; ++i) x_[basis_[i]] += -dir * w[i] * t_flip;
        x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
        state_[enter] = dir > 0 ? kAtUpper : kAtLower;
        stall = 0;
        bland = false;
        continue;
      }

      const double t = t_best;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] += -dir * w[i] * t;
      x_[enter] += dir * t;
      const int jl = basis_[leave];
      if (leave_delta < 0.0) { x_[jl] = lo_[jl]; state_[jl] = kAtLower; }
      else { x_[jl] = up_[jl]; state_[jl] = up_[jl] == lo_[jl] ? kAtLower : kAtUpper; }
      basis_[leave] = enter;
      state_[enter] = kBasic;
      pivot_binv(leave, w);

      if (t <= 1e-10) {
        if (++stall > 100) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  // binv <- E * binv for the elementary pivot at row r with column w.
  void pivot_binv(int r, const std::vector<double>& w) {
    const double piv = w[r];
    double* rowr = &binv_[static_cast<size_t>(r) * m_];
    for (int j = 0; j < m_; ++j) rowr[j] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r || w[i] == 0.0) continue;
      const double f = w[i];
      double* rowi = &binv_[static_cast<size_t>(i) * m_];
      for (int j = 0; j < m_; ++j) rowi[j] -= f * rowr[j];
    }
  }

  // Rebuilds the basis inverse from scratch and recomputes basic values.
  void refresh() {
    if (m_ == 0) return;
    std::vector<double> dense(static_cast<size_t>(m_) * 2 * m_, 0.0);
    const size_t stride = 2 * m_;
    for (int i = 0; i < m_; ++i) {
      for (const auto& [r, v] : cols_[basis_[i]]) dense[static_cast<size_t>(r) * stride + i] = v;
      dense[static_cast<size_t>(i) * stride + m_ + i] = 1.0;
    }
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      for (int r = c + 1; r < m_; ++r)
        if (std::abs(dense[static_cast<size_t>(r) * stride + c]) >
            std::abs(dense[static_cast<size_t>(piv) * stride + c]))
          piv = r;
      if (std::abs(dense[static_cast<size_t>(piv) * stride + c]) < 1e-12)
        throw std::runtime_error("simplex: singular basis during refactorization");
      if (piv != c)
        for (size_t j = 0; j < stride; ++j)
          std::swap(dense[static_cast<size_t>(piv) * stride + j],
                    dense[static_cast<size_t>(c) * stride + j]);
      const double d = dense[static_cast<size_t>(c) * stride + c];
      for (size_t j = 0; j < stride; ++j) dense[static_cast<size_t>(c) * stride + j] /= d;
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = dense[static_cast<size_t>(r) * stride + c];
        if (f == 0.0) continue;
        for (size_t j = 0; j < stride; ++j)
          dense[static_cast<size_t>(r) * stride + j] -= f * dense[static_cast<size_t>(c) * stride + j];
      }
    }
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        binv_[static_cast<size_t>(i) * m_ + j] = dense[static_cast<size_t>(i) * stride + m_ + j];

    // x_B = Binv (b - N x_N)
    std::vector<double> rhs(b_);
    const int n = n_with_artificials();
    for (int j = 0; j < n; ++j) {
      if (state_[j] == kBasic || x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols_[j]) rhs[i] -= v * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      const double* row = &binv_[static_cast<size_t>(i) * m_];
      for (int j = 0; j < m_; ++j) acc += row[j] * rhs[j];
      x_[basis_[i]] = acc;
    }
  }

  bool verify() const {
    for (int j = 0; j < n_with_artificials(); ++j) {
      if (lo_[j] > -kInf && x_[j] < lo_[j] - 10 * tol_.feasibility) return false;
      if (up_[j] < kInf && x_[j] > up_[j] + 10 * tol_.feasibility) return false;
    }
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_with_artificials(); ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [i, v] : cols_[j]) act[i] += v * x_[j];
    }
    for (int i = 0; i < m_; ++i)
      if (std::abs(act[i] - b_[i]) > 10 * tol_.feasibility * std::max(1.0, std::abs(b_[i])))
        return false;
    return true;
  }

  int m_ = 0;
  int n_struct_ = 0;
  bool minimize_ = true;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> b_, cost_, phase1_cost_, lo_, up_, x_;
  std::vector<int> basis_;
  std::vector<int> state_;
  std::vector<double> binv_;
  const std::vector<double>* active_cost_ = nullptr;
  LpTolerances tol_;
  long max_iterations_ = 0;
  long iterations_ = 0;
};

long default_iteration_cap(const LinearProgram& lp, const LpLimits& limits) {
  if (limits.max_iterations > 0) return limits.max_iterations;
  return 50L * (lp.n_vars() + static_cast<long>(lp.constraints.size()));
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
    case SolveStatus::node_limit: return "node-limit";
  }
  return "unknown";
}

int LinearProgram::add_variable(const std::string& name, double lo, double up, double obj) {
  objective.push_back(obj);
  lower.push_back(lo);
  upper.push_back(up);
  var_names.push_back(name);
  return n_vars() - 1;
}

void LinearProgram::add_constraint(std::vector<std::pair<int, double>> terms, Relation rel,
                                   double rhs, const std::string& name) {
  constraints.push_back({std::move(terms), rel, rhs, name});
}

void LinearProgram::validate() const {
  const size_t n = objective.size();
  if (lower.size() != n || upper.size() != n || var_names.size() != n)
    throw std::invalid_argument("LinearProgram: inconsistent variable arrays");
  for (size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]))
      throw std::invalid_argument("LinearProgram: NaN bound");
    if (lower[j] > upper[j])
      throw std::invalid_argument("LinearProgram: crossed bounds on variable " +
                                  std::to_string(j));
  }
  for (const auto& c : constraints) {
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("LinearProgram: non-finite rhs");
    for (const auto& [j, v] : c.terms) {
      if (j < 0 || j >= static_cast<int>(n))
        throw std::invalid_argument("LinearProgram: term index out of range");
      if (!std::isfinite(v)) throw std::invalid_argument("LinearProgram: non-finite coefficient");
    }
  }
}

LpSolution solve_lp(const LinearProgram& lp, const LpLimits& limits) {
  lp.validate();
  LpSolution out;
  if (lp.n_vars() == 0) {
    out.status = SolveStatus::optimal;
    out.objective = lp.objective_offset;
    return out;
  }
  LpTolerances tol;
  Simplex solver(lp, tol, default_iteration_cap(lp, limits));
  out.status = solver.run();
  out.iterations = solver.iterations();
  if (out.status == SolveStatus::optimal) solver.extract(lp, out);
  return out;
}

namespace {

struct BnbNode {
  double bound_key;  // parent objective in minimization form
  long seq;
  std::vector<std::pair<int, int>> fixings;  // (variable, value)
};

struct NodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound_key != b.bound_key) return a.bound_key > b.bound_key;
    return a.seq > b.seq;
  }
};

// Tries to move every near-integral binary exactly onto an integer value
// without disturbing the rest of the point. Returns false if some binary
// cannot be rounded either way without breaking a constraint.
bool snap_binaries(const LinearProgram& lp, const std::vector<int>& binaries,
                   const LpTolerances& tol, std::vector<double>& x, double& objective) {
  std::vector<double> act(lp.constraints.size(), 0.0);
  for (size_t i = 0; i < lp.constraints.size(); ++i)
    for (const auto& [j, v] : lp.constraints[i].terms) act[i] += v * x[j];

  std::vector<std::vector<std::pair<int, double>>> var_rows(lp.n_vars());
  for (size_t i = 0; i < lp.constraints.size(); ++i)
    for (const auto& [j, v] : lp.constraints[i].terms)
      var_rows[j].push_back({static_cast<int>(i), v});

  auto row_ok = [&](int i, double a) {
    const auto& c = lp.constraints[i];
    const double slack = tol.feasibility * std::max(1.0, std::abs(c.rhs));
    switch (c.rel) {
      case Relation::less_equal: return a <= c.rhs + slack;
      case Relation::equal: return std::abs(a - c.rhs) <= slack;
      case Relation::greater_equal: return a >= c.rhs - slack;
    }
    return false;
  };

  for (int j : binaries) {
    const double frac = x[j] - std::floor(x[j]);
    const double nearest = std::round(x[j]);
    if (std::abs(x[j] - nearest) <= tol.integrality) continue;
    bool snapped = false;
    const double first = frac >= 0.5 ? 1.0 : 0.0;
    for (const double target : {first, 1.0 - first}) {
      if (target < lp.lower[j] - 1e-12 || target > lp.upper[j] + 1e-12) continue;
      const double delta = target - x[j];
      bool ok = true;
      for (const auto& [i, v] : var_rows[j])
        if (!row_ok(i, act[i] + v * delta)) { ok = false; break; }
      if (!ok) continue;
      for (const auto& [i, v] : var_rows[j]) act[i] += v * delta;
      objective += lp.objective[j] * delta;
      x[j] = target;
      snapped = true;
      break;
    }
    if (!snapped) return false;
  }
  return true;
}

}  // namespace

LpSolution solve_mip(const LinearProgram& lp, const BinaryMarking& marking,
                     const LpLimits& limits) {
  lp.validate();
  for (int j : marking.indices) {
    if (j < 0 || j >= lp.n_vars())
      throw std::invalid_argument("BinaryMarking: index out of range");
    if (lp.lower[j] < -1e-9 || lp.upper[j] > 1.0 + 1e-9)
      throw std::invalid_argument("BinaryMarking: variable " + std::to_string(j) +
                                  " has bounds outside [0, 1]");
  }
  if (marking.indices.empty()) return solve_lp(lp, limits);

  LpTolerances tol;
  const double sense_sign = lp.sense == Sense::minimize ? 1.0 : -1.0;
  auto min_key = [&](double obj) { return sense_sign * obj; };

  std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
  open.push({-kInf, 0, {}});
  long seq = 1;
  long nodes = 0;
  bool have_incumbent = false;
  LpSolution incumbent;
  double incumbent_key = kInf;
  bool hit_node_limit = false;
  long total_iterations = 0;

  while (!open.empty()) {
    BnbNode node = open.top();
    open.pop();
    if (have_incumbent && node.bound_key >= incumbent_key - 1e-9) continue;
    if (++nodes > limits.max_nodes) { hit_node_limit = true; break; }

    LinearProgram sub = lp;
    for (const auto& [j, v] : node.fixings) {
      sub.lower[j] = v;
      sub.upper[j] = v;
    }
    LpSolution relax = solve_lp(sub, limits);
    total_iterations += relax.iterations;
    if (relax.status == SolveStatus::unbounded) {
      LpSolution out;
      out.status = SolveStatus::unbounded;
      out.nodes = nodes;
      out.iterations = total_iterations;
      return out;
    }
    if (relax.status == SolveStatus::iteration_limit) {
      LpSolution out;
      out.status = SolveStatus::iteration_limit;
      out.nodes = nodes;
      out.iterations = total_iterations;
      return out;
    }
    if (relax.status != SolveStatus::optimal) continue;  // infeasible subtree
    const double key = min_key(relax.objective);
    if (have_incumbent && key >= incumbent_key - 1e-9) continue;

    int branch_var = -1;
    double branch_frac = tol.integrality;
    for (int j : marking.indices) {
      const double frac = std::min(relax.x[j] - std::floor(relax.x[j]),
                                   std::ceil(relax.x[j]) - relax.x[j]);
      if (frac > branch_frac + 1e-15) { branch_frac = frac; branch_var = j; }
    }

    if (branch_var < 0) {
      if (!have_incumbent || key < incumbent_key - 1e-12) {
        incumbent = relax;
        incumbent_key = key;
        have_incumbent = true;
      }
      continue;
    }

    // A rounded copy of the relaxation often is already feasible and serves
    // as an incumbent; if rounding does not change the objective the node
    // is solved outright.
    {
      std::vector<double> x = relax.x;
      double obj = relax.objective;
      if (snap_binaries(sub, marking.indices, tol, x, obj)) {
        const double snap_key = min_key(obj);
        if (!have_incumbent || snap_key < incumbent_key - 1e-12) {
          incumbent = relax;
          incumbent.x = x;
          incumbent.objective = obj;
          incumbent_key = snap_key;
          have_incumbent = true;
        }
        if (snap_key <= key + 1e-9) continue;  // rounding was free
      }
    }

    for (int v = 0; v <= 1; ++v) {
      BnbNode child;
      child.bound_key = key;
      child.seq = seq++;
      child.fixings = node.fixings;
      child.fixings.push_back({branch_var, v});
      open.push(std::move(child));
    }
  }

  LpSolution out;
  if (have_incumbent) {
    out = incumbent;
    out.status = hit_node_limit ? SolveStatus::node_limit : SolveStatus::optimal;
  } else if (hit_node_limit) {
    out.status = SolveStatus::node_limit;
  } else {
    out.status = SolveStatus::infeasible;
  }
  out.nodes = nodes;
  out.iterations = total_iterations;
  return out;
}

namespace {

std::string var_name_or_default(const LinearProgram& lp, int j) {
  if (j < static_cast<int>(lp.var_names.size()) && !lp.var_names[j].empty())
    return lp.var_names[j];
  return "x" + std::to_string(j);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ofstream& out, const LinearProgram& lp,
                 const std::vector<std::pair<int, double>>& terms, double constant) {
  bool first = true;
  int line_len = 0;
  auto emit = [&](const std::string& piece) {
    if (line_len + static_cast<int>(piece.size()) > 200) {
      out << "\n   ";
      line_len = 3;
    }
    out << piece;
    line_len += static_cast<int>(piece.size());
  };
  for (const auto& [j, v] : terms) {
    if (v == 0.0) continue;
    std::string piece;
    if (first) piece = (v < 0 ? "- " : "") + format_number(std::abs(v));
    else piece = (v < 0 ? " - " : " + ") + format_number(std::abs(v));
    piece += " " + var_name_or_default(lp, j);
    emit(piece);
    first = false;
  }
  if (constant != 0.0) {
    std::string piece = first ? format_number(constant)
                              : (constant < 0 ? " - " : " + ") + format_number(std::abs(constant));
    emit(piece);
    first = false;
  }
  if (first) emit("0 " + var_name_or_default(lp, 0));
}

}  // namespace

void write_lp_file(const LinearProgram& lp, const BinaryMarking& marking,
                   const std::string& path) {
  lp.validate();
  if (lp.n_vars() == 0) throw std::invalid_argument("write_lp_file: empty problem");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  out << (lp.sense == Sense::minimize ? "Minimize" : "Maximize") << "\n obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < lp.n_vars(); ++j)
    if (lp.objective[j] != 0.0) obj_terms.push_back({j, lp.objective[j]});
  write_terms(out, lp, obj_terms, lp.objective_offset);
  out << "\nSubject To\n";
  for (size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& c = lp.constraints[i];
    const std::string name = c.name.empty() ? "c" + std::to_string(i) : c.name;
    out << " " << name << ": ";
    write_terms(out, lp, c.terms, 0.0);
    const char* rel = c.rel == Relation::less_equal ? "<=" :
                      c.rel == Relation::equal ? "=" : ">=";
    out << " " << rel << " " << format_number(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.n_vars(); ++j) {
    const std::string name = var_name_or_default(lp, j);
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    if (lo == up) out << " " << name << " = " << format_number(lo) << "\n";
    else if (lo == -kInf && up == kInf) out << " " << name << " free\n";
    else if (lo == -kInf) out << " -inf <= " << name << " <= " << format_number(up) << "\n";
    else if (up == kInf) out << " " << name << " >= " << format_number(lo) << "\n";
    else out << " " << format_number(lo) << " <= " << name << " <= " << format_number(up) << "\n";
  }
  if (!marking.indices.empty()) {
    out << "Binaries\n";
    int line_len = 0;
    for (int j : marking.indices) {
      const std::string name = var_name_or_default(lp, j);
      if (line_len + static_cast<int>(name.size()) + 1 > 200) { out << "\n"; line_len = 0; }
      out << " " << name;
      line_len += static_cast<int>(name.size()) + 1;
    }
    out << "\n";
  }
  out << "End\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace codesign
