#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace codesign {

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit, node_limit };

std::string to_string(SolveStatus s);

struct Constraint {
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  Relation rel = Relation::less_equal;
  double rhs = 0.0;
  std::string name;
};

// Dense bounds, sparse rows. Variables may have infinite bounds on either
// side; the objective may carry a constant offset.
struct LinearProgram {
  Sense sense = Sense::minimize;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> var_names;
  std::vector<Constraint> constraints;

  int n_vars() const { return static_cast<int>(objective.size()); }
  int add_variable(const std::string& name, double lo, double up, double obj = 0.0);
  void add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs,
                      const std::string& name);
  // Throws std::invalid_argument on malformed input (bounds crossed,
  // indices out of range, non-finite rhs).
  void validate() const;
};

// Indices of variables restricted to {0, 1}. Marked variables must already
// have bounds inside [0, 1].
struct BinaryMarking {
  std::vector<int> indices;
};

struct LpTolerances {
  double feasibility = 1e-7;  // constraint satisfaction
  double optimality = 1e-9;   // reduced-cost threshold
  double integrality = 1e-6;  // binary rounding in branch and bound
};

struct LpLimits {
  long max_iterations = 0;  // 0 -> 50 * (n_vars + n_constraints)
  long max_nodes = 100000;
};

struct LpSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  long iterations = 0;
  long nodes = 0;
  // Reported in the problem's own sense, so that at optimality
  //   objective - objective_offset == row_duals . rhs + reduced_costs . x
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
};

// Two-phase primal simplex on bounded variables, dense basis inverse,
// Dantzig pricing with a Bland fallback after a degeneracy stall.
LpSolution solve_lp(const LinearProgram& lp, const LpLimits& limits = {});

// Best-first branch and bound over the marked binaries; branches on the
// most fractional variable, ties broken by lowest index.
LpSolution solve_mip(const LinearProgram& lp, const BinaryMarking& marking,
                     const LpLimits& limits = {});

// Human-readable LP text format (Objective / Subject To / Bounds /
// Binaries / End), parseable by mainstream solvers.
void write_lp_file(const LinearProgram& lp, const BinaryMarking& marking,
                   const std::string& path);

}  // namespace codesign
