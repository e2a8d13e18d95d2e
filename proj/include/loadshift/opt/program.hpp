#pragma once

#include <string>
#include <utility>
#include <vector>

#include "loadshift/core/types.hpp"

namespace loadshift {

enum class VarKind { continuous, integer };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lb = 0.0;
  double ub = 0.0;
};

enum class RowSense { le, ge, eq };

/// One sparse linear constraint.  `tag` is a stable identifier naming the
/// constraint family and indices (used in reports and the LP export).
struct LinearRow {
  std::string tag;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> terms;  // (variable id, coefficient)
};

/// Convex piecewise-linear cost attached to one variable: the objective is
/// charged weight * max_k(slope_k*v + intercept_k).  Segments must have
/// nondecreasing slopes (convexity) and weight must be nonnegative so the
/// epigraph lowering is exact at the optimum.
struct PwlCost {
  int var = -1;
  double weight = 0.0;
  std::vector<std::pair<double, double>> segments;  // (slope, intercept)
};

/// A mixed-integer program in maximization form: linear objective plus
/// optional convex piecewise-linear costs, over sparse linear rows.
struct MathProgram {
  std::vector<Variable> variables;
  std::vector<LinearRow> rows;
  std::vector<double> objective;  // linear coefficients, maximize
  double objective_constant = 0.0;
  std::vector<PwlCost> pwl_costs;

  int add_variable(std::string name, VarKind kind, double lb, double ub) {
    variables.push_back({std::move(name), kind, lb, ub});
    objective.push_back(0.0);
    return static_cast<int>(variables.size()) - 1;
  }

  void add_row(std::string tag, RowSense sense, double rhs,
               std::vector<std::pair<int, double>> terms) {
    rows.push_back({std::move(tag), sense, rhs, std::move(terms)});
  }

  int count_variables_with_prefix(const std::string& prefix) const;
  int count_rows_with_prefix(const std::string& prefix) const;

  /// Checks structural invariants: every referenced variable exists, bounds
  /// are ordered, piecewise costs are convex with nonnegative weight.
  /// Throws StructuralError on the first failure.
  void check_well_formed() const;
};

/// Writes the program as an LP-format text file (piecewise costs lowered to
/// epigraph variables) so external solvers can cross-check solutions.
void write_lp_format(const MathProgram& program, const std::string& path);

}  // namespace loadshift
