#pragma once

#include <limits>
#include <string>
#include <vector>

#include "loadshift/opt/program.hpp"

namespace loadshift {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// A pure LP in minimization form with bounded variables and sparse rows.
struct LpProblem {
  struct Row {
    std::vector<std::pair<int, double>> terms;
    RowSense sense = RowSense::le;
    double rhs = 0.0;
  };
  int num_vars = 0;
  std::vector<double> cost;   // minimize cost^T x
  std::vector<double> lower;  // -inf allowed
  std::vector<double> upper;  // +inf allowed
  std::vector<Row> rows;
};

enum class LpStatus {
  optimal,
  infeasible,
  unbounded,
  iteration_limit,
  numerical_failure
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  double objective = 0.0;
  std::vector<double> x;
  long long iterations = 0;
};

struct SimplexOptions {
  long long max_iterations = 2000000;
  double feas_tol = 1e-7;    // bound/row violation accepted as feasible
  double opt_tol = 1e-7;     // reduced-cost threshold
  double pivot_tol = 1e-9;   // minimum pivot magnitude
  int refactor_interval = 96;
};

/// Bounded-variable primal simplex (composite phase 1, Dantzig pricing with
/// Bland fallback, sparse LU basis with product-form updates).
/// Deterministic: identical inputs produce identical solutions.
LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {});

/// MathProgram (maximization, possibly with piecewise costs) lowered to a
/// minimization LpProblem.  Piecewise costs become epigraph variables
/// appended after the original ones; integrality is recorded separately so
/// the same lowering serves both the LP relaxation and branch-and-bound.
struct LoweredProgram {
  LpProblem lp;
  std::vector<char> is_integer;  // per lp variable
  int num_original = 0;          // variables preceding epigraph auxiliaries
  double max_constant = 0.0;     // additive constant in maximization space
};

LoweredProgram lower_program(const MathProgram& program);

/// Objective of a lowered solution mapped back to maximization space.
inline double max_space_objective(const LoweredProgram& lowered,
                                  double min_objective) {
  return -min_objective + lowered.max_constant;
}

}  // namespace loadshift
