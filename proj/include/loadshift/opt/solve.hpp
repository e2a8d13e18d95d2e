#pragma once

#include <string>
#include <vector>

#include "loadshift/core/plan.hpp"
#include "loadshift/core/types.hpp"
#include "loadshift/econ/costs.hpp"
#include "loadshift/opt/program.hpp"

namespace loadshift {

/// Maps program variables back to scheduling quantities.  Ids are -1 where a
/// variable was not emitted (outside admissible windows, disabled feature).
struct VariableMap {
  int jobs = 0, sites = 0, slots = 0;
  std::vector<int> x_id;  // (j,s,t) -> variable id
  std::vector<int> c_id;
  std::vector<int> r_id;
  std::vector<int> load_id;  // (s,t)
  std::vector<int> g_id;     // (s,t)

  int& x(int j, int s, int t) { return x_id[grid(j, s, t)]; }
  int x(int j, int s, int t) const { return x_id[grid(j, s, t)]; }
  int& c(int j, int s, int t) { return c_id[grid(j, s, t)]; }
  int c(int j, int s, int t) const { return c_id[grid(j, s, t)]; }
  int& r(int j, int s, int t) { return r_id[grid(j, s, t)]; }
  int r(int j, int s, int t) const { return r_id[grid(j, s, t)]; }
  size_t grid(int j, int s, int t) const {
    return (static_cast<size_t>(j) * sites + s) * slots + t;
  }
  size_t flat(int s, int t) const {
    return static_cast<size_t>(s) * slots + t;
  }
};

/// A built scheduling program: the MILP plus the variable map needed to
/// recover a Plan from a solution vector.
struct ScheduleProgram {
  MathProgram program;
  VariableMap map;
  double ramp_bound = 0.0;  // a-priori piecewise under-approximation slack
};

struct BuildOptions {
  int pwl_segments = 8;  // quadratic-ramp tangent count
};

/// Assembles the portfolio-dependent MILP: admissible windows (slack),
/// fixed-allocation-path restriction (reallocation off), work budget sense
/// (termination), reallocation linearization, and the optional ramp charge
/// with its piecewise-linear quadratic approximation.
ScheduleProgram build_program(const Instance& inst,
                              const BuildOptions& opts = {});

enum class SolveStatus { optimal, gap_limit, infeasible, node_limit };

std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  Plan plan;
  CostBreakdown breakdown;
  double objective = 0.0;   // breakdown.net_objective
  double bound = 0.0;       // provable upper bound, maximization space
  double gap = 0.0;         // relative |bound - objective|
  double ramp_bound = 0.0;  // quadratic-ramp approximation allowance
  long long nodes = 0;
  long long lp_iterations = 0;
  double wall_time_s = 0.0;  // informational; never serialized
  bool relaxed = false;      // produced by the relaxation heuristic
  std::vector<std::string> infeasible_rows;  // best-effort certificate
};

struct SolveOptions {
  double gap_tol = 1e-7;
  long long node_limit = 200000;
  double time_limit_s = 0.0;  // 0 disables the limit
  int pwl_segments = 8;
  bool relax = false;  // LP relaxation + rounding repair instead of B&B
};

/// Exact branch-and-bound over LP relaxations (best-bound node selection,
/// most-fractional branching with lowest-index ties).  Deterministic.
SolveResult solve_bb(const ScheduleProgram& program, const Instance& inst,
                     const SolveOptions& opts = {});

/// Exhaustive oracle: enumerates every integer allocation grid (or every
/// fixed path when reallocation is off) and optimizes the continuous rates
/// exactly per grid; the quadratic ramp term is evaluated exactly.  Throws
/// SearchSpaceError when the grid count would exceed `max_points`.
struct BruteForceOptions {
  double max_points = 1e7;
};
SolveResult brute_force(const Instance& inst,
                        const BruteForceOptions& opts = {});

/// Estimated number of integer grids brute_force would enumerate (log10).
double brute_force_log10_points(const Instance& inst);

/// First-come-first-served queue baseline: jobs in release order (ties by
/// id) start at the lightest-loaded site with free CPUs, hold a constant
/// allocation at nominal rate 1.0 until the work is delivered or the
/// original window ends; no slack, no migration, no termination decision.
Plan fcfs_baseline(const Instance& inst);

/// LP relaxation + deterministic repair for instances beyond exact scale;
/// result is flagged `relaxed` and carries the LP bound.
SolveResult solve_relaxed(const Instance& inst, const SolveOptions& opts = {});

/// Dispatches to solve_bb or solve_relaxed per options.relax.
SolveResult solve_schedule(const Instance& inst,
                           const SolveOptions& opts = {});

/// Net value of one CPU-hour of service delivered at (j,s,t): service price
/// times the job's price scale, minus marginal electricity, minus the delay
/// charge when the slot lies in the job's slack extension.  The termination
/// credit phi is a uniform per-cell shift and is left to callers.
double service_cell_value(const Instance& inst, int j, int s, int t);

/// One fixed allocation path: a single site, constant CPU level, and a
/// contiguous run of slots.  site < 0 encodes "never run" (termination).
struct FixedPath {
  int site = -1;
  int level = 0;
  int start = 0;
  int len = 0;
  bool no_run() const { return site < 0; }
};

/// All fixed paths admissible for job j under the instance's portfolio:
/// every (site, level, start, length) whose work range can contain the
/// job's budget, plus the no-run path when termination is enabled.
std::vector<FixedPath> fixed_path_options(const Instance& inst, int j);

/// Re-optimizes only the continuous rates of `plan` (allocations fixed),
/// maximizing the same objective the program encodes.  With the ramp charge
/// inactive this is a per-job greedy fill; otherwise a joint LP.  When
/// `pwl_segments` > 0 the quadratic charge uses that many fixed tangents
/// (matching the mixed-integer objective); at 0 it is refined to exactness
/// by cutting planes.  Returns false when the fixed allocations cannot meet
/// the work constraints.
bool optimize_rates(Plan& plan, const Instance& inst, int pwl_segments);

}  // namespace loadshift
