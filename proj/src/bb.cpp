#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "loadshift/opt/simplex.hpp"
#include "loadshift/opt/solve.hpp"

namespace loadshift {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::gap_limit: return "gap_limit";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::node_limit: return "node_limit";
  }
  return "unknown";
}

namespace {

struct Node {
  double bound = 0.0;  // parent LP objective, minimization space
  long long id = 0;
  std::vector<double> lower, upper;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

constexpr double kIntTol = 1e-6;

/// Best-effort irreducible infeasible row set by deletion filtering.
std::vector<std::string> deletion_filter(const MathProgram& program,
                                         const LoweredProgram& lowered) {
  std::vector<std::string> tags;
  if (lowered.lp.rows.size() > 200) return tags;
  LpProblem work = lowered.lp;
  std::vector<char> keep(work.rows.size(), 1);
  for (size_t i = 0; i < work.rows.size(); ++i) {
    keep[i] = 0;
    LpProblem trial = work;
    trial.rows.clear();
    for (size_t k = 0; k < work.rows.size(); ++k)
      if (keep[k]) trial.rows.push_back(work.rows[k]);
    LpSolution sol = solve_lp(trial);
    if (sol.status != LpStatus::infeasible) keep[i] = 1;
  }
  for (size_t i = 0; i < work.rows.size(); ++i)
    if (keep[i] && i < program.rows.size()) tags.push_back(program.rows[i].tag);
  return tags;
}

}  // namespace

/// Reconstructs a Plan from a solution vector of the lowered program.
static Plan plan_from_solution(const VariableMap& map, const Instance& inst,
                               const std::vector<double>& x) {
  Plan plan(map.jobs, map.sites, map.slots);
  for (int j = 0; j < map.jobs; ++j)
    for (int s = 0; s < map.sites; ++s) {
      double lo = inst.sites[s].rate_lo;
      double hi = inst.sites[s].rate_hi;
      for (int t = 0; t < map.slots; ++t) {
        int xi = map.x(j, s, t);
        int ci = map.c(j, s, t);
        if (xi < 0) continue;
        long long alloc = std::llround(x[xi]);
        plan.x(j, s, t) = static_cast<int>(std::max(0LL, alloc));
        double rate = ci >= 0 ? x[ci] : 0.0;
        rate = std::clamp(rate, lo * plan.x(j, s, t), hi * plan.x(j, s, t));
        plan.c(j, s, t) = rate;
      }
    }
  return plan;
}

/// Solver-side accounting: every objective term summed directly from the
/// solution vector, independent of the econ re-evaluation path.
static CostBreakdown breakdown_from_solution(const ScheduleProgram& sp,
                                             const Instance& inst,
                                             const LoweredProgram& lowered,
                                             const std::vector<double>& x) {
  const VariableMap& map = sp.map;
  const Portfolio& pf = inst.portfolio;
  const double dt = inst.horizon.slot_hours;
  CostBreakdown out;

  for (int s = 0; s < map.sites; ++s) {
    const Site& site = inst.sites[s];
    double l_max = site.max_service();
    double slope =
        l_max > 0.0 ? site.pue * (site.p_busy_mw - site.p_idle_mw) / l_max
                    : 0.0;
    for (int t = 0; t < inst.horizon.slots_original; ++t)
      out.electricity +=
          inst.prices.electricity.at(s, t) * site.pue * site.p_idle_mw * dt;
    for (int j = 0; j < map.jobs; ++j) {
      const Job& job = inst.jobs[j];
      SlotRange delay = delay_window(job, pf.slack);
      for (int t = 0; t < map.slots; ++t) {
        int ci = map.c(j, s, t);
        if (ci < 0) continue;
        double c = x[ci];
        out.revenue +=
            inst.prices.service.at(s, t) * job.svc_price_scale * c * dt;
        out.electricity += inst.prices.electricity.at(s, t) * slope * c * dt;
        if (delay.contains(t)) out.delay_penalty += pf.eta * c * dt;
        int ri = map.r(j, s, t);
        if (ri >= 0) out.realloc_penalty += pf.rho * x[ri];
      }
    }
  }
  for (int j = 0; j < map.jobs; ++j) {
    if (!pf.termination) continue;
    double delivered = 0.0;
    for (int s = 0; s < map.sites; ++s)
      for (int t = 0; t < map.slots; ++t) {
        int ci = map.c(j, s, t);
        if (ci >= 0) delivered += x[ci] * dt;
      }
    out.termination_penalty +=
        pf.phi * std::max(0.0, inst.jobs[j].total_work - delivered);
  }
  if (pf.ramp_form == RampForm::linear && pf.gamma > 0.0) {
    for (int s = 0; s < map.sites; ++s)
      for (int t = 1; t < map.slots; ++t) {
        int gi = map.g_id[map.flat(s, t)];
        if (gi >= 0) out.ramp_charge += pf.gamma * x[gi];
      }
  } else if (pf.ramp_form == RampForm::quadratic && pf.gamma > 0.0) {
    // Epigraph variables live after the original ones, one per pwl cost.
    for (size_t k = 0; k < sp.program.pwl_costs.size(); ++k) {
      int q = lowered.num_original + static_cast<int>(k);
      out.ramp_charge += sp.program.pwl_costs[k].weight * x[q];
    }
  }
  out.qos_total =
      out.realloc_penalty + out.delay_penalty + out.termination_penalty;
  out.grid_cost = out.electricity + out.ramp_charge;
  out.net_objective = out.revenue - out.grid_cost - out.qos_total;
  return out;
}

SolveResult solve_bb(const ScheduleProgram& sp, const Instance& inst,
                     const SolveOptions& opts) {
  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  LoweredProgram lowered = lower_program(sp.program);
  SolveResult result;
  result.ramp_bound = sp.ramp_bound;

  Node root;
  root.id = 0;
  root.lower = lowered.lp.lower;
  root.upper = lowered.lp.upper;

  LpProblem work = lowered.lp;
  auto solve_node = [&](const Node& node) {
    work.lower = node.lower;
    work.upper = node.upper;
    LpSolution sol = solve_lp(work);
    result.lp_iterations += sol.iterations;
    return sol;
  };

  LpSolution root_sol = solve_node(root);
  if (root_sol.status == LpStatus::infeasible) {
    result.status = SolveStatus::infeasible;
    result.plan = Plan(sp.map.jobs, sp.map.sites, sp.map.slots);
    result.infeasible_rows = deletion_filter(sp.program, lowered);
    result.wall_time_s = elapsed();
    return result;
  }
  if (root_sol.status != LpStatus::optimal)
    throw StructuralError("LP relaxation failed: status " +
                          std::to_string(static_cast<int>(root_sol.status)));

  std::priority_queue<Node, std::vector<Node>, NodeOrder> frontier;
  root.bound = root_sol.objective;
  frontier.push(root);

  bool have_incumbent = false;
  std::vector<double> incumbent;
  double incumbent_obj = kInf;  // minimization space
  long long next_id = 1;
  long long nodes = 0;
  bool hit_node_limit = false;
  bool hit_time_limit = false;
  double frontier_bound = root_sol.objective;

  while (!frontier.empty()) {
    frontier_bound = frontier.top().bound;
    if (have_incumbent) {
      double gap = incumbent_obj - frontier_bound;
      if (gap <= opts.gap_tol * std::max(1.0, std::abs(incumbent_obj))) break;
    }
    if (nodes >= opts.node_limit) {
      hit_node_limit = true;
      break;
    }
    if (opts.time_limit_s > 0.0 && elapsed() > opts.time_limit_s) {
      hit_time_limit = true;
      break;
    }

    Node node = frontier.top();
    frontier.pop();
    if (have_incumbent && node.bound >= incumbent_obj - 1e-12) continue;

    ++nodes;
    LpSolution sol = solve_node(node);
    if (sol.status == LpStatus::infeasible) continue;
    if (sol.status != LpStatus::optimal)
      throw StructuralError("node LP failed during branch and bound");
    if (have_incumbent && sol.objective >= incumbent_obj - 1e-12) continue;

    int branch_var = -1;
    double branch_frac = kIntTol;
    for (int j = 0; j < static_cast<int>(lowered.is_integer.size()); ++j) {
      if (!lowered.is_integer[j]) continue;
      double v = sol.x[j];
      double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > branch_frac) {
        branch_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      // Integer-feasible: snap and account exactly.
      std::vector<double> snapped = sol.x;
      double obj = 0.0;
      for (int j = 0; j < static_cast<int>(snapped.size()); ++j) {
        if (j < static_cast<int>(lowered.is_integer.size()) &&
            lowered.is_integer[j])
          snapped[j] = std::llround(snapped[j]);
        obj += lowered.lp.cost[j] * snapped[j];
      }
      if (!have_incumbent || obj < incumbent_obj) {
        have_incumbent = true;
        incumbent = std::move(snapped);
        incumbent_obj = obj;
      }
      continue;
    }

    double v = sol.x[branch_var];
    Node down = node;
    down.id = next_id++;
    down.bound = sol.objective;
    down.upper[branch_var] = std::floor(v);
    Node up = node;
    up.id = next_id++;
    up.bound = sol.objective;
    up.lower[branch_var] = std::ceil(v);
    frontier.push(std::move(down));
    frontier.push(std::move(up));
  }

  result.nodes = nodes;
  result.wall_time_s = elapsed();

  if (!have_incumbent) {
    if (hit_node_limit || hit_time_limit) {
      result.status = SolveStatus::node_limit;
      result.plan = Plan(sp.map.jobs, sp.map.sites, sp.map.slots);
      result.bound = max_space_objective(lowered, frontier_bound);
      result.gap = kInf;
      return result;
    }
    // No incumbent and the tree is exhausted: infeasible in the integers
    // even though the relaxation was feasible, so no row subset certifies it.
    result.status = SolveStatus::infeasible;
    result.plan = Plan(sp.map.jobs, sp.map.sites, sp.map.slots);
    return result;
  }

  double best_bound_min = frontier.empty()
                              ? incumbent_obj
                              : std::min(frontier_bound, incumbent_obj);
  result.breakdown = breakdown_from_solution(sp, inst, lowered, incumbent);
  result.breakdown.net_objective = result.breakdown.revenue -
                                   result.breakdown.grid_cost -
                                   result.breakdown.qos_total;
  result.objective = result.breakdown.net_objective;
  result.bound = max_space_objective(lowered, best_bound_min);
  result.gap = std::max(0.0, result.bound - result.objective) /
               std::max(1.0, std::abs(result.objective));
  result.plan = plan_from_solution(sp.map, inst, incumbent);

  if (hit_node_limit)
    result.status = SolveStatus::node_limit;
  else if (hit_time_limit)
    result.status = SolveStatus::gap_limit;
  else
    result.status = result.gap <= opts.gap_tol ? SolveStatus::optimal
                                               : SolveStatus::gap_limit;
  return result;
}

SolveResult solve_schedule(const Instance& inst, const SolveOptions& opts) {
  if (opts.relax) return solve_relaxed(inst, opts);
  BuildOptions build_opts;
  build_opts.pwl_segments = opts.pwl_segments;
  ScheduleProgram sp = build_program(inst, build_opts);
  return solve_bb(sp, inst, opts);
}

}  // namespace loadshift
