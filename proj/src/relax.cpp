#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "loadshift/opt/simplex.hpp"
#include "loadshift/opt/solve.hpp"

namespace loadshift {

namespace {

double site_power_slope(const Site& site) {
  double l_max = site.max_service();
  return l_max > 0.0 ? site.pue * (site.p_busy_mw - site.p_idle_mw) / l_max
                     : 0.0;
}

struct ActiveCell {
  int j, s, t;
  int level;
};

std::vector<ActiveCell> active_cells(const Plan& plan, const Instance& inst) {
  std::vector<ActiveCell> cells;
  for (int j = 0; j < job_count(inst); ++j)
    for (int s = 0; s < site_count(inst); ++s)
      for (int t = 0; t < inst.horizon.slots_total; ++t)
        if (plan.x(j, s, t) > 0) cells.push_back({j, s, t, plan.x(j, s, t)});
  return cells;
}

/// Exact greedy fill when the objective is linear and separable in c:
/// every active cell starts at its rate floor, then the work budget is
/// spent on cells in descending value order.
bool greedy_rates(Plan& plan, const Instance& inst,
                  const std::vector<ActiveCell>& cells) {
  const Portfolio& pf = inst.portfolio;
  const double dt = inst.horizon.slot_hours;
  for (int j = 0; j < job_count(inst); ++j) {
    std::vector<int> mine;
    double delivered = 0.0;
    for (size_t k = 0; k < cells.size(); ++k) {
      if (cells[k].j != j) continue;
      mine.push_back(static_cast<int>(k));
      double base = inst.sites[cells[k].s].rate_lo * cells[k].level;
      plan.c(j, cells[k].s, cells[k].t) = base;
      delivered += base * dt;
    }
    double budget = inst.jobs[j].total_work - delivered;
    if (budget < -1e-9) return false;
    std::stable_sort(mine.begin(), mine.end(), [&](int a, int b) {
      double va = service_cell_value(inst, j, cells[a].s, cells[a].t);
      double vb = service_cell_value(inst, j, cells[b].s, cells[b].t);
      if (va != vb) return va > vb;
      if (cells[a].s != cells[b].s) return cells[a].s < cells[b].s;
      return cells[a].t < cells[b].t;
    });
    for (int k : mine) {
      if (budget <= 1e-12) break;
      const Site& site = inst.sites[cells[k].s];
      double room = (site.rate_hi - site.rate_lo) * cells[k].level;
      if (room <= 0.0) continue;
      double value = service_cell_value(inst, j, cells[k].s, cells[k].t);
      if (pf.termination && value + pf.phi <= 0.0) break;
      double add = std::min(room, budget / dt);
      plan.c(j, cells[k].s, cells[k].t) += add;
      budget -= add * dt;
    }
    if (!pf.termination && budget > 1e-9) return false;
  }
  return true;
}

/// Joint rate LP when the ramp charge couples sites across jobs.  The
/// quadratic charge is linearized by tangent cuts; with pwl_segments > 0
/// the cuts are the same fixed tangents the mixed-integer program uses,
/// otherwise cuts are added where the linearization is loose until the
/// exact and linearized charges agree.
bool lp_rates(Plan& plan, const Instance& inst,
              const std::vector<ActiveCell>& cells, int pwl_segments) {
  const Portfolio& pf = inst.portfolio;
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  const double dt = inst.horizon.slot_hours;
  const bool quadratic = pf.ramp_form == RampForm::quadratic;

  LpProblem lp;
  auto add_var = [&](double lo, double hi, double cost) {
    lp.lower.push_back(lo);
    lp.upper.push_back(hi);
    lp.cost.push_back(cost);
    return lp.num_vars++;
  };
  std::vector<int> c_id(cells.size());
  for (size_t k = 0; k < cells.size(); ++k) {
    const ActiveCell& cell = cells[k];
    const Site& site = inst.sites[cell.s];
    double value = service_cell_value(inst, cell.j, cell.s, cell.t);
    if (pf.termination) value += pf.phi;
    c_id[k] = add_var(site.rate_lo * cell.level, site.rate_hi * cell.level,
                      -value * dt);
  }
  std::vector<std::vector<int>> load_id(S, std::vector<int>(T));
  std::vector<std::vector<int>> g_id(S, std::vector<int>(T, -1));
  std::vector<std::vector<int>> q_id(S, std::vector<int>(T, -1));
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t)
      load_id[s][t] = add_var(0.0, inst.sites[s].max_service(), 0.0);
    double g_max = max_power_swing(inst.sites[s]);
    for (int t = 1; t < T; ++t) {
      g_id[s][t] = add_var(0.0, g_max, quadratic ? 0.0 : pf.gamma);
      if (quadratic) q_id[s][t] = add_var(0.0, g_max * g_max, pf.gamma);
    }
  }

  for (int j = 0; j < job_count(inst); ++j) {
    LpProblem::Row row;
    row.sense = pf.termination ? RowSense::le : RowSense::eq;
    row.rhs = inst.jobs[j].total_work;
    for (size_t k = 0; k < cells.size(); ++k)
      if (cells[k].j == j) row.terms.emplace_back(c_id[k], dt);
    lp.rows.push_back(std::move(row));
  }
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) {
      LpProblem::Row row;
      row.sense = RowSense::eq;
      row.rhs = 0.0;
      row.terms.emplace_back(load_id[s][t], -1.0);
      for (size_t k = 0; k < cells.size(); ++k)
        if (cells[k].s == s && cells[k].t == t)
          row.terms.emplace_back(c_id[k], 1.0);
      lp.rows.push_back(std::move(row));
    }
  for (int s = 0; s < S; ++s) {
    const Site& site = inst.sites[s];
    double beta = site_power_slope(site);
    for (int t = 1; t < T; ++t) {
      for (int sign : {+1, -1}) {
        LpProblem::Row row;
        row.sense = RowSense::le;
        row.rhs = site.ramp_tolerance_mw;
        row.terms = {{load_id[s][t], sign * beta},
                     {load_id[s][t - 1], -sign * beta},
                     {g_id[s][t], -1.0}};
        lp.rows.push_back(std::move(row));
      }
    }
  }
  auto add_cut = [&](int s, int t, double point) {
    LpProblem::Row row;
    row.sense = RowSense::le;
    row.rhs = point * point;
    row.terms = {{g_id[s][t], 2.0 * point}, {q_id[s][t], -1.0}};
    lp.rows.push_back(std::move(row));
  };
  if (quadratic) {
    for (int s = 0; s < S; ++s) {
      double g_max = max_power_swing(inst.sites[s]);
      int segments = pwl_segments > 0 ? pwl_segments : 1;
      double step = g_max / segments;
      for (int t = 1; t < T; ++t)
        for (int k = 0; k <= (pwl_segments > 0 ? pwl_segments : 0); ++k)
          add_cut(s, t, k * step);
    }
  }

  LpSolution sol;
  const bool refine = quadratic && pwl_segments <= 0;
  for (int round = 0; round < 60; ++round) {
    sol = solve_lp(lp);
    if (sol.status == LpStatus::infeasible) return false;
    if (sol.status != LpStatus::optimal)
      throw StructuralError("rate subproblem LP did not solve");
    if (!refine) break;
    double slack = 0.0;
    for (int s = 0; s < S; ++s) {
      const Site& site = inst.sites[s];
      double beta = site_power_slope(site);
      for (int t = 1; t < T; ++t) {
        double swing = std::abs(beta * (sol.x[load_id[s][t]] -
                                        sol.x[load_id[s][t - 1]]));
        double g = std::max(0.0, swing - site.ramp_tolerance_mw);
        double q = sol.x[q_id[s][t]];
        if (g * g - q > 1e-12) {
          slack += pf.gamma * (g * g - q);
          add_cut(s, t, g);
        }
      }
    }
    if (slack <= 1e-10 * std::max(1.0, std::abs(sol.objective))) break;
  }
  for (size_t k = 0; k < cells.size(); ++k)
    plan.c(cells[k].j, cells[k].s, cells[k].t) = sol.x[c_id[k]];
  return true;
}

}  // namespace

double service_cell_value(const Instance& inst, int j, int s, int t) {
  const Site& site = inst.sites[s];
  double value =
      inst.prices.service.at(s, t) * inst.jobs[j].svc_price_scale -
      inst.prices.electricity.at(s, t) * site_power_slope(site);
  if (delay_window(inst.jobs[j], inst.portfolio.slack).contains(t))
    value -= inst.portfolio.eta;
  return value;
}

std::vector<FixedPath> fixed_path_options(const Instance& inst, int j) {
  std::vector<FixedPath> options;
  const Job& job = inst.jobs[j];
  const Portfolio& pf = inst.portfolio;
  const double dt = inst.horizon.slot_hours;
  SlotRange window = admissible_window(job, pf.slack);
  window.end = std::min(window.end, inst.horizon.slots_total);
  if (pf.termination) options.push_back({});
  for (int s = 0; s < site_count(inst); ++s) {
    int cap = std::min(job.max_cpus, inst.sites[s].cpu_capacity);
    double lo = inst.sites[s].rate_lo;
    double hi = inst.sites[s].rate_hi;
    for (int level = 1; level <= cap; ++level)
      for (int len = 1; len <= window.length(); ++len) {
        double min_work = lo * level * len * dt;
        double max_work = hi * level * len * dt;
        if (min_work > job.total_work + 1e-9) continue;
        if (!pf.termination && max_work < job.total_work - 1e-9) continue;
        for (int start = window.begin; start + len <= window.end; ++start)
          options.push_back({s, level, start, len});
      }
  }
  return options;
}

bool optimize_rates(Plan& plan, const Instance& inst, int pwl_segments) {
  for (int j = 0; j < job_count(inst); ++j)
    for (int s = 0; s < site_count(inst); ++s)
      for (int t = 0; t < inst.horizon.slots_total; ++t)
        plan.c(j, s, t) = 0.0;
  std::vector<ActiveCell> cells = active_cells(plan, inst);
  const bool ramp_active = inst.portfolio.ramp_form != RampForm::off &&
                           inst.portfolio.gamma > 0.0;
  if (!ramp_active) return greedy_rates(plan, inst, cells);
  return lp_rates(plan, inst, cells, pwl_segments);
}

namespace {

/// Myopic value of one fixed path: greedy rate fill over its own cells,
/// a termination charge for undelivered work, and the reallocation charge
/// for the ramp-in and ramp-out of the constant level.  The ramp-charge
/// coupling across jobs is ignored here and repaired by optimize_rates.
double path_value(const Instance& inst, int j, const FixedPath& p) {
  const Portfolio& pf = inst.portfolio;
  const double dt = inst.horizon.slot_hours;
  const Job& job = inst.jobs[j];
  if (p.no_run()) return -pf.phi * job.total_work;

  const Site& site = inst.sites[p.site];
  std::vector<int> slots(p.len);
  for (int i = 0; i < p.len; ++i) slots[i] = p.start + i;
  std::stable_sort(slots.begin(), slots.end(), [&](int a, int b) {
    double va = service_cell_value(inst, j, p.site, a);
    double vb = service_cell_value(inst, j, p.site, b);
    if (va != vb) return va > vb;
    return a < b;
  });
  double base = site.rate_lo * p.level;
  double value = 0.0;
  double delivered = base * dt * p.len;
  for (int t : slots) value += base * service_cell_value(inst, j, p.site, t);
  double budget = job.total_work - delivered;
  for (int t : slots) {
    if (budget <= 1e-12) break;
    double cell = service_cell_value(inst, j, p.site, t);
    if (pf.termination && cell + pf.phi <= 0.0) break;
    double add = std::min((site.rate_hi - site.rate_lo) * p.level,
                          budget / dt);
    value += add * cell;
    delivered += add * dt;
    budget -= add * dt;
  }
  if (pf.termination)
    value -= pf.phi * std::max(0.0, job.total_work - delivered);
  if (p.start >= 1) value -= pf.rho * p.level;
  if (p.start + p.len < inst.horizon.slots_total) value -= pf.rho * p.level;
  return value;
}

SolveResult relax_fixed_paths(const Instance& inst,
                              const SolveOptions& opts) {
  const int J = job_count(inst);
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  SolveResult result;
  result.relaxed = true;
  result.plan = Plan(J, S, T);
  result.bound = kInf;
  result.gap = kInf;

  std::vector<int> order(J);
  for (int j = 0; j < J; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (inst.jobs[a].release_slot != inst.jobs[b].release_slot)
      return inst.jobs[a].release_slot < inst.jobs[b].release_slot;
    return a < b;
  });

  std::vector<std::vector<int>> occupancy(S, std::vector<int>(T, 0));
  for (int j : order) {
    bool have = false;
    FixedPath best;
    double best_value = 0.0;
    for (const FixedPath& p : fixed_path_options(inst, j)) {
      if (!p.no_run()) {
        bool fits = true;
        for (int t = p.start; t < p.start + p.len && fits; ++t)
          if (occupancy[p.site][t] + p.level >
              inst.sites[p.site].cpu_capacity)
            fits = false;
        if (!fits) continue;
      }
      double value = path_value(inst, j, p);
      if (!have || value > best_value + 1e-12) {
        have = true;
        best = p;
        best_value = value;
      }
    }
    if (!have) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    if (!best.no_run()) {
      for (int t = best.start; t < best.start + best.len; ++t) {
        occupancy[best.site][t] += best.level;
        result.plan.x(j, best.site, t) = best.level;
      }
    }
  }

  if (!optimize_rates(result.plan, inst, opts.pwl_segments)) {
    result.status = SolveStatus::infeasible;
    return result;
  }
  result.breakdown = evaluate_plan(result.plan, inst, opts.pwl_segments);
  result.objective = result.breakdown.net_objective;
  result.status = SolveStatus::gap_limit;
  return result;
}

/// Net gain from granting one more CPU to job j at (s, t) when unmet work
/// may be dropped: the recoverable work priced at the cell value plus the
/// avoided termination charge, less the reallocation charge the extra CPU
/// introduces around slot t.
double completion_gain(const Instance& inst, const Plan& plan, int j, int s,
                       int t, double shortfall) {
  const Site& site = inst.sites[s];
  const double dt = inst.horizon.slot_hours;
  double value = service_cell_value(inst, j, s, t) + inst.portfolio.phi;
  int cur = plan.x(j, s, t);
  int ramp = 0;
  if (t >= 1) {
    int prev = plan.x(j, s, t - 1);
    ramp += std::abs(cur + 1 - prev) - std::abs(cur - prev);
  }
  if (t + 1 < inst.horizon.slots_total) {
    int next = plan.x(j, s, t + 1);
    ramp += std::abs(next - cur - 1) - std::abs(next - cur);
  }
  return value * std::min(site.rate_hi * dt, shortfall) -
         inst.portfolio.rho * ramp;
}

SolveResult relax_rounded_lp(const Instance& inst, const SolveOptions& opts) {
  const int J = job_count(inst);
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  const double dt = inst.horizon.slot_hours;
  SolveResult result;
  result.relaxed = true;
  result.plan = Plan(J, S, T);

  ScheduleProgram sp = build_program(inst, {opts.pwl_segments});
  result.ramp_bound = sp.ramp_bound;
  LoweredProgram lowered = lower_program(sp.program);
  LpSolution root = solve_lp(lowered.lp);
  result.lp_iterations = root.iterations;
  if (root.status == LpStatus::infeasible) {
    result.status = SolveStatus::infeasible;
    return result;
  }
  if (root.status != LpStatus::optimal)
    throw StructuralError("relaxation LP did not solve to optimality");
  result.bound = max_space_objective(lowered, root.objective);
  result.nodes = 1;

  std::vector<std::vector<int>> occupancy(S, std::vector<int>(T, 0));
  for (int j = 0; j < J; ++j) {
    SlotRange w = admissible_window(inst.jobs[j], inst.portfolio.slack);
    for (int s = 0; s < S; ++s)
      for (int t = std::max(0, w.begin); t < std::min(w.end, T); ++t) {
        int xi = static_cast<int>(
            std::floor(root.x[sp.map.x(j, s, t)] + 1e-6));
        result.plan.x(j, s, t) = xi;
        occupancy[s][t] += xi;
      }
  }

  const bool term = inst.portfolio.termination;
  for (int j = 0; j < J; ++j) {
    SlotRange w = admissible_window(inst.jobs[j], inst.portfolio.slack);
    w.end = std::min(w.end, T);
    double min_del = 0.0, max_del = 0.0;
    for (int s = 0; s < S; ++s)
      for (int t = w.begin; t < w.end; ++t) {
        min_del += inst.sites[s].rate_lo * result.plan.x(j, s, t) * dt;
        max_del += inst.sites[s].rate_hi * result.plan.x(j, s, t) * dt;
      }
    double work = inst.jobs[j].total_work;
    while (max_del < work - 1e-12) {
      int bs = -1, bt = -1;
      double best_score = 0.0;
      for (int s = 0; s < S; ++s) {
        int cap = std::min(inst.jobs[j].max_cpus,
                           inst.sites[s].cpu_capacity);
        for (int t = w.begin; t < w.end; ++t) {
          if (result.plan.x(j, s, t) >= cap) continue;
          if (occupancy[s][t] >= inst.sites[s].cpu_capacity) continue;
          if (min_del + inst.sites[s].rate_lo * dt > work + 1e-12)
            continue;
          double score = term ? completion_gain(inst, result.plan, j, s, t,
                                                work - max_del)
                              : service_cell_value(inst, j, s, t);
          if (term && score <= 1e-9) continue;
          if (bs < 0 || score > best_score + 1e-12) {
            bs = s;
            bt = t;
            best_score = score;
          }
        }
      }
      if (bs < 0) {
        if (term) break;
        result.status = SolveStatus::infeasible;
        return result;
      }
      result.plan.x(j, bs, bt) += 1;
      occupancy[bs][bt] += 1;
      min_del += inst.sites[bs].rate_lo * dt;
      max_del += inst.sites[bs].rate_hi * dt;
    }
  }

  if (!optimize_rates(result.plan, inst, opts.pwl_segments)) {
    result.status = SolveStatus::infeasible;
    return result;
  }
  result.breakdown = evaluate_plan(result.plan, inst, opts.pwl_segments);
  result.objective = result.breakdown.net_objective;
  double scale = std::max(1.0, std::abs(result.objective));
  result.gap = (result.bound - result.objective) / scale;
  result.status = result.gap <= opts.gap_tol ? SolveStatus::optimal
                                             : SolveStatus::gap_limit;
  return result;
}

}  // namespace

SolveResult solve_relaxed(const Instance& inst, const SolveOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  SolveResult result = inst.portfolio.realloc ? relax_rounded_lp(inst, opts)
                                              : relax_fixed_paths(inst, opts);
  result.relaxed = true;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace loadshift
