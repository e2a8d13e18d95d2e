#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "loadshift/opt/solve.hpp"

namespace loadshift {

namespace {

struct CellRef {
  int j, s, t;
};

struct Enumerator {
  const Instance& inst;
  const int J, S, T;
  const double dt;

  std::vector<SlotRange> windows;
  std::vector<CellRef> cells;     // all in-window cells, job-major
  std::vector<int> job_first;     // cell index where job j starts
  std::vector<int> values;        // current x per cell
  std::vector<std::vector<int>> occupancy;  // [s][t]

  Plan plan;
  Plan best_plan;
  double best_obj = 0.0;
  bool found = false;
  long long leaves = 0;

  explicit Enumerator(const Instance& instance)
      : inst(instance),
        J(job_count(instance)),
        S(site_count(instance)),
        T(instance.horizon.slots_total),
        dt(instance.horizon.slot_hours),
        plan(J, S, T),
        best_plan(J, S, T) {
    windows.resize(J);
    job_first.assign(J + 1, 0);
    for (int j = 0; j < J; ++j) {
      windows[j] = admissible_window(inst.jobs[j], inst.portfolio.slack);
      windows[j].end = std::min(windows[j].end, T);
      job_first[j] = static_cast<int>(cells.size());
      for (int s = 0; s < S; ++s)
        for (int t = windows[j].begin; t < windows[j].end; ++t)
          cells.push_back({j, s, t});
    }
    job_first[J] = static_cast<int>(cells.size());
    values.assign(cells.size(), 0);
    occupancy.assign(S, std::vector<int>(T, 0));
  }

  int cap(int j, int s) const {
    return std::min(inst.jobs[j].max_cpus, inst.sites[s].cpu_capacity);
  }

  bool job_work_possible(int j) const {
    double lo = 0.0, hi = 0.0;
    for (int k = job_first[j]; k < job_first[j + 1]; ++k) {
      lo += inst.sites[cells[k].s].rate_lo * values[k] * dt;
      hi += inst.sites[cells[k].s].rate_hi * values[k] * dt;
    }
    double w = inst.jobs[j].total_work;
    if (lo > w + 1e-9) return false;
    if (!inst.portfolio.termination && hi < w - 1e-9) return false;
    return true;
  }

  void leaf() {
    ++leaves;
    for (size_t k = 0; k < cells.size(); ++k) {
      plan.x(cells[k].j, cells[k].s, cells[k].t) = values[k];
      plan.c(cells[k].j, cells[k].s, cells[k].t) = 0.0;
    }
    if (!optimize_rates(plan, inst, 0)) return;
    CostBreakdown breakdown = evaluate_plan(plan, inst, 0);
    if (!found || breakdown.net_objective > best_obj + 1e-12) {
      found = true;
      best_obj = breakdown.net_objective;
      best_plan = plan;
    }
  }

  void dfs(size_t idx) {
    for (int j = 0; j < J; ++j)
      if (static_cast<size_t>(job_first[j + 1]) == idx &&
          !job_work_possible(j))
        return;
    if (idx == cells.size()) {
      leaf();
      return;
    }
    const CellRef& cell = cells[idx];
    int room = inst.sites[cell.s].cpu_capacity - occupancy[cell.s][cell.t];
    int max_v = std::min(cap(cell.j, cell.s), room);
    for (int v = 0; v <= max_v; ++v) {
      values[idx] = v;
      occupancy[cell.s][cell.t] += v;
      dfs(idx + 1);
      occupancy[cell.s][cell.t] -= v;
    }
    values[idx] = 0;
  }
};

struct PathEnumerator {
  const Instance& inst;
  const int J, S, T;
  std::vector<std::vector<FixedPath>> options;
  std::vector<int> chosen;
  std::vector<std::vector<int>> occupancy;
  Enumerator grid;  // reused for its leaf evaluation machinery

  explicit PathEnumerator(const Instance& instance)
      : inst(instance),
        J(job_count(instance)),
        S(site_count(instance)),
        T(instance.horizon.slots_total),
        grid(instance) {
    options.resize(J);
    for (int j = 0; j < J; ++j) options[j] = fixed_path_options(inst, j);
    chosen.assign(J, -1);
    occupancy.assign(S, std::vector<int>(T, 0));
  }

  void undo_partial(const FixedPath& p, int upto) {
    for (int t = p.start; t < upto; ++t) occupancy[p.site][t] -= p.level;
  }

  void dfs(int j) {
    if (j == J) {
      std::fill(grid.values.begin(), grid.values.end(), 0);
      for (int jj = 0; jj < J; ++jj) {
        const FixedPath& p = options[jj][chosen[jj]];
        if (p.site < 0) continue;
        SlotRange w = grid.windows[jj];
        for (int t = p.start; t < p.start + p.len; ++t) {
          int k = grid.job_first[jj] + p.site * w.length() + (t - w.begin);
          grid.values[k] = p.level;
        }
      }
      grid.leaf();
      return;
    }
    for (size_t i = 0; i < options[j].size(); ++i) {
      const FixedPath& p = options[j][i];
      bool ok = true;
      if (p.site >= 0) {
        for (int t = p.start; t < p.start + p.len; ++t) {
          if (occupancy[p.site][t] + p.level >
              inst.sites[p.site].cpu_capacity) {
            undo_partial(p, t);
            ok = false;
            break;
          }
          occupancy[p.site][t] += p.level;
        }
      }
      if (!ok) continue;
      chosen[j] = static_cast<int>(i);
      dfs(j + 1);
      chosen[j] = -1;
      if (p.site >= 0) undo_partial(p, p.start + p.len);
    }
  }
};

}  // namespace

double brute_force_log10_points(const Instance& inst) {
  double log_points = 0.0;
  if (inst.portfolio.realloc) {
    for (int j = 0; j < job_count(inst); ++j) {
      SlotRange window = admissible_window(inst.jobs[j], inst.portfolio.slack);
      window.end = std::min(window.end, inst.horizon.slots_total);
      for (int s = 0; s < site_count(inst); ++s) {
        int cap =
            std::min(inst.jobs[j].max_cpus, inst.sites[s].cpu_capacity);
        log_points +=
            std::max(0, window.length()) * std::log10(cap + 1.0);
      }
    }
  } else {
    for (int j = 0; j < job_count(inst); ++j)
      log_points += std::log10(
          static_cast<double>(fixed_path_options(inst, j).size()) + 1.0);
  }
  return log_points;
}

SolveResult brute_force(const Instance& inst, const BruteForceOptions& opts) {
  double log_points = brute_force_log10_points(inst);
  if (log_points > std::log10(opts.max_points))
    throw SearchSpaceError(
        "brute force search space is about 10^" +
        std::to_string(log_points) + " grids, above the cap of " +
        std::to_string(opts.max_points));

  SolveResult result;
  result.ramp_bound = 0.0;
  long long leaves = 0;
  bool found = false;
  Plan best;
  if (inst.portfolio.realloc) {
    Enumerator e(inst);
    e.dfs(0);
    leaves = e.leaves;
    found = e.found;
    if (found) best = e.best_plan;
  } else {
    PathEnumerator pe(inst);
    pe.dfs(0);
    leaves = pe.grid.leaves;
    found = pe.grid.found;
    if (found) best = pe.grid.best_plan;
  }

  result.nodes = leaves;
  if (!found) {
    result.status = SolveStatus::infeasible;
    result.plan =
        Plan(job_count(inst), site_count(inst), inst.horizon.slots_total);
    return result;
  }
  result.status = SolveStatus::optimal;
  result.plan = std::move(best);
  result.breakdown = evaluate_plan(result.plan, inst, 0);
  result.objective = result.breakdown.net_objective;
  result.bound = result.objective;
  result.gap = 0.0;
  return result;
}

}  // namespace loadshift
