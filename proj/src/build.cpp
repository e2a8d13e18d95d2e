#include <algorithm>
#include <cmath>
#include <string>

#include "loadshift/opt/solve.hpp"

namespace loadshift {

namespace {

std::string idx3(const char* base, int j, int s, int t) {
  return std::string(base) + "_" + std::to_string(j) + "_" +
         std::to_string(s) + "_" + std::to_string(t);
}

std::string idx2(const char* base, int a, int b) {
  return std::string(base) + "_" + std::to_string(a) + "_" +
         std::to_string(b);
}

}  // namespace

ScheduleProgram build_program(const Instance& inst, const BuildOptions& opts) {
  const int J = job_count(inst);
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  const double dt = inst.horizon.slot_hours;
  const Portfolio& pf = inst.portfolio;
  const bool ramp_active = pf.ramp_form != RampForm::off && pf.gamma > 0.0;

  ScheduleProgram sp;
  MathProgram& prog = sp.program;
  VariableMap& map = sp.map;
  map.jobs = J;
  map.sites = S;
  map.slots = T;
  size_t grid = static_cast<size_t>(J) * S * T;
  map.x_id.assign(grid, -1);
  map.c_id.assign(grid, -1);
  map.r_id.assign(grid, -1);
  map.load_id.assign(static_cast<size_t>(S) * T, -1);
  map.g_id.assign(static_cast<size_t>(S) * T, -1);

  std::vector<SlotRange> windows(J);
  std::vector<SlotRange> delays(J);
  for (int j = 0; j < J; ++j) {
    windows[j] = admissible_window(inst.jobs[j], pf.slack);
    windows[j].end = std::min(windows[j].end, T);
    delays[j] = delay_window(inst.jobs[j], pf.slack);
    delays[j].end = std::min(delays[j].end, T);
  }

  auto x_cap = [&](int j, int s) {
    return std::min(inst.jobs[j].max_cpus, inst.sites[s].cpu_capacity);
  };

  // Allocation and service-rate variables over the full grid; cells outside
  // the admissible window are fixed at zero.
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t) {
        bool in = windows[j].contains(t);
        double ub = in ? x_cap(j, s) : 0.0;
        map.x(j, s, t) =
            prog.add_variable(idx3("x", j, s, t), VarKind::integer, 0.0, ub);
      }
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t) {
        bool in = windows[j].contains(t);
        double ub = in ? inst.sites[s].rate_hi * x_cap(j, s) : 0.0;
        map.c(j, s, t) = prog.add_variable(idx3("c", j, s, t),
                                           VarKind::continuous, 0.0, ub);
      }

  // Reallocation magnitudes r >= |x_t - x_{t-1}|, covering the entry jump
  // and the drop after the window closes.
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s) {
      int begin = std::max(1, windows[j].begin);
      int end = std::min(windows[j].end + 1, T);
      for (int t = begin; t < end; ++t)
        map.r(j, s, t) = prog.add_variable(
            idx3("r", j, s, t), VarKind::continuous, 0.0, x_cap(j, s));
    }

  if (ramp_active) {
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t)
        map.load_id[map.flat(s, t)] =
            prog.add_variable(idx2("L", s, t), VarKind::continuous, 0.0,
                              inst.sites[s].max_service());
    for (int s = 0; s < S; ++s)
      for (int t = 1; t < T; ++t)
        map.g_id[map.flat(s, t)] =
            prog.add_variable(idx2("g", s, t), VarKind::continuous, 0.0,
                              max_power_swing(inst.sites[s]));
  }

  // Fixed-allocation-path auxiliaries (reallocation disabled): one site
  // (psite), one contiguous run (prun/pstart) at one constant integer level
  // (plvl, linearized into plev).
  std::vector<std::vector<int>> psite(J), prun(J), pstart(J), plev(J);
  std::vector<int> plvl(J, -1);
  if (!pf.realloc) {
    for (int j = 0; j < J; ++j) {
      int max_cap = 0;
      for (int s = 0; s < S; ++s) max_cap = std::max(max_cap, x_cap(j, s));
      psite[j].assign(S, -1);
      for (int s = 0; s < S; ++s)
        psite[j][s] = prog.add_variable("psite_" + std::to_string(j) + "_" +
                                            std::to_string(s),
                                        VarKind::integer, 0.0, 1.0);
      int len = windows[j].length();
      prun[j].assign(std::max(len, 0), -1);
      pstart[j].assign(std::max(len, 0), -1);
      plev[j].assign(std::max(len, 0), -1);
      for (int k = 0; k < len; ++k) {
        int t = windows[j].begin + k;
        prun[j][k] = prog.add_variable(idx2("prun", j, t), VarKind::integer,
                                       0.0, 1.0);
        pstart[j][k] = prog.add_variable(idx2("pstart", j, t),
                                         VarKind::continuous, 0.0, 1.0);
        plev[j][k] = prog.add_variable(idx2("plev", j, t),
                                       VarKind::continuous, 0.0, max_cap);
      }
      plvl[j] = prog.add_variable("plvl_" + std::to_string(j),
                                  VarKind::integer, std::min(1, max_cap),
                                  max_cap);
    }
  }

  // Service-rate coupling to the allocation.
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s) {
      double lo = inst.sites[s].rate_lo;
      double hi = inst.sites[s].rate_hi;
      for (int t = windows[j].begin; t < windows[j].end; ++t) {
        if (lo > 0.0)
          prog.add_row(idx3("rate_lb", j, s, t), RowSense::le, 0.0,
                       {{map.x(j, s, t), lo}, {map.c(j, s, t), -1.0}});
        prog.add_row(idx3("rate_ub", j, s, t), RowSense::le, 0.0,
                     {{map.c(j, s, t), 1.0}, {map.x(j, s, t), -hi}});
      }
    }

  // Work budgets: equality unless termination may leave work undelivered.
  for (int j = 0; j < J; ++j) {
    std::vector<std::pair<int, double>> terms;
    for (int s = 0; s < S; ++s)
      for (int t = windows[j].begin; t < windows[j].end; ++t)
        terms.emplace_back(map.c(j, s, t), dt);
    prog.add_row("work_" + std::to_string(j),
                 pf.termination ? RowSense::le : RowSense::eq,
                 inst.jobs[j].total_work, std::move(terms));
  }

  // Site CPU capacity per slot.
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < T; ++t) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < J; ++j)
        if (windows[j].contains(t)) terms.emplace_back(map.x(j, s, t), 1.0);
      if (terms.empty()) continue;
      prog.add_row(idx2("cap", s, t), RowSense::le,
                   inst.sites[s].cpu_capacity, std::move(terms));
    }

  // Reallocation linearization r >= +-(x_t - x_{t-1}).
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t) {
        int r = map.r(j, s, t);
        if (r < 0) continue;
        std::vector<std::pair<int, double>> up{{r, -1.0}};
        std::vector<std::pair<int, double>> dn{{r, -1.0}};
        if (windows[j].contains(t)) {
          up.emplace_back(map.x(j, s, t), 1.0);
          dn.emplace_back(map.x(j, s, t), -1.0);
        }
        if (windows[j].contains(t - 1)) {
          up.emplace_back(map.x(j, s, t - 1), -1.0);
          dn.emplace_back(map.x(j, s, t - 1), 1.0);
        }
        prog.add_row(idx3("realloc_up", j, s, t), RowSense::le, 0.0,
                     std::move(up));
        prog.add_row(idx3("realloc_dn", j, s, t), RowSense::le, 0.0,
                     std::move(dn));
      }

  if (ramp_active) {
    for (int s = 0; s < S; ++s) {
      const Site& site = inst.sites[s];
      double l_max = site.max_service();
      double beta =
          l_max > 0.0 ? site.pue * (site.p_busy_mw - site.p_idle_mw) / l_max
                      : 0.0;
      for (int t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> terms{
            {map.load_id[map.flat(s, t)], -1.0}};
        for (int j = 0; j < J; ++j)
          if (windows[j].contains(t)) terms.emplace_back(map.c(j, s, t), 1.0);
        prog.add_row(idx2("load_def", s, t), RowSense::eq, 0.0,
                     std::move(terms));
      }
      for (int t = 1; t < T; ++t) {
        int g = map.g_id[map.flat(s, t)];
        int l_now = map.load_id[map.flat(s, t)];
        int l_prev = map.load_id[map.flat(s, t - 1)];
        prog.add_row(idx2("ramp_up", s, t), RowSense::le,
                     site.ramp_tolerance_mw,
                     {{l_now, beta}, {l_prev, -beta}, {g, -1.0}});
        prog.add_row(idx2("ramp_dn", s, t), RowSense::le,
                     site.ramp_tolerance_mw,
                     {{l_prev, beta}, {l_now, -beta}, {g, -1.0}});
      }
    }
  }

  if (!pf.realloc) {
    for (int j = 0; j < J; ++j) {
      int len = windows[j].length();
      if (len <= 0) continue;
      int max_cap = 0;
      for (int s = 0; s < S; ++s) max_cap = std::max(max_cap, x_cap(j, s));

      std::vector<std::pair<int, double>> one_site;
      for (int s = 0; s < S; ++s) {
        one_site.emplace_back(psite[j][s], 1.0);
        for (int t = windows[j].begin; t < windows[j].end; ++t)
          prog.add_row(idx3("path_site", j, s, t), RowSense::le, 0.0,
                       {{map.x(j, s, t), 1.0},
                        {psite[j][s], -static_cast<double>(x_cap(j, s))}});
      }
      prog.add_row("path_one_site_" + std::to_string(j), RowSense::le, 1.0,
                   std::move(one_site));

      std::vector<std::pair<int, double>> starts;
      for (int k = 0; k < len; ++k) {
        int t = windows[j].begin + k;
        // Level linking: sum_s x = plev, plev = plvl*prun linearized.
        std::vector<std::pair<int, double>> link{{plev[j][k], -1.0}};
        for (int s = 0; s < S; ++s) link.emplace_back(map.x(j, s, t), 1.0);
        prog.add_row(idx2("path_level", j, t), RowSense::eq, 0.0,
                     std::move(link));
        prog.add_row(idx2("path_lev_ub1", j, t), RowSense::le, 0.0,
                     {{plev[j][k], 1.0}, {plvl[j], -1.0}});
        prog.add_row(idx2("path_lev_ub2", j, t), RowSense::le, 0.0,
                     {{plev[j][k], 1.0},
                      {prun[j][k], -static_cast<double>(max_cap)}});
        prog.add_row(idx2("path_lev_lb", j, t), RowSense::le, max_cap,
                     {{plvl[j], 1.0},
                      {prun[j][k], static_cast<double>(max_cap)},
                      {plev[j][k], -1.0}});
        // Contiguity: a run may start at most once.
        std::vector<std::pair<int, double>> start{{prun[j][k], 1.0},
                                                  {pstart[j][k], -1.0}};
        if (k > 0) start.emplace_back(prun[j][k - 1], -1.0);
        prog.add_row(idx2("path_start", j, t), RowSense::le, 0.0,
                     std::move(start));
        starts.emplace_back(pstart[j][k], 1.0);
      }
      prog.add_row("path_one_run_" + std::to_string(j), RowSense::le, 1.0,
                   std::move(starts));
    }
  }

  // Objective: revenue minus electricity, reallocation friction, delayed
  // delivery and undelivered work; optional ramp charge on g.
  double constant = 0.0;
  for (int s = 0; s < S; ++s) {
    const Site& site = inst.sites[s];
    for (int t = 0; t < inst.horizon.slots_original; ++t)
      constant -=
          inst.prices.electricity.at(s, t) * site.pue * site.p_idle_mw * dt;
  }
  for (int j = 0; j < J; ++j) {
    const Job& job = inst.jobs[j];
    if (pf.termination) constant -= pf.phi * job.total_work;
    for (int s = 0; s < S; ++s) {
      const Site& site = inst.sites[s];
      double l_max = site.max_service();
      double slope =
          l_max > 0.0 ? site.pue * (site.p_busy_mw - site.p_idle_mw) / l_max
                      : 0.0;
      for (int t = windows[j].begin; t < windows[j].end; ++t) {
        double coeff = inst.prices.service.at(s, t) * job.svc_price_scale * dt -
                       inst.prices.electricity.at(s, t) * slope * dt;
        if (delays[j].contains(t)) coeff -= pf.eta * dt;
        if (pf.termination) coeff += pf.phi * dt;
        prog.objective[map.c(j, s, t)] = coeff;
        int r = map.r(j, s, t);
        if (r >= 0) prog.objective[r] = -pf.rho;
      }
      // The drop after the window's last slot is still a reallocation.
      int tail = windows[j].end;
      if (tail < T && tail >= 1) {
        int r = map.r(j, s, tail);
        if (r >= 0) prog.objective[r] = -pf.rho;
      }
    }
  }
  prog.objective_constant = constant;

  if (ramp_active) {
    for (int s = 0; s < S; ++s) {
      double g_max = max_power_swing(inst.sites[s]);
      for (int t = 1; t < T; ++t) {
        int g = map.g_id[map.flat(s, t)];
        if (pf.ramp_form == RampForm::linear) {
          prog.objective[g] = -pf.gamma;
        } else {
          PwlCost pwl;
          pwl.var = g;
          pwl.weight = pf.gamma;
          int segments = std::max(1, opts.pwl_segments);
          double h = g_max / segments;
          if (g_max <= 0.0) {
            pwl.segments.emplace_back(0.0, 0.0);
          } else {
            for (int k = 0; k <= segments; ++k) {
              double point = k * h;
              pwl.segments.emplace_back(2.0 * point, -point * point);
            }
            sp.ramp_bound += pf.gamma * h * h / 4.0;
          }
          prog.pwl_costs.push_back(std::move(pwl));
        }
      }
    }
  }

  prog.check_well_formed();
  return sp;
}

}  // namespace loadshift
