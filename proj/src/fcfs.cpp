#include <algorithm>
#include <numeric>
#include <vector>

#include "loadshift/opt/solve.hpp"

namespace loadshift {

namespace {

struct RunState {
  bool started = false;
  bool finished = false;
  int site = -1;
  int level = 0;
  double delivered = 0.0;
};

double clamp_rate(const Site& site) {
  return std::clamp(1.0, site.rate_lo, site.rate_hi);
}

}  // namespace

Plan fcfs_baseline(const Instance& inst) {
  const int J = job_count(inst);
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  const double dt = inst.horizon.slot_hours;
  Plan plan(J, S, T);
  if (J == 0 || S == 0 || T == 0) return plan;

  std::vector<int> queue_order(J);
  std::iota(queue_order.begin(), queue_order.end(), 0);
  std::stable_sort(queue_order.begin(), queue_order.end(), [&](int a, int b) {
    if (inst.jobs[a].release_slot != inst.jobs[b].release_slot)
      return inst.jobs[a].release_slot < inst.jobs[b].release_slot;
    return a < b;
  });

  std::vector<RunState> state(J);
  std::vector<int> occupancy(S, 0);

  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < J; ++j) {
      RunState& run = state[j];
      if (!run.started || run.finished) continue;
      if (run.delivered >= inst.jobs[j].total_work - 1e-12 ||
          t >= inst.jobs[j].end_slot) {
        run.finished = true;
        occupancy[run.site] -= run.level;
      }
    }

    for (int j : queue_order) {
      RunState& run = state[j];
      const Job& job = inst.jobs[j];
      if (run.started || job.release_slot > t) continue;
      if (t >= job.end_slot) {
        run.finished = true;  // window closed before any capacity freed
        continue;
      }
      int best_site = -1;
      for (int s = 0; s < S; ++s) {
        if (occupancy[s] >= inst.sites[s].cpu_capacity) continue;
        if (best_site < 0 || occupancy[s] < occupancy[best_site])
          best_site = s;
      }
      if (best_site < 0) break;  // every site is full; nothing behind fits
      run.started = true;
      run.site = best_site;
      run.level = std::min(job.max_cpus,
                           inst.sites[best_site].cpu_capacity -
                               occupancy[best_site]);
      occupancy[best_site] += run.level;
    }

    for (int j = 0; j < J; ++j) {
      RunState& run = state[j];
      if (!run.started || run.finished) continue;
      const Site& site = inst.sites[run.site];
      double rate = clamp_rate(site);
      double full = run.level * rate;
      double remaining = inst.jobs[j].total_work - run.delivered;
      double service;
      if (remaining >= full * dt - 1e-12) {
        service = full;
      } else if (remaining / dt >= site.rate_lo * run.level - 1e-12) {
        service = remaining / dt;
      } else {
        // The leftover is too small to deliver above the rate floor;
        // the run stops here and the remainder stays undelivered.
        run.finished = true;
        occupancy[run.site] -= run.level;
        continue;
      }
      plan.x(j, run.site, t) = run.level;
      plan.c(j, run.site, t) = service;
      run.delivered += service * dt;
    }
  }
  return plan;
}

}  // namespace loadshift
