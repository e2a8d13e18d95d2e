#include <cmath>
#include <string>

#include "loadshift/core/plan.hpp"

namespace loadshift {

namespace {

std::string cell_detail(const Instance& inst, int j, int s, int t) {
  return "job " + inst.jobs[j].id + ", site " + inst.sites[s].id + ", slot " +
         std::to_string(t);
}

}  // namespace

FeasibilityReport validate_plan(const Plan& plan, const Instance& inst,
                                double tol) {
  const int J = job_count(inst);
  const int S = site_count(inst);
  const int T = inst.horizon.slots_total;
  if (plan.jobs() != J || plan.sites() != S || plan.slots() != T)
    throw StructuralError(
        "plan dimensions (" + std::to_string(plan.jobs()) + " jobs, " +
        std::to_string(plan.sites()) + " sites, " +
        std::to_string(plan.slots()) + " slots) do not match instance (" +
        std::to_string(J) + ", " + std::to_string(S) + ", " +
        std::to_string(T) + ")");

  FeasibilityReport report;
  auto add = [&](const std::string& constraint, int j, int s, int t,
                 double amount, const std::string& detail) {
    report.violations.push_back({constraint, j, s, t, amount, detail});
  };

  for (int j = 0; j < J; ++j) {
    const Job& job = inst.jobs[j];
    SlotRange window = admissible_window(job, inst.portfolio.slack);
    double delivered = 0.0;
    for (int s = 0; s < S; ++s) {
      const Site& site = inst.sites[s];
      for (int t = 0; t < T; ++t) {
        int x = plan.x(j, s, t);
        double c = plan.c(j, s, t);
        if (x < 0)
          add("cpu_nonnegative", j, s, t, -x, cell_detail(inst, j, s, t));
        if (c < -tol)
          add("service_nonnegative", j, s, t, -c, cell_detail(inst, j, s, t));
        if (!window.contains(t) && (x != 0 || c > tol)) {
          add("admissible_window", j, s, t, x != 0 ? x : c,
              cell_detail(inst, j, s, t) + " outside window [" +
                  std::to_string(window.begin) + ", " +
                  std::to_string(window.end) + ")");
        }
        if (x > job.max_cpus)
          add("cpu_cap", j, s, t, x - job.max_cpus,
              cell_detail(inst, j, s, t) + " exceeds max_cpus " +
                  std::to_string(job.max_cpus));
        double lo = site.rate_lo * x;
        double hi = site.rate_hi * x;
        if (c < lo - tol)
          add("service_rate_lb", j, s, t, lo - c, cell_detail(inst, j, s, t));
        if (c > hi + tol)
          add("service_rate_ub", j, s, t, c - hi, cell_detail(inst, j, s, t));
        delivered += c * inst.horizon.slot_hours;
      }
    }
    if (delivered > job.total_work + tol)
      add("work_budget", j, -1, -1, delivered - job.total_work,
          "job " + job.id + " delivered " + std::to_string(delivered) +
              " > budget " + std::to_string(job.total_work));
    if (!inst.portfolio.termination && delivered < job.total_work - tol)
      add("work_budget_equality", j, -1, -1, job.total_work - delivered,
          "job " + job.id + " delivered " + std::to_string(delivered) +
              " < required " + std::to_string(job.total_work) +
              " with termination disabled");
  }

  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < T; ++t) {
      long long used = 0;
      for (int j = 0; j < J; ++j) used += plan.x(j, s, t);
      if (used > inst.sites[s].cpu_capacity)
        add("site_capacity", -1, s, t,
            static_cast<double>(used - inst.sites[s].cpu_capacity),
            "site " + inst.sites[s].id + " uses " + std::to_string(used) +
                " of " + std::to_string(inst.sites[s].cpu_capacity) +
                " CPUs at slot " + std::to_string(t));
    }
  }
  return report;
}

}  // namespace loadshift
