#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#include "loadshift/core/errors.hpp"
#include "loadshift/core/types.hpp"

namespace loadshift {

/// Half-open slot interval [begin, end).
struct SlotRange {
  int begin = 0;
  int end = 0;
  bool contains(int t) const { return t >= begin && t < end; }
  int length() const { return end - begin; }
  bool empty() const { return end <= begin; }
};

/// Slots where the job may be allocated resources.  With deadline slack
/// enabled the window extends past the nominal end by the job's slack
/// allowance; otherwise it is exactly [release, end).
inline SlotRange admissible_window(const Job& job, bool slack_enabled) {
  return {job.release_slot,
          slack_enabled ? job.end_slot + job.slack_slots : job.end_slot};
}

/// Slots past the nominal deadline where delivered work incurs the delay
/// penalty.  Empty when slack is disabled.
inline SlotRange delay_window(const Job& job, bool slack_enabled) {
  return {job.end_slot,
          slack_enabled ? job.end_slot + job.slack_slots : job.end_slot};
}

/// A concrete schedule: integer CPU allocations x and continuous service
/// rates c, both indexed (job, site, slot) over the full extended horizon.
class Plan {
 public:
  Plan() = default;
  Plan(int jobs, int sites, int slots)
      : jobs_(jobs),
        sites_(sites),
        slots_(slots),
        x_(static_cast<size_t>(jobs) * sites * slots, 0),
        c_(static_cast<size_t>(jobs) * sites * slots, 0.0) {}

  int jobs() const { return jobs_; }
  int sites() const { return sites_; }
  int slots() const { return slots_; }

  int x(int j, int s, int t) const { return x_[idx(j, s, t)]; }
  int& x(int j, int s, int t) { return x_[idx(j, s, t)]; }
  double c(int j, int s, int t) const { return c_[idx(j, s, t)]; }
  double& c(int j, int s, int t) { return c_[idx(j, s, t)]; }

  /// CPU reallocation magnitude |x_t - x_{t-1}| for t >= 1, the quantity the
  /// reallocation penalty charges.
  int realloc_amount(int j, int s, int t) const {
    return t == 0 ? 0 : std::abs(x(j, s, t) - x(j, s, t - 1));
  }

  /// Service delivered for a job over its lifetime, in CPU-hour units.
  double delivered_work(int j, double slot_hours) const {
    double total = 0.0;
    for (int s = 0; s < sites_; ++s)
      for (int t = 0; t < slots_; ++t) total += c(j, s, t) * slot_hours;
    return total;
  }

  bool same_shape(const Plan& other) const {
    return jobs_ == other.jobs_ && sites_ == other.sites_ &&
           slots_ == other.slots_;
  }

 private:
  size_t idx(int j, int s, int t) const {
    return (static_cast<size_t>(j) * sites_ + s) * slots_ + t;
  }

  int jobs_ = 0;
  int sites_ = 0;
  int slots_ = 0;
  std::vector<int> x_;
  std::vector<double> c_;
};

/// One violated constraint found by plan validation.
struct Violation {
  std::string constraint;  // stable identifier, e.g. "service_rate_ub"
  int job = -1;            // -1 when not job-specific
  int site = -1;
  int slot = -1;
  double amount = 0.0;  // magnitude of the violation in constraint units
  std::string detail;
};

/// Outcome of checking a plan against an instance.  An empty violation list
/// means the plan is feasible at the checked tolerance.
struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

/// Checks every scheduling constraint the optimizer must honor: allocation
/// only inside admissible windows, service-rate bounds per allocated CPU,
/// work budgets (equality unless termination is enabled), site CPU
/// capacities and integrality of x.  Throws StructuralError when the plan
/// and instance dimensions disagree.  `tol` absorbs floating-point noise on
/// the continuous constraints.
FeasibilityReport validate_plan(const Plan& plan, const Instance& inst,
                                double tol = 1e-6);

}  // namespace loadshift
