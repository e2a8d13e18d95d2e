#pragma once

#include <string>
#include <vector>

namespace loadshift {

/// Discretization of the planning horizon.  Slots are half-open intervals of
/// `slot_hours` wall-clock hours, indexed 0..slots_total-1.  The first
/// `slots_original` slots form the original horizon; the remainder is the
/// slack extension used by deadline-relaxation portfolios.
struct Horizon {
  int slots_original = 0;
  int slots_total = 0;
  double slot_hours = 1.0;
};

/// One batch job.  Slots are half-open: the job may run in t with
/// release_slot <= t < end_slot (plus up to slack_slots more when deadline
/// slack is enabled).  `total_work` is in CPU-hour-equivalent service units,
/// `max_cpus` caps the per-slot integer CPU allocation.
struct Job {
  std::string id;
  int release_slot = 0;
  int end_slot = 0;
  int max_cpus = 1;
  int slack_slots = 0;
  double total_work = 0.0;
  double svc_price_scale = 1.0;
};

/// One data-center site.  Service rates are per allocated CPU and hour:
/// an allocation of x CPUs must deliver between rate_lo*x and rate_hi*x
/// service units per hour.  Power draw interpolates linearly between
/// p_idle_mw and p_busy_mw with utilization, scaled by pue.
struct Site {
  std::string id;
  std::string zone;
  int cpu_capacity = 0;
  double rate_lo = 0.5;
  double rate_hi = 2.0;
  double p_idle_mw = 0.0;
  double p_busy_mw = 0.0;
  double pue = 1.0;
  double ramp_tolerance_mw = 0.0;
  int bus_id = 0;

  /// Largest deliverable service level (utilization 1.0 maps here).
  double max_service() const { return rate_hi * cpu_capacity; }
};

/// Dense row-major table indexed [site_or_zone][slot].
struct SlotTable {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  SlotTable() = default;
  SlotTable(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
};

/// Per-site price inputs over the full horizon.  Electricity is $/MWh at the
/// site's settlement zone; service is the $/CPU-hour reference rate before
/// per-job scaling.
struct PriceTable {
  SlotTable electricity;
  SlotTable service;
};

/// Shape of the optional power-ramping charge.
enum class RampForm { off, linear, quadratic };

/// Which control levers are enabled and the coefficients attached to them.
/// Penalty coefficients are ignored when the matching lever is disabled.
struct Portfolio {
  bool slack = false;
  bool realloc = false;
  bool termination = false;
  double rho = 1.0;     // $ per unit of CPU reallocation
  double eta = 5.0;     // $ per CPU-hour delivered inside the slack window
  double phi = 10.0;    // $ per CPU-hour of undelivered work
  double gamma = 0.0;   // ramp charge coefficient ($/MW or $/MW^2)
  RampForm ramp_form = RampForm::off;
};

/// A complete scheduling problem: horizon, jobs, sites, prices and the
/// active control portfolio.
struct Instance {
  Horizon horizon;
  std::vector<Job> jobs;
  std::vector<Site> sites;
  PriceTable prices;
  Portfolio portfolio;
};

inline int job_count(const Instance& inst) {
  return static_cast<int>(inst.jobs.size());
}
inline int site_count(const Instance& inst) {
  return static_cast<int>(inst.sites.size());
}

}  // namespace loadshift
