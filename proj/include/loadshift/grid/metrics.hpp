#pragma once

#include <string>
#include <vector>

#include "loadshift/grid/case.hpp"
#include "loadshift/grid/powerflow.hpp"

namespace loadshift::grid {

/// Voltage band applied uniformly to every bus.  A magnitude equal to a
/// bound counts as violated: the admissible region is the open interval
/// (v_min, v_max).
struct SecurityOptions {
  double v_min_pu = 0.94;
  double v_max_pu = 1.06;
};

struct ViolationEvent {
  int slot = 0;
  char kind = 'V';     // 'V' bus voltage, 'C' branch overload
  int element = 0;     // bus id or branch position
  double magnitude = 0.0;  // pu exceedance for 'V', MVA over rating for 'C'
};

struct SecurityReport {
  double v_min_pu = 0.0;
  double v_max_pu = 0.0;
  int slots_total = 0;
  int slots_converged = 0;
  int slots_skipped = 0;
  int violation_bus_hours = 0;    // bus-slot pairs outside the band
  int congestion_line_hours = 0;  // branch-slot pairs above rating
  int worst_hour_buses = 0;       // largest single-slot violation count
  double avdi_pct = 0.0;          // mean exceedance over all bus-slot pairs
  double mvdi_pct = 0.0;          // largest exceedance
  std::vector<int> per_slot_bus_violations;  // -1 marks a skipped slot
  std::vector<ViolationEvent> events;
  double generation_cost = 0.0;   // filled by callers that price dispatch
};

/// Evaluates the exposure and severity metrics over the converged slots;
/// non-converged slots are excluded from counts and denominators and
/// recorded in slots_skipped.  Throws StructuralError on an empty input.
SecurityReport security_metrics(const NetworkCase& net,
                                const std::vector<SlotSolution>& slots,
                                const SecurityOptions& options = {});

/// Total dispatch cost over converged slots: sum of each in-service
/// generator's polynomial cost at its dispatched MW, times the slot length.
/// Generators without cost data borrow the polynomial of the explicit-cost
/// generator with the nearest rated capacity when `match_by_capacity` is
/// set, and are an error otherwise.
double generation_cost(const NetworkCase& net,
                       const std::vector<SlotSolution>& slots,
                       double slot_hours, bool match_by_capacity = true);

}  // namespace loadshift::grid
