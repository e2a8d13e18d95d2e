#pragma once

#include <vector>

#include "loadshift/core/plan.hpp"
#include "loadshift/core/types.hpp"

namespace loadshift {

/// Site-level load (service units) and facility power (MW) per slot,
/// derived from a plan.  L is bounded by each site's max service and P by
/// the PUE-scaled idle/busy range.
struct SitePowerSeries {
  SlotTable load;      // L[s,t], service units
  SlotTable power_mw;  // P[s,t], MW
};

/// Every economic term of the study objective, each evaluated directly from
/// a plan.  Identities: grid_cost = electricity + ramp_charge; qos_total =
/// realloc + delay + termination; net_objective = revenue - grid_cost -
/// qos_total.
struct CostBreakdown {
  double revenue = 0.0;
  double electricity = 0.0;
  double ramp_charge = 0.0;
  double grid_cost = 0.0;
  double realloc_penalty = 0.0;
  double delay_penalty = 0.0;
  double termination_penalty = 0.0;
  double qos_total = 0.0;
  double net_objective = 0.0;
};

/// Aggregate service load per site and slot: L[s,t] = sum_j c[j,s,t].
SlotTable site_load(const Plan& plan);

/// Facility power for one site's load series: P = PUE*P_idle +
/// PUE*(P_busy - P_idle)*L/L_max.  Throws StructuralError when L exceeds the
/// site's max service beyond tolerance.
std::vector<double> site_power(const std::vector<double>& load,
                               const Site& site);

/// Both series for a whole plan.
SitePowerSeries power_series(const Plan& plan, const Instance& inst);

/// Electricity cost: the load-proportional term over the full horizon plus
/// the idle facility draw charged over the original horizon only.
double electricity_cost(const SlotTable& load, const Instance& inst);

/// Service revenue: sum of price * per-job scale * delivered service.
double revenue(const Plan& plan, const Instance& inst);

/// QoS penalty terms evaluated on a plan with the instance's coefficients:
/// reallocation friction rho*sum|x_t - x_{t-1}| (t >= 1), delay charge
/// eta * work delivered inside each job's slack extension, termination
/// charge phi * undelivered work.
struct QosPenalties {
  double realloc = 0.0;
  double delay = 0.0;
  double termination = 0.0;
};
QosPenalties qos_penalties(const Plan& plan, const Instance& inst);

/// Ramp exceedance series g[s][t] = max(0, |P_t - P_{t-1}| - delta_s) for
/// t >= 1 (g[s][0] = 0) and the resulting charge: gamma*sum g^2 (quadratic),
/// gamma*sum g (linear) or 0 (off).
struct RampCharge {
  double charge = 0.0;
  SlotTable exceedance_mw;
};
RampCharge ramp_charge(const SlotTable& power_mw,
                       const std::vector<Site>& sites, double gamma,
                       RampForm form);

/// Full double-entry evaluation of a plan: every term recomputed from
/// scratch.  When `pwl_segments` > 0 and the ramp form is quadratic, the
/// ramp term uses the same piecewise-linear under-approximation as the
/// optimizer so breakdowns are directly comparable; pass 0 for the exact
/// quadratic charge.
CostBreakdown evaluate_plan(const Plan& plan, const Instance& inst,
                            int pwl_segments = 0);

/// Piecewise-linear under-approximation of g^2 used by the optimizer:
/// the upper envelope of tangents at k*(g_max/segments), k = 0..segments.
double pwl_square(double g, double g_max, int segments);

/// Largest possible per-slot facility power swing for a site, the domain
/// width the quadratic ramp linearization covers.
double max_power_swing(const Site& site);

}  // namespace loadshift
