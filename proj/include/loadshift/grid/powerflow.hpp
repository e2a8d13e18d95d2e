#pragma once

#include <vector>

#include "loadshift/core/types.hpp"
#include "loadshift/grid/case.hpp"

namespace loadshift::grid {

struct PowerFlowOptions {
  double tolerance_pu = 1e-8;
  int max_iterations = 20;
};

/// Absolute operating point for one slot, layered over a NetworkCase:
/// loads per bus (same order as case.buses) and active dispatch per
/// generator (same order as case.generators).  Generators on PV or slack
/// buses hold their voltage setpoints; a generator on a PQ bus acts as a
/// fixed P/Q injection.
struct SlotInjections {
  std::vector<double> p_load_mw;
  std::vector<double> q_load_mvar;
  std::vector<double> gen_p_mw;
};

/// The case's own loads and dispatch as a single-slot operating point.
SlotInjections base_injections(const NetworkCase& net);

struct SlotSolution {
  bool converged = false;
  int iterations = 0;
  double max_mismatch_pu = 0.0;
  std::vector<double> v_mag_pu;        // per bus
  std::vector<double> v_ang_rad;       // per bus
  std::vector<double> flow_from_mva;   // per branch, 0 when out of service
  std::vector<double> flow_to_mva;
  std::vector<double> gen_p_mw;        // per generator, slack residual included
  std::vector<double> gen_q_mvar;
  double total_load_mw = 0.0;
  double total_gen_mw = 0.0;
  double loss_mw = 0.0;

  /// Loading used against thermal ratings: the larger of the two ends.
  double branch_loading_mva(int branch) const;
};

/// Newton-Raphson power flow in polar coordinates from a flat start
/// (1.0 pu, 0 rad, generator-controlled buses at their setpoints).
/// Non-convergence is reported in the returned record, never thrown.
SlotSolution ac_power_flow(const NetworkCase& net, const SlotInjections& slot,
                           const PowerFlowOptions& options = {});

/// Per-slot operating points for a whole study horizon: bus active load is
/// the background series value plus the mapped data-center power (unity
/// power factor, so Q gains nothing from the DC part), bus reactive load
/// scales with the background factor to preserve the power factor, and
/// every in-service generator on a PQ bus follows the PV series capped by
/// its rating.  Empty background, DC, or PV inputs leave the corresponding
/// case values unchanged.
std::vector<SlotInjections> build_timeseries_case(
    const NetworkCase& net,
    const SlotTable& dc_power_mw,               // [site][slot]
    const std::vector<int>& site_bus_ids,       // site -> bus id
    const std::vector<std::vector<double>>& background_p_mw,  // [slot][bus]
    const std::vector<double>& pv_p_mw);        // [slot]

/// Solves every slot independently.  With `threads` > 1 the slots are
/// partitioned across worker threads; results are written by slot index so
/// the output is identical to the sequential run.
std::vector<SlotSolution> solve_series(const NetworkCase& net,
                                       const std::vector<SlotInjections>& slots,
                                       const PowerFlowOptions& options = {},
                                       int threads = 1);

}  // namespace loadshift::grid
