#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "loadshift/core/plan.hpp"
#include "loadshift/core/types.hpp"
#include "loadshift/econ/costs.hpp"
#include "loadshift/grid/case.hpp"
#include "loadshift/grid/metrics.hpp"
#include "loadshift/grid/powerflow.hpp"
#include "loadshift/opt/solve.hpp"
#include "loadshift/scenario/profiles.hpp"

namespace loadshift::scenario {

/// How to produce a schedule: the first-come-first-served dispatcher or the
/// optimizer under a given control portfolio.
struct SchedulePolicy {
  std::string label;
  bool use_fcfs = false;
  Portfolio portfolio;
};

/// Outcome of scheduling under one policy: the plan plus its exact
/// double-entry cost accounting.
struct PolicyOutcome {
  Plan plan{0, 0, 0};
  CostBreakdown breakdown;
  SolveStatus status = SolveStatus::optimal;
  bool relaxed = false;
  double bound = 0.0;
  long long nodes = 0;
};

PolicyOutcome schedule_with_policy(const Instance& inst,
                                   const SchedulePolicy& policy,
                                   const SolveOptions& opts);

/// One background profile assignment: the named bus follows the template
/// (its case active-power load is replaced by the realized series; reactive
/// power scales with it at constant power factor).
struct BusProfile {
  int bus_id = 0;
  ProfileTemplate profile;
};

/// Everything needed to project scheduled facility power onto a network:
/// the case, the bus hosting each site, background demand profiles, an
/// optional solar series and the power-flow / security settings.
struct GridWiring {
  const grid::NetworkCase* net = nullptr;
  std::vector<int> site_bus_ids;
  std::vector<BusProfile> background;
  ProfileTemplate pv;  // anchor_mw == 0 disables the solar series
  double sigma = 0.0;
  std::uint64_t seed = 0;
  grid::PowerFlowOptions pf;
  grid::SecurityOptions band;
  int threads = 1;
};

/// A concrete draw of the stochastic inputs for one evaluation:
/// per-slot background demand by bus and the solar output series.
struct Realization {
  std::vector<std::vector<double>> background_p_mw;  // [slot][bus], may be empty
  std::vector<double> pv_p_mw;                       // empty when disabled
};

/// Realizes all assigned background profiles and the solar profile for
/// `slots` slots from a single stream.  Buses without an assigned profile
/// keep their case load in every slot.
Realization realize_profiles(const GridWiring& wiring, int slots,
                             double slot_hours, double sigma, Rng& rng);

/// Projects one facility power series [site][slot] onto the network under a
/// realization, runs the power flow for every slot and scores security and
/// generation cost.
grid::SecurityReport evaluate_power_series(const GridWiring& wiring,
                                           const Realization& realization,
                                           const SlotTable& dc_power_mw,
                                           double slot_hours);

/// Which input dimension a Monte Carlo study perturbs: the buses hosting
/// the data centers, or the background demand noise.
enum class McDimension { placement, background };

struct McConfig {
  int trials = 20;
  std::uint64_t seed = 1;
  double sigma = 0.05;
  McDimension dimension = McDimension::background;
  SchedulePolicy baseline;
  SchedulePolicy variant;
  SolveOptions solve;
};

/// One trial's paired evaluation.  `seed` is the derived stream seed that
/// drove this trial's draw, recorded for replay.
struct McTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double baseline_violation_hours = 0.0;
  double variant_violation_hours = 0.0;
  double baseline_avdi_pct = 0.0;
  double variant_avdi_pct = 0.0;
  double baseline_mvdi_pct = 0.0;
  double variant_mvdi_pct = 0.0;
};

/// Distribution summary of a per-trial delta (variant minus baseline) over
/// the successful trials.
struct McSummary {
  double mean = 0.0;
  double q10 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
  double negative_share = 0.0;  // fraction of trials where the variant improves
};

struct McResult {
  std::vector<McTrial> trials;
  int trials_run = 0;
  int trials_ok = 0;
  int trials_failed = 0;
  PolicyOutcome baseline;
  PolicyOutcome variant;
  McSummary delta_violation_hours;
  McSummary delta_avdi;
  McSummary delta_mvdi;
};

/// Paired Monte Carlo: both policies are scheduled once (the schedule does
/// not see the grid draw), then every trial evaluates both power series
/// under the same sampled placement or background realization.  Failed
/// trials (power-flow collapse in every slot, structural errors) are
/// recorded and excluded from the summaries.
McResult run_monte_carlo(const Instance& inst, const GridWiring& wiring,
                         const McConfig& config);

/// Which penalty coefficient a sweep varies.
enum class SweepCoef { rho, eta, phi, gamma };

std::string to_string(SweepCoef coef);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  double realloc_penalty = 0.0;
  double delay_penalty = 0.0;
  double termination_penalty = 0.0;
  double sum_g_mw = 0.0;  // total ramp-tolerance exceedance of the plan
  double ramp_charge = 0.0;
  double objective = 0.0;
};

struct SweepResult {
  SweepCoef coefficient = SweepCoef::gamma;
  std::vector<SweepRow> rows;
  /// Exceedance total with the ramp charge disabled, the no-charge
  /// reference line for gamma sweeps.
  double reference_sum_g_mw = 0.0;
};

/// Re-solves the instance once per coefficient value (values must be
/// nondecreasing and nonempty) and reports penalty totals, exceedance and
/// objective per point.  Per-point failures are flagged, not thrown.
SweepResult sweep_coefficient(const Instance& inst, SweepCoef coef,
                              const std::vector<double>& values,
                              const SchedulePolicy& policy,
                              const SolveOptions& opts);

/// One portfolio's row in a comparison table: the chosen plan's exact
/// accounting, relative savings against the dispatcher baseline and, when
/// wiring is supplied, grid security metrics.
struct CompareRow {
  std::string label;
  SchedulePolicy policy;
  bool ok = false;
  std::string error;
  SolveStatus status = SolveStatus::infeasible;
  bool relaxed = false;
  bool pooled = false;  // a smaller portfolio's plan scored better and was kept
  Plan plan{0, 0, 0};
  CostBreakdown breakdown;
  double delta_elec_pct = 0.0;    // electricity vs baseline, negative = saving
  double delta_revenue_pct = 0.0;
  bool has_grid = false;
  grid::SecurityReport grid;
};

/// The standard comparison ladder: the dispatcher baseline plus the seven
/// nonempty combinations of {termination, slack, reallocation}, coefficients
/// taken from `base`.
std::vector<SchedulePolicy> standard_policies(const Portfolio& base);

/// Solves every policy and picks, per row, the best plan among the row's
/// own solution and every feasible candidate inherited from policies whose
/// enabled levers are a subset of the row's (richer portfolios can always
/// adopt a restricted portfolio's plan, so their achieved objective never
/// trails it).  Grid columns are evaluated under one shared realization.
std::vector<CompareRow> compare_portfolios(const Instance& inst,
                                           const GridWiring* wiring,
                                           const std::vector<SchedulePolicy>& policies,
                                           const SolveOptions& opts);

}  // namespace loadshift::scenario
