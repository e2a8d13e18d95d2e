#include "loadshift/scenario/study.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loadshift/core/errors.hpp"

namespace loadshift::scenario {

namespace {

Instance with_portfolio(const Instance& inst, const Portfolio& portfolio) {
  Instance out = inst;
  out.portfolio = portfolio;
  return out;
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  double pos = p * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

McSummary summarize(std::vector<double> deltas) {
  McSummary s;
  if (deltas.empty()) return s;
  double total = 0.0;
  int negative = 0;
  for (double d : deltas) {
    total += d;
    if (d < 0.0) ++negative;
  }
  std::sort(deltas.begin(), deltas.end());
  s.mean = total / static_cast<double>(deltas.size());
  s.q10 = quantile(deltas, 0.10);
  s.q25 = quantile(deltas, 0.25);
  s.median = quantile(deltas, 0.50);
  s.q75 = quantile(deltas, 0.75);
  s.q90 = quantile(deltas, 0.90);
  s.negative_share =
      static_cast<double>(negative) / static_cast<double>(deltas.size());
  return s;
}

double exceedance_total(const Plan& plan, const Instance& inst) {
  SitePowerSeries series = power_series(plan, inst);
  RampCharge rc =
      ramp_charge(series.power_mw, inst.sites, 1.0, RampForm::quadratic);
  double total = 0.0;
  for (double g : rc.exceedance_mw.data) total += g;
  return total;
}

/// True when every lever enabled in `a` is also enabled in `b`.
bool portfolio_subset(const Portfolio& a, const Portfolio& b) {
  return (!a.slack || b.slack) && (!a.realloc || b.realloc) &&
         (!a.termination || b.termination);
}

}  // namespace

PolicyOutcome schedule_with_policy(const Instance& inst,
                                   const SchedulePolicy& policy,
                                   const SolveOptions& opts) {
  Instance scoped = with_portfolio(inst, policy.portfolio);
  PolicyOutcome out;
  if (policy.use_fcfs) {
    out.plan = fcfs_baseline(scoped);
    out.breakdown = evaluate_plan(out.plan, scoped, 0);
    out.status = SolveStatus::optimal;
    out.relaxed = false;
    out.bound = out.breakdown.net_objective;
    out.nodes = 0;
    return out;
  }
  SolveResult result = solve_schedule(scoped, opts);
  if (result.status == SolveStatus::infeasible)
    throw StructuralError("schedule_with_policy: instance is infeasible");
  out.plan = result.plan;
  out.breakdown = evaluate_plan(result.plan, scoped, 0);
  out.status = result.status;
  out.relaxed = result.relaxed;
  out.bound = result.bound;
  out.nodes = result.nodes;
  return out;
}

Realization realize_profiles(const GridWiring& wiring, int slots,
                             double slot_hours, double sigma, Rng& rng) {
  if (wiring.net == nullptr)
    throw ConfigError("realize_profiles: wiring has no network case");
  if (slots <= 0) throw ConfigError("realize_profiles: slots must be positive");

  Realization out;
  const auto& buses = wiring.net->buses;
  if (!wiring.background.empty()) {
    out.background_p_mw.assign(static_cast<size_t>(slots),
                               std::vector<double>(buses.size(), 0.0));
    for (size_t b = 0; b < buses.size(); ++b)
      for (int t = 0; t < slots; ++t)
        out.background_p_mw[static_cast<size_t>(t)][b] = buses[b].p_load_mw;
    for (const auto& assignment : wiring.background) {
      int idx = wiring.net->bus_index(assignment.bus_id);
      if (idx < 0)
        throw StructuralError("background profile names unknown bus " +
                              std::to_string(assignment.bus_id));
      std::vector<double> series = realize_series(assignment.profile, slots,
                                                  sigma, rng, slot_hours);
      for (int t = 0; t < slots; ++t)
        out.background_p_mw[static_cast<size_t>(t)][static_cast<size_t>(idx)] =
            series[static_cast<size_t>(t)];
    }
  }
  if (wiring.pv.anchor_mw > 0.0)
    out.pv_p_mw = realize_series(wiring.pv, slots, sigma, rng, slot_hours);
  return out;
}

grid::SecurityReport evaluate_power_series(const GridWiring& wiring,
                                           const Realization& realization,
                                           const SlotTable& dc_power_mw,
                                           double slot_hours) {
  if (wiring.net == nullptr)
    throw ConfigError("evaluate_power_series: wiring has no network case");
  auto slots = grid::build_timeseries_case(*wiring.net, dc_power_mw,
                                           wiring.site_bus_ids,
                                           realization.background_p_mw,
                                           realization.pv_p_mw);
  auto solutions =
      grid::solve_series(*wiring.net, slots, wiring.pf, wiring.threads);
  grid::SecurityReport report =
      grid::security_metrics(*wiring.net, solutions, wiring.band);
  if (report.slots_converged > 0)
    report.generation_cost =
        grid::generation_cost(*wiring.net, solutions, slot_hours);
  return report;
}

McResult run_monte_carlo(const Instance& inst, const GridWiring& wiring,
                         const McConfig& config) {
  if (config.trials <= 0)
    throw ConfigError("run_monte_carlo: trials must be positive");
  if (wiring.net == nullptr)
    throw ConfigError("run_monte_carlo: wiring has no network case");

  McResult res;
  res.baseline = schedule_with_policy(inst, config.baseline, config.solve);
  res.variant = schedule_with_policy(inst, config.variant, config.solve);
  SlotTable baseline_power = power_series(res.baseline.plan, inst).power_mw;
  SlotTable variant_power = power_series(res.variant.plan, inst).power_mw;

  int slots = inst.horizon.slots_total;
  double slot_hours = inst.horizon.slot_hours;
  std::vector<double> d_hours, d_avdi, d_mvdi;
  for (int m = 0; m < config.trials; ++m) {
    McTrial trial;
    trial.trial = m;
    std::uint64_t background_stream =
        config.dimension == McDimension::background ? 2 * static_cast<std::uint64_t>(m)
                                                    : 0;
    std::uint64_t placement_stream = 2 * static_cast<std::uint64_t>(m) + 1;
    trial.seed = Rng::derive(config.seed,
                             config.dimension == McDimension::background
                                 ? background_stream
                                 : placement_stream);
    try {
      GridWiring draw = wiring;
      if (config.dimension == McDimension::placement)
        draw.site_bus_ids = sample_placement(
            *wiring.net, static_cast<int>(inst.sites.size()),
            Rng::derive(config.seed, placement_stream));
      Rng rng = Rng::stream(config.seed, background_stream);
      Realization realization =
          realize_profiles(draw, slots, slot_hours, config.sigma, rng);
      grid::SecurityReport base =
          evaluate_power_series(draw, realization, baseline_power, slot_hours);
      grid::SecurityReport var =
          evaluate_power_series(draw, realization, variant_power, slot_hours);
      if (base.slots_converged == 0 || var.slots_converged == 0)
        throw StructuralError("power flow failed to converge in every slot");
      trial.baseline_violation_hours = base.violation_bus_hours;
      trial.variant_violation_hours = var.violation_bus_hours;
      trial.baseline_avdi_pct = base.avdi_pct;
      trial.variant_avdi_pct = var.avdi_pct;
      trial.baseline_mvdi_pct = base.mvdi_pct;
      trial.variant_mvdi_pct = var.mvdi_pct;
      trial.ok = true;
      d_hours.push_back(trial.variant_violation_hours -
                        trial.baseline_violation_hours);
      d_avdi.push_back(trial.variant_avdi_pct - trial.baseline_avdi_pct);
      d_mvdi.push_back(trial.variant_mvdi_pct - trial.baseline_mvdi_pct);
    } catch (const std::exception& e) {
      trial.ok = false;
      trial.error = e.what();
    }
    res.trials.push_back(std::move(trial));
  }
  res.trials_run = config.trials;
  for (const auto& t : res.trials) (t.ok ? res.trials_ok : res.trials_failed)++;
  res.delta_violation_hours = summarize(std::move(d_hours));
  res.delta_avdi = summarize(std::move(d_avdi));
  res.delta_mvdi = summarize(std::move(d_mvdi));
  return res;
}

std::string to_string(SweepCoef coef) {
  switch (coef) {
    case SweepCoef::rho: return "rho";
    case SweepCoef::eta: return "eta";
    case SweepCoef::phi: return "phi";
    case SweepCoef::gamma: return "gamma";
  }
  return "?";
}

namespace {

void apply_coefficient(Portfolio& portfolio, SweepCoef coef, double value) {
  switch (coef) {
    case SweepCoef::rho: portfolio.rho = value; break;
    case SweepCoef::eta: portfolio.eta = value; break;
    case SweepCoef::phi: portfolio.phi = value; break;
    case SweepCoef::gamma: portfolio.gamma = value; break;
  }
}

}  // namespace

SweepResult sweep_coefficient(const Instance& inst, SweepCoef coef,
                              const std::vector<double>& values,
                              const SchedulePolicy& policy,
                              const SolveOptions& opts) {
  if (values.empty())
    throw ConfigError("sweep_coefficient: empty value grid");
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0)
      throw ConfigError("sweep_coefficient: negative coefficient value");
    if (i > 0 && values[i] < values[i - 1])
      throw ConfigError("sweep_coefficient: values must be nondecreasing");
  }

  SweepResult res;
  res.coefficient = coef;
  for (double value : values) {
    SweepRow row;
    row.value = value;
    SchedulePolicy scoped = policy;
    apply_coefficient(scoped.portfolio, coef, value);
    try {
      PolicyOutcome outcome = schedule_with_policy(inst, scoped, opts);
      row.realloc_penalty = outcome.breakdown.realloc_penalty;
      row.delay_penalty = outcome.breakdown.delay_penalty;
      row.termination_penalty = outcome.breakdown.termination_penalty;
      row.ramp_charge = outcome.breakdown.ramp_charge;
      row.objective = outcome.breakdown.net_objective;
      row.sum_g_mw = exceedance_total(
          outcome.plan, with_portfolio(inst, scoped.portfolio));
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    res.rows.push_back(std::move(row));
  }

  const SweepRow* zero_gamma_row = nullptr;
  if (coef == SweepCoef::gamma)
    for (const auto& row : res.rows)
      if (row.ok && row.value == 0.0) zero_gamma_row = &row;
  if (zero_gamma_row != nullptr) {
    res.reference_sum_g_mw = zero_gamma_row->sum_g_mw;
  } else {
    SchedulePolicy reference = policy;
    reference.portfolio.gamma = 0.0;
    PolicyOutcome outcome = schedule_with_policy(inst, reference, opts);
    res.reference_sum_g_mw = exceedance_total(
        outcome.plan, with_portfolio(inst, reference.portfolio));
  }
  return res;
}

std::vector<SchedulePolicy> standard_policies(const Portfolio& base) {
  std::vector<SchedulePolicy> out;
  SchedulePolicy fcfs;
  fcfs.label = "FCFS Baseline";
  fcfs.use_fcfs = true;
  fcfs.portfolio = base;
  fcfs.portfolio.slack = false;
  fcfs.portfolio.realloc = false;
  fcfs.portfolio.termination = false;
  out.push_back(fcfs);
  for (int bits = 1; bits < 8; ++bits) {
    SchedulePolicy policy;
    policy.portfolio = base;
    policy.portfolio.termination = (bits & 1) != 0;
    policy.portfolio.slack = (bits & 2) != 0;
    policy.portfolio.realloc = (bits & 4) != 0;
    std::string label;
    auto add = [&label](const char* part) {
      if (!label.empty()) label += "+";
      label += part;
    };
    if (policy.portfolio.realloc) add("Ralc");
    if (policy.portfolio.slack) add("Slack");
    if (policy.portfolio.termination) add("Term");
    policy.label = label;
    out.push_back(policy);
  }
  return out;
}

std::vector<CompareRow> compare_portfolios(
    const Instance& inst, const GridWiring* wiring,
    const std::vector<SchedulePolicy>& policies, const SolveOptions& opts) {
  if (policies.empty())
    throw ConfigError("compare_portfolios: no policies given");

  std::vector<CompareRow> rows;
  for (const auto& policy : policies) {
    CompareRow row;
    row.label = policy.label;
    row.policy = policy;
    try {
      PolicyOutcome outcome = schedule_with_policy(inst, policy, opts);
      row.plan = outcome.plan;
      row.breakdown = outcome.breakdown;
      row.status = outcome.status;
      row.relaxed = outcome.relaxed;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  // A richer portfolio can always execute a plan found under fewer levers;
  // adopt any such plan when its exact objective beats the row's own.
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].policy.use_fcfs) continue;
    Instance scoped = with_portfolio(inst, rows[i].policy.portfolio);
    double best = rows[i].ok ? rows[i].breakdown.net_objective : 0.0;
    bool have = rows[i].ok;
    for (size_t j = 0; j < rows.size(); ++j) {
      if (j == i || !rows[j].ok) continue;
      if (!portfolio_subset(rows[j].policy.portfolio,
                            rows[i].policy.portfolio))
        continue;
      if (!validate_plan(rows[j].plan, scoped).feasible()) continue;
      CostBreakdown candidate = evaluate_plan(rows[j].plan, scoped, 0);
      if (!have || candidate.net_objective > best + 1e-9) {
        rows[i].plan = rows[j].plan;
        rows[i].breakdown = candidate;
        rows[i].pooled = true;
        rows[i].ok = true;
        rows[i].error.clear();
        best = candidate.net_objective;
        have = true;
      }
    }
  }

  if (rows[0].ok) {
    const CostBreakdown& base = rows[0].breakdown;
    for (auto& row : rows) {
      if (!row.ok) continue;
      if (base.electricity != 0.0)
        row.delta_elec_pct = (row.breakdown.electricity - base.electricity) /
                             std::abs(base.electricity) * 100.0;
      if (base.revenue != 0.0)
        row.delta_revenue_pct = (row.breakdown.revenue - base.revenue) /
                                std::abs(base.revenue) * 100.0;
    }
  }

  if (wiring != nullptr && wiring->net != nullptr) {
    Rng rng = Rng::stream(wiring->seed, 0);
    Realization realization =
        realize_profiles(*wiring, inst.horizon.slots_total,
                         inst.horizon.slot_hours, wiring->sigma, rng);
    for (auto& row : rows) {
      if (!row.ok) continue;
      try {
        SlotTable power = power_series(row.plan, inst).power_mw;
        row.grid = evaluate_power_series(*wiring, realization, power,
                                         inst.horizon.slot_hours);
        row.has_grid = true;
      } catch (const std::exception& e) {
        row.error = std::string("grid evaluation failed: ") + e.what();
      }
    }
  }
  return rows;
}

}  // namespace loadshift::scenario
