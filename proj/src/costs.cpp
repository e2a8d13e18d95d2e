#include "loadshift/econ/costs.hpp"

#include <algorithm>
#include <cmath>

#include "loadshift/core/errors.hpp"

namespace loadshift {

SlotTable site_load(const Plan& plan) {
  SlotTable load(plan.sites(), plan.slots());
  for (int s = 0; s < plan.sites(); ++s)
    for (int t = 0; t < plan.slots(); ++t) {
      double total = 0.0;
      for (int j = 0; j < plan.jobs(); ++j) total += plan.c(j, s, t);
      load.at(s, t) = total;
    }
  return load;
}

std::vector<double> site_power(const std::vector<double>& load,
                               const Site& site) {
  double l_max = site.max_service();
  std::vector<double> power(load.size());
  for (size_t t = 0; t < load.size(); ++t) {
    if (load[t] < -1e-9 || load[t] > l_max + 1e-6)
      throw StructuralError("site " + site.id + " load " +
                            std::to_string(load[t]) +
                            " outside [0, " + std::to_string(l_max) + "]");
    double util = l_max > 0.0 ? std::clamp(load[t] / l_max, 0.0, 1.0) : 0.0;
    power[t] =
        site.pue * (site.p_idle_mw + (site.p_busy_mw - site.p_idle_mw) * util);
  }
  return power;
}

SitePowerSeries power_series(const Plan& plan, const Instance& inst) {
  SitePowerSeries series;
  series.load = site_load(plan);
  series.power_mw = SlotTable(plan.sites(), plan.slots());
  for (int s = 0; s < plan.sites(); ++s) {
    std::vector<double> load_row(plan.slots());
    for (int t = 0; t < plan.slots(); ++t) load_row[t] = series.load.at(s, t);
    std::vector<double> power = site_power(load_row, inst.sites[s]);
    for (int t = 0; t < plan.slots(); ++t) series.power_mw.at(s, t) = power[t];
  }
  return series;
}

double electricity_cost(const SlotTable& load, const Instance& inst) {
  const double dt = inst.horizon.slot_hours;
  double cost = 0.0;
  for (int s = 0; s < site_count(inst); ++s) {
    const Site& site = inst.sites[s];
    double l_max = site.max_service();
    double slope =
        l_max > 0.0 ? site.pue * (site.p_busy_mw - site.p_idle_mw) / l_max
                    : 0.0;
    for (int t = 0; t < inst.horizon.slots_total; ++t)
      cost += inst.prices.electricity.at(s, t) * slope * load.at(s, t) * dt;
    for (int t = 0; t < inst.horizon.slots_original; ++t)
      cost += inst.prices.electricity.at(s, t) * site.pue * site.p_idle_mw * dt;
  }
  return cost;
}

double revenue(const Plan& plan, const Instance& inst) {
  const double dt = inst.horizon.slot_hours;
  double total = 0.0;
  for (int j = 0; j < plan.jobs(); ++j) {
    double scale = inst.jobs[j].svc_price_scale;
    for (int s = 0; s < plan.sites(); ++s)
      for (int t = 0; t < plan.slots(); ++t)
        total += inst.prices.service.at(s, t) * scale * plan.c(j, s, t) * dt;
  }
  return total;
}

QosPenalties qos_penalties(const Plan& plan, const Instance& inst) {
  const Portfolio& pf = inst.portfolio;
  const double dt = inst.horizon.slot_hours;
  QosPenalties out;
  for (int j = 0; j < plan.jobs(); ++j) {
    const Job& job = inst.jobs[j];
    SlotRange delay = delay_window(job, pf.slack);
    double delivered = 0.0;
    for (int s = 0; s < plan.sites(); ++s) {
      for (int t = 0; t < plan.slots(); ++t) {
        if (t >= 1) out.realloc += pf.rho * plan.realloc_amount(j, s, t);
        if (delay.contains(t)) out.delay += pf.eta * plan.c(j, s, t) * dt;
        delivered += plan.c(j, s, t) * dt;
      }
    }
    out.termination += pf.phi * std::max(0.0, job.total_work - delivered);
  }
  return out;
}

RampCharge ramp_charge(const SlotTable& power_mw,
                       const std::vector<Site>& sites, double gamma,
                       RampForm form) {
  RampCharge out;
  out.exceedance_mw = SlotTable(power_mw.rows, power_mw.cols);
  if (form == RampForm::off) return out;
  for (int s = 0; s < power_mw.rows; ++s) {
    double delta = sites[s].ramp_tolerance_mw;
    for (int t = 1; t < power_mw.cols; ++t) {
      double swing = std::abs(power_mw.at(s, t) - power_mw.at(s, t - 1));
      double g = std::max(0.0, swing - delta);
      out.exceedance_mw.at(s, t) = g;
      out.charge += gamma * (form == RampForm::quadratic ? g * g : g);
    }
  }
  return out;
}

double pwl_square(double g, double g_max, int segments) {
  double best = 0.0;
  if (segments <= 0 || g_max <= 0.0) return g * g;
  double h = g_max / segments;
  for (int k = 0; k <= segments; ++k) {
    double point = k * h;
    double tangent = 2.0 * point * g - point * point;
    best = std::max(best, tangent);
  }
  return best;
}

double max_power_swing(const Site& site) { return site.pue * site.p_busy_mw; }

CostBreakdown evaluate_plan(const Plan& plan, const Instance& inst,
                            int pwl_segments) {
  const Portfolio& pf = inst.portfolio;
  CostBreakdown out;
  SitePowerSeries series = power_series(plan, inst);
  out.revenue = revenue(plan, inst);
  out.electricity = electricity_cost(series.load, inst);

  if (pf.ramp_form == RampForm::quadratic && pwl_segments > 0) {
    RampCharge exact =
        ramp_charge(series.power_mw, inst.sites, pf.gamma, pf.ramp_form);
    double charge = 0.0;
    for (int s = 0; s < plan.sites(); ++s) {
      double g_max = max_power_swing(inst.sites[s]);
      for (int t = 1; t < plan.slots(); ++t)
        charge += pf.gamma *
                  pwl_square(exact.exceedance_mw.at(s, t), g_max, pwl_segments);
    }
    out.ramp_charge = charge;
  } else {
    out.ramp_charge =
        ramp_charge(series.power_mw, inst.sites, pf.gamma, pf.ramp_form).charge;
  }

  QosPenalties qos = qos_penalties(plan, inst);
  out.realloc_penalty = qos.realloc;
  out.delay_penalty = qos.delay;
  out.termination_penalty = qos.termination;
  out.qos_total = qos.realloc + qos.delay + qos.termination;
  out.grid_cost = out.electricity + out.ramp_charge;
  out.net_objective = out.revenue - out.grid_cost - out.qos_total;
  return out;
}

}  // namespace loadshift
