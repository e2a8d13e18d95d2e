#include "loadshift/grid/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "loadshift/core/errors.hpp"

namespace loadshift::grid {

SecurityReport security_metrics(const NetworkCase& net,
                                const std::vector<SlotSolution>& slots,
                                const SecurityOptions& options) {
  if (slots.empty())
    throw StructuralError("security metrics need at least one solved slot");
  if (options.v_min_pu >= options.v_max_pu)
    throw StructuralError("voltage band is empty");

  SecurityReport report;
  report.v_min_pu = options.v_min_pu;
  report.v_max_pu = options.v_max_pu;
  report.slots_total = static_cast<int>(slots.size());
  report.per_slot_bus_violations.assign(slots.size(), -1);

  int n = static_cast<int>(net.buses.size());
  double exceedance_sum = 0.0;
  double exceedance_max = 0.0;

  for (size_t t = 0; t < slots.size(); ++t) {
    const SlotSolution& sol = slots[t];
    if (!sol.converged) {
      ++report.slots_skipped;
      continue;
    }
    ++report.slots_converged;

    int violated_buses = 0;
    for (int i = 0; i < n; ++i) {
      double v = sol.v_mag_pu[i];
      bool outside = v <= options.v_min_pu || v >= options.v_max_pu;
      double exceed = std::max({0.0, options.v_min_pu - v, v - options.v_max_pu});
      exceedance_sum += exceed;
      exceedance_max = std::max(exceedance_max, exceed);
      if (outside) {
        ++violated_buses;
        report.events.push_back({static_cast<int>(t), 'V', net.buses[i].id,
                                 exceed});
      }
    }
    report.per_slot_bus_violations[t] = violated_buses;
    report.violation_bus_hours += violated_buses;
    report.worst_hour_buses = std::max(report.worst_hour_buses, violated_buses);

    for (size_t bi = 0; bi < net.branches.size(); ++bi) {
      const Branch& br = net.branches[bi];
      if (!br.in_service || br.rating_mva <= 0.0) continue;
      double loading = sol.branch_loading_mva(static_cast<int>(bi));
      if (loading > br.rating_mva) {
        ++report.congestion_line_hours;
        report.events.push_back({static_cast<int>(t), 'C',
                                 static_cast<int>(bi),
                                 loading - br.rating_mva});
      }
    }
  }

  if (report.slots_converged > 0) {
    report.avdi_pct =
        100.0 * exceedance_sum / (static_cast<double>(n) * report.slots_converged);
    report.mvdi_pct = 100.0 * exceedance_max;
  }
  return report;
}

double generation_cost(const NetworkCase& net,
                       const std::vector<SlotSolution>& slots,
                       double slot_hours, bool match_by_capacity) {
  std::vector<const GenCost*> priced(net.generators.size(), nullptr);
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.in_service) continue;
    if (g.cost) {
      priced[gi] = &*g.cost;
      continue;
    }
    if (!match_by_capacity)
      throw StructuralError("generator at bus " + std::to_string(g.bus) +
                            " has no cost data");
    const GenCost* donor = nullptr;
    double best_gap = 0.0;
    for (const Generator& candidate : net.generators) {
      if (!candidate.cost) continue;
      double gap = std::abs(candidate.p_max_mw - g.p_max_mw);
      if (!donor || gap < best_gap) {
        donor = &*candidate.cost;
        best_gap = gap;
      }
    }
    if (!donor)
      throw StructuralError(
          "no generator carries cost data to donate to bus " +
          std::to_string(g.bus));
    priced[gi] = donor;
  }

  double total = 0.0;
  for (const SlotSolution& sol : slots) {
    if (!sol.converged) continue;
    for (size_t gi = 0; gi < net.generators.size(); ++gi)
      if (priced[gi]) total += priced[gi]->evaluate(sol.gen_p_mw[gi]) * slot_hours;
  }
  return total;
}

}  // namespace loadshift::grid
