#include "loadshift/grid/powerflow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <thread>

#include "loadshift/core/errors.hpp"

namespace loadshift::grid {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Complex = std::complex<double>;

struct BranchAdmittance {
  Complex ff, ft, tf, tt;
};

BranchAdmittance branch_admittance(const Branch& br) {
  Complex series = 1.0 / Complex(br.r_pu, br.x_pu);
  Complex charging(0.0, br.b_pu / 2.0);
  double ratio = br.tap == 0.0 ? 1.0 : br.tap;
  Complex tap = std::polar(ratio, br.shift_deg * kPi / 180.0);
  BranchAdmittance y;
  y.ff = (series + charging) / (ratio * ratio);
  y.ft = -series / std::conj(tap);
  y.tf = -series / tap;
  y.tt = series + charging;
  return y;
}

Eigen::MatrixXcd build_ybus(const NetworkCase& net) {
  int n = static_cast<int>(net.buses.size());
  Eigen::MatrixXcd ybus = Eigen::MatrixXcd::Zero(n, n);
  for (const Branch& br : net.branches) {
    if (!br.in_service) continue;
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    BranchAdmittance y = branch_admittance(br);
    ybus(f, f) += y.ff;
    ybus(f, t) += y.ft;
    ybus(t, f) += y.tf;
    ybus(t, t) += y.tt;
  }
  for (int i = 0; i < n; ++i) {
    const Bus& b = net.buses[i];
    ybus(i, i) += Complex(b.shunt_g_mw, b.shunt_b_mvar) / net.base_mva;
  }
  return ybus;
}

/// Effective bus role for the solve: a PV-type bus without an in-service
/// generator cannot hold a setpoint and is treated as PQ.
std::vector<BusType> effective_types(const NetworkCase& net) {
  std::vector<BusType> types(net.buses.size());
  std::vector<char> has_gen(net.buses.size(), 0);
  for (const Generator& g : net.generators)
    if (g.in_service) has_gen[net.bus_index(g.bus)] = 1;
  for (size_t i = 0; i < net.buses.size(); ++i) {
    types[i] = net.buses[i].type;
    if (types[i] == BusType::pv && !has_gen[i]) types[i] = BusType::pq;
    if (types[i] == BusType::slack && !has_gen[i])
      throw StructuralError("slack bus " + std::to_string(net.buses[i].id) +
                            " has no in-service generator");
  }
  return types;
}

}  // namespace

SlotInjections base_injections(const NetworkCase& net) {
  SlotInjections slot;
  slot.p_load_mw.reserve(net.buses.size());
  slot.q_load_mvar.reserve(net.buses.size());
  for (const Bus& b : net.buses) {
    slot.p_load_mw.push_back(b.p_load_mw);
    slot.q_load_mvar.push_back(b.q_load_mvar);
  }
  slot.gen_p_mw.reserve(net.generators.size());
  for (const Generator& g : net.generators) slot.gen_p_mw.push_back(g.p_mw);
  return slot;
}

double SlotSolution::branch_loading_mva(int branch) const {
  return std::max(flow_from_mva[branch], flow_to_mva[branch]);
}

SlotSolution ac_power_flow(const NetworkCase& net, const SlotInjections& slot,
                           const PowerFlowOptions& options) {
  int n = static_cast<int>(net.buses.size());
  if (static_cast<int>(slot.p_load_mw.size()) != n ||
      static_cast<int>(slot.q_load_mvar.size()) != n ||
      slot.gen_p_mw.size() != net.generators.size())
    throw StructuralError("slot injection sizes do not match the case");

  std::vector<BusType> types = effective_types(net);
  Eigen::MatrixXcd ybus = build_ybus(net);

  // Net scheduled injections in per unit.  Generators on PQ buses inject
  // their fixed P and Q; generator P on PV buses is scheduled, Q is free.
  Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    p_spec(i) = -slot.p_load_mw[i] / net.base_mva;
    q_spec(i) = -slot.q_load_mvar[i] / net.base_mva;
  }
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.in_service) continue;
    int b = net.bus_index(g.bus);
    if (types[b] == BusType::slack) continue;
    p_spec(b) += slot.gen_p_mw[gi] / net.base_mva;
    if (types[b] == BusType::pq) q_spec(b) += g.q_mvar / net.base_mva;
  }

  // Flat start with generator setpoints on controlled buses.
  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.in_service) continue;
    int b = net.bus_index(g.bus);
    if (types[b] != BusType::pq) vm(b) = g.v_setpoint_pu;
  }

  std::vector<int> ang_vars;  // buses with a free angle
  std::vector<int> mag_vars;  // buses with a free magnitude
  for (int i = 0; i < n; ++i) {
    if (types[i] != BusType::slack) ang_vars.push_back(i);
    if (types[i] == BusType::pq) mag_vars.push_back(i);
  }
  int na = static_cast<int>(ang_vars.size());
  int nm = static_cast<int>(mag_vars.size());

  Eigen::VectorXd p_calc(n), q_calc(n);
  auto compute_injections = [&]() {
    for (int i = 0; i < n; ++i) {
      double p = 0.0, q = 0.0;
      for (int k = 0; k < n; ++k) {
        Complex y = ybus(i, k);
        if (y == Complex(0.0, 0.0)) continue;
        double theta = va(i) - va(k);
        double vv = vm(i) * vm(k);
        p += vv * (y.real() * std::cos(theta) + y.imag() * std::sin(theta));
        q += vv * (y.real() * std::sin(theta) - y.imag() * std::cos(theta));
      }
      p_calc(i) = p;
      q_calc(i) = q;
    }
  };

  auto mismatch_norm = [&]() {
    double worst = 0.0;
    for (int i : ang_vars) worst = std::max(worst, std::abs(p_spec(i) - p_calc(i)));
    for (int i : mag_vars) worst = std::max(worst, std::abs(q_spec(i) - q_calc(i)));
    return worst;
  };

  SlotSolution sol;
  compute_injections();
  double worst = mismatch_norm();

  int iter = 0;
  bool numeric_failure = false;
  while (worst > options.tolerance_pu && iter < options.max_iterations) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);
    Eigen::VectorXd rhs(na + nm);

    for (int r = 0; r < na; ++r) rhs(r) = p_spec(ang_vars[r]) - p_calc(ang_vars[r]);
    for (int r = 0; r < nm; ++r)
      rhs(na + r) = q_spec(mag_vars[r]) - q_calc(mag_vars[r]);

    auto dp_dth = [&](int i, int k) {
      if (i == k) return -q_calc(i) - ybus(i, i).imag() * vm(i) * vm(i);
      double theta = va(i) - va(k);
      Complex y = ybus(i, k);
      return vm(i) * vm(k) *
             (y.real() * std::sin(theta) - y.imag() * std::cos(theta));
    };
    auto dp_dv = [&](int i, int k) {
      if (i == k) return p_calc(i) / vm(i) + ybus(i, i).real() * vm(i);
      double theta = va(i) - va(k);
      Complex y = ybus(i, k);
      return vm(i) * (y.real() * std::cos(theta) + y.imag() * std::sin(theta));
    };
    auto dq_dth = [&](int i, int k) {
      if (i == k) return p_calc(i) - ybus(i, i).real() * vm(i) * vm(i);
      double theta = va(i) - va(k);
      Complex y = ybus(i, k);
      return -vm(i) * vm(k) *
             (y.real() * std::cos(theta) + y.imag() * std::sin(theta));
    };
    auto dq_dv = [&](int i, int k) {
      if (i == k) return q_calc(i) / vm(i) - ybus(i, i).imag() * vm(i);
      double theta = va(i) - va(k);
      Complex y = ybus(i, k);
      return vm(i) * (y.real() * std::sin(theta) - y.imag() * std::cos(theta));
    };

    for (int r = 0; r < na; ++r)
      for (int c = 0; c < na; ++c)
        jac(r, c) = dp_dth(ang_vars[r], ang_vars[c]);
    for (int r = 0; r < na; ++r)
      for (int c = 0; c < nm; ++c)
        jac(r, na + c) = dp_dv(ang_vars[r], mag_vars[c]);
    for (int r = 0; r < nm; ++r)
      for (int c = 0; c < na; ++c)
        jac(na + r, c) = dq_dth(mag_vars[r], ang_vars[c]);
    for (int r = 0; r < nm; ++r)
      for (int c = 0; c < nm; ++c)
        jac(na + r, na + c) = dq_dv(mag_vars[r], mag_vars[c]);

    Eigen::VectorXd step = jac.partialPivLu().solve(rhs);
    if (!step.allFinite()) {
      numeric_failure = true;
      break;
    }
    for (int r = 0; r < na; ++r) va(ang_vars[r]) += step(r);
    for (int r = 0; r < nm; ++r) vm(mag_vars[r]) += step(na + r);
    ++iter;

    compute_injections();
    worst = mismatch_norm();
    if (!std::isfinite(worst)) {
      numeric_failure = true;
      break;
    }
  }

  sol.iterations = iter;
  sol.max_mismatch_pu = std::isfinite(worst) ? worst : HUGE_VAL;
  sol.converged = !numeric_failure && worst <= options.tolerance_pu;

  sol.v_mag_pu.assign(vm.data(), vm.data() + n);
  sol.v_ang_rad.assign(va.data(), va.data() + n);

  // Branch end flows in MVA.
  std::vector<Complex> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::polar(vm(i), va(i));
  sol.flow_from_mva.assign(net.branches.size(), 0.0);
  sol.flow_to_mva.assign(net.branches.size(), 0.0);
  for (size_t bi = 0; bi < net.branches.size(); ++bi) {
    const Branch& br = net.branches[bi];
    if (!br.in_service) continue;
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    BranchAdmittance y = branch_admittance(br);
    Complex sf = v[f] * std::conj(y.ff * v[f] + y.ft * v[t]);
    Complex st = v[t] * std::conj(y.tf * v[f] + y.tt * v[t]);
    sol.flow_from_mva[bi] = std::abs(sf) * net.base_mva;
    sol.flow_to_mva[bi] = std::abs(st) * net.base_mva;
  }

  // Generator dispatch: scheduled P everywhere except the slack bus, whose
  // first in-service generator picks up the residual.  Free reactive power
  // at a controlled bus is split evenly across its in-service generators.
  sol.gen_p_mw.assign(net.generators.size(), 0.0);
  sol.gen_q_mvar.assign(net.generators.size(), 0.0);
  std::vector<int> gens_on_bus(n, 0);
  for (const Generator& g : net.generators)
    if (g.in_service) ++gens_on_bus[net.bus_index(g.bus)];
  std::vector<char> slack_assigned(n, 0);
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.in_service) continue;
    int b = net.bus_index(g.bus);
    if (types[b] == BusType::pq) {
      sol.gen_p_mw[gi] = slot.gen_p_mw[gi];
      sol.gen_q_mvar[gi] = g.q_mvar;
      continue;
    }
    double q_bus = q_calc(b) * net.base_mva + slot.q_load_mvar[b];
    sol.gen_q_mvar[gi] = q_bus / gens_on_bus[b];
    if (types[b] == BusType::slack) {
      if (!slack_assigned[b]) {
        double p_bus = p_calc(b) * net.base_mva + slot.p_load_mw[b];
        double others = 0.0;
        for (size_t gk = 0; gk < net.generators.size(); ++gk)
          if (gk != gi && net.generators[gk].in_service &&
              net.bus_index(net.generators[gk].bus) == b)
            others += slot.gen_p_mw[gk];
        sol.gen_p_mw[gi] = p_bus - others;
        slack_assigned[b] = 1;
      } else {
        sol.gen_p_mw[gi] = slot.gen_p_mw[gi];
      }
    } else {
      sol.gen_p_mw[gi] = slot.gen_p_mw[gi];
    }
  }

  for (int i = 0; i < n; ++i) sol.total_load_mw += slot.p_load_mw[i];
  for (double p : sol.gen_p_mw) sol.total_gen_mw += p;
  sol.loss_mw = sol.total_gen_mw - sol.total_load_mw;
  return sol;
}

std::vector<SlotInjections> build_timeseries_case(
    const NetworkCase& net, const SlotTable& dc_power_mw,
    const std::vector<int>& site_bus_ids,
    const std::vector<std::vector<double>>& background_p_mw,
    const std::vector<double>& pv_p_mw) {
  int n = static_cast<int>(net.buses.size());

  if (dc_power_mw.rows != static_cast<int>(site_bus_ids.size()))
    throw StructuralError("site to bus map covers " +
                          std::to_string(site_bus_ids.size()) +
                          " sites for a power series with " +
                          std::to_string(dc_power_mw.rows) + " sites");
  std::vector<int> site_bus_index(site_bus_ids.size());
  for (size_t s = 0; s < site_bus_ids.size(); ++s) {
    site_bus_index[s] = net.bus_index(site_bus_ids[s]);
    if (site_bus_index[s] < 0)
      throw StructuralError("site " + std::to_string(s) +
                            " maps to unknown bus " +
                            std::to_string(site_bus_ids[s]));
  }

  int slots = 0;
  auto reconcile = [&](int count, const char* what) {
    if (count == 0) return;
    if (slots == 0) slots = count;
    if (count != slots)
      throw StructuralError(std::string(what) + " covers " +
                            std::to_string(count) + " slots, expected " +
                            std::to_string(slots));
  };
  reconcile(dc_power_mw.rows > 0 ? dc_power_mw.cols : 0, "dc power series");
  reconcile(static_cast<int>(background_p_mw.size()), "background series");
  reconcile(static_cast<int>(pv_p_mw.size()), "pv series");
  if (slots == 0)
    throw StructuralError("time series case needs at least one input series");

  for (const std::vector<double>& row : background_p_mw)
    if (static_cast<int>(row.size()) != n)
      throw StructuralError("background series row covers " +
                            std::to_string(row.size()) + " buses, case has " +
                            std::to_string(n));

  std::vector<int> pv_gens;
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (g.in_service &&
        net.buses[net.bus_index(g.bus)].type == BusType::pq)
      pv_gens.push_back(static_cast<int>(gi));
  }
  if (!pv_p_mw.empty() && pv_gens.empty())
    throw StructuralError(
        "pv series given but no in-service generator sits on a PQ bus");

  SlotInjections base = base_injections(net);
  std::vector<SlotInjections> series(slots, base);
  for (int t = 0; t < slots; ++t) {
    SlotInjections& slot = series[t];
    if (!background_p_mw.empty()) {
      for (int i = 0; i < n; ++i) {
        double base_p = base.p_load_mw[i];
        slot.p_load_mw[i] = background_p_mw[t][i];
        if (base_p != 0.0)
          slot.q_load_mvar[i] = base.q_load_mvar[i] *
                                (background_p_mw[t][i] / base_p);
      }
    }
    for (size_t s = 0; s < site_bus_ids.size(); ++s)
      slot.p_load_mw[site_bus_index[s]] += dc_power_mw.at(
          static_cast<int>(s), t);
    if (!pv_p_mw.empty())
      for (int gi : pv_gens) {
        double cap = net.generators[gi].p_max_mw;
        slot.gen_p_mw[gi] = std::clamp(pv_p_mw[t], 0.0, cap);
      }
  }
  return series;
}

std::vector<SlotSolution> solve_series(const NetworkCase& net,
                                       const std::vector<SlotInjections>& slots,
                                       const PowerFlowOptions& options,
                                       int threads) {
  std::vector<SlotSolution> out(slots.size());
  int count = static_cast<int>(slots.size());
  int workers = std::clamp(threads, 1, std::max(1, count));
  if (workers == 1) {
    for (int t = 0; t < count; ++t) out[t] = ac_power_flow(net, slots[t], options);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (int t = w; t < count; t += workers)
        out[t] = ac_power_flow(net, slots[t], options);
    });
  for (std::thread& th : pool) th.join();
  return out;
}

}  // namespace loadshift::grid
