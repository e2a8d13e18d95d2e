#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "loadshift/core/errors.hpp"
#include "loadshift/grid/case.hpp"
#include "loadshift/grid/metrics.hpp"
#include "loadshift/grid/powerflow.hpp"

using namespace loadshift;
using namespace loadshift::grid;

namespace {

std::string data_path(const std::string& name) {
  return std::string(TEST_DATA_DIR) + "/" + name;
}

// Reference solution for the bundled standard 14-bus case, frozen from an
// independent NumPy Newton-Raphson implementation (tests/oracles/pf_oracle.py)
// whose voltages agree with the widely published solved values.
struct GoldenBus {
  int id;
  double vm;
  double va_deg;
};
const GoldenBus kGolden14[] = {
    {1, 1.060000000000, 0.0},
    {2, 1.045000000000, -4.9825891420},
    {3, 1.010000000000, -12.7250999383},
    {4, 1.017670853692, -10.3129010923},
    {5, 1.019513859819, -8.7738538983},
    {6, 1.070000000000, -14.2209464637},
    {7, 1.061519532491, -13.3596273653},
    {8, 1.090000000000, -13.3596273653},
    {9, 1.055931720637, -14.9385212952},
    {10, 1.050984625000, -15.0972884631},
    {11, 1.056906518540, -14.7906220313},
    {12, 1.055188563197, -15.0755845204},
    {13, 1.050381713629, -15.1562763362},
    {14, 1.035529945854, -16.0336445292},
};
const double kGoldenLossMw = 13.3932723579;
const double kGoldenSlackMw = 232.3932723579;

/// Recomputes the bus power balance directly from the returned voltages,
/// independently of the solver's internal bookkeeping: worst absolute
/// mismatch (pu) over free P equations and free Q equations.
double recomputed_mismatch(const NetworkCase& net, const SlotInjections& slot,
                           const SlotSolution& sol) {
  using C = std::complex<double>;
  int n = static_cast<int>(net.buses.size());
  std::vector<std::vector<C>> y(n, std::vector<C>(n, C(0, 0)));
  for (const Branch& br : net.branches) {
    if (!br.in_service) continue;
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    C series = 1.0 / C(br.r_pu, br.x_pu);
    C charging(0.0, br.b_pu / 2.0);
    double ratio = br.tap == 0.0 ? 1.0 : br.tap;
    C tap = std::polar(ratio, br.shift_deg * M_PI / 180.0);
    y[f][f] += (series + charging) / (ratio * ratio);
    y[f][t] += -series / std::conj(tap);
    y[t][f] += -series / tap;
    y[t][t] += series + charging;
  }
  for (int i = 0; i < n; ++i)
    y[i][i] += C(net.buses[i].shunt_g_mw, net.buses[i].shunt_b_mvar) /
               net.base_mva;

  std::vector<C> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = std::polar(sol.v_mag_pu[i], sol.v_ang_rad[i]);

  std::vector<C> s_spec(n);
  for (int i = 0; i < n; ++i)
    s_spec[i] = C(-slot.p_load_mw[i], -slot.q_load_mvar[i]) / net.base_mva;
  std::vector<char> controlled(n, 0);
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    const Generator& g = net.generators[gi];
    if (!g.in_service) continue;
    int b = net.bus_index(g.bus);
    if (net.buses[b].type == BusType::pq) {
      s_spec[b] += C(slot.gen_p_mw[gi], g.q_mvar) / net.base_mva;
    } else {
      controlled[b] = 1;
      if (net.buses[b].type == BusType::pv)
        s_spec[b] += C(slot.gen_p_mw[gi], 0.0) / net.base_mva;
    }
  }

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (net.buses[i].type == BusType::slack) continue;
    C acc(0, 0);
    for (int k = 0; k < n; ++k) acc += y[i][k] * v[k];
    C s_calc = v[i] * std::conj(acc);
    worst = std::max(worst, std::abs(s_calc.real() - s_spec[i].real()));
    if (!controlled[i])
      worst = std::max(worst, std::abs(s_calc.imag() - s_spec[i].imag()));
  }
  return worst;
}

/// Two-bus helper: slack feeding one PQ bus over a single line.
NetworkCase two_bus_case() {
  NetworkCase net;
  net.base_mva = 100.0;
  net.buses.push_back({1, BusType::slack, 0, 0, 0, 0, 230, 1.1, 0.9});
  net.buses.push_back({2, BusType::pq, 50, 10, 0, 0, 230, 1.1, 0.9});
  Branch line;
  line.from_bus = 1;
  line.to_bus = 2;
  line.r_pu = 0.01;
  line.x_pu = 0.08;
  line.rating_mva = 80.0;
  net.branches.push_back(line);
  Generator g;
  g.bus = 1;
  g.v_setpoint_pu = 1.02;
  g.q_max_mvar = 100;
  g.q_min_mvar = -100;
  g.p_max_mw = 200;
  net.generators.push_back(g);
  return net;
}

SlotSolution hand_slot(const std::vector<double>& vm,
                       const std::vector<double>& loading = {},
                       bool converged = true) {
  SlotSolution sol;
  sol.converged = converged;
  sol.v_mag_pu = vm;
  sol.v_ang_rad.assign(vm.size(), 0.0);
  sol.flow_from_mva = loading;
  sol.flow_to_mva.assign(loading.size(), 0.0);
  return sol;
}

}  // namespace

TEST_CASE("bundled 14-bus case parses with the published structure") {
  NetworkCase net = parse_case(data_path("case14.m"));
  CHECK(net.base_mva == 100.0);
  CHECK(net.buses.size() == 14);
  CHECK(net.branches.size() == 20);
  CHECK(net.generators.size() == 5);
  CHECK(net.buses[net.slack_index()].id == 1);

  const Bus& bus9 = net.buses[net.bus_index(9)];
  CHECK(bus9.shunt_b_mvar == doctest::Approx(19.0));
  CHECK(bus9.p_load_mw == doctest::Approx(29.5));

  const Branch& transformer = net.branches[7];
  CHECK(transformer.from_bus == 4);
  CHECK(transformer.to_bus == 7);
  CHECK(transformer.tap == doctest::Approx(0.978));
  for (const Branch& br : net.branches) CHECK(br.rating_mva == 0.0);

  for (const Generator& g : net.generators) {
    REQUIRE(g.cost.has_value());
    CHECK(g.cost->coefficients.size() == 3);
  }
  CHECK(net.generators[0].cost->coefficients[0] ==
        doctest::Approx(0.0430292599));
}

TEST_CASE("modified fixture carries the pv plant and enforced ratings") {
  NetworkCase net = parse_case(data_path("fixture/case14_dc.m"));
  CHECK(net.buses.size() == 14);
  CHECK(net.generators.size() == 6);
  const Generator& pv = net.generators.back();
  CHECK(pv.bus == 11);
  CHECK(pv.p_max_mw == doctest::Approx(480.0));
  CHECK(net.buses[net.bus_index(11)].type == BusType::pq);
  for (const Branch& br : net.branches) CHECK(br.rating_mva > 0.0);
  for (const Generator& g : net.generators) {
    int b = net.bus_index(g.bus);
    if (net.buses[b].type != BusType::pq)
      CHECK(g.v_setpoint_pu < 1.06);
  }
}

TEST_CASE("case validation rejects structural defects") {
  NetworkCase net = two_bus_case();

  NetworkCase two_slacks = net;
  two_slacks.buses[1].type = BusType::slack;
  CHECK_THROWS_AS(validate_case(two_slacks), StructuralError);

  NetworkCase no_slack = net;
  no_slack.buses[0].type = BusType::pq;
  CHECK_THROWS_AS(validate_case(no_slack), StructuralError);

  NetworkCase island = net;
  island.buses.push_back({3, BusType::pq, 5, 0, 0, 0, 230, 1.1, 0.9});
  CHECK_THROWS_AS(validate_case(island), StructuralError);

  NetworkCase out_of_service = net;
  out_of_service.branches[0].in_service = false;
  CHECK_THROWS_AS(validate_case(out_of_service), StructuralError);

  NetworkCase negative_rating = net;
  negative_rating.branches[0].rating_mva = -10.0;
  CHECK_THROWS_AS(validate_case(negative_rating), StructuralError);

  NetworkCase duplicate = net;
  duplicate.buses[1].id = 1;
  CHECK_THROWS_AS(validate_case(duplicate), StructuralError);

  NetworkCase zero_impedance = net;
  zero_impedance.branches[0].r_pu = 0.0;
  zero_impedance.branches[0].x_pu = 0.0;
  CHECK_THROWS_AS(validate_case(zero_impedance), StructuralError);

  NetworkCase dangling = net;
  dangling.branches[0].to_bus = 99;
  CHECK_THROWS_AS(validate_case(dangling), StructuralError);
}

TEST_CASE("parser reports malformed files with their location") {
  auto write_temp = [](const std::string& name, const std::string& body) {
    std::string path = "grid_test_" + name;
    std::ofstream out(path);
    out << body;
    return path;
  };

  std::string missing_base = write_temp("nobase.m",
                                        "mpc.bus = [1 3 0 0 0 0 1 1 0 230 1 "
                                        "1.1 0.9;];\nmpc.branch = "
                                        "[];\nmpc.gen = [];\n");
  CHECK_THROWS_AS(parse_case(missing_base), ParseError);
  std::remove(missing_base.c_str());

  std::string bad_token = write_temp(
      "token.m",
      "mpc.baseMVA = 100;\nmpc.bus = [1 3 zero 0 0 0 1 1 0 230 1 1.1 0.9;];\n"
      "mpc.branch = [];\nmpc.gen = [];\n");
  CHECK_THROWS_AS(parse_case(bad_token), ParseError);
  std::remove(bad_token.c_str());

  std::string negative = write_temp(
      "negrating.m",
      "mpc.baseMVA = 100;\n"
      "mpc.bus = [\n1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;\n"
      "2 1 10 2 0 0 1 1 0 230 1 1.1 0.9;\n];\n"
      "mpc.branch = [1 2 0.01 0.05 0 -5 0 0 0 0 1;];\n"
      "mpc.gen = [1 0 0 10 -10 1.0 100 1 50 0;];\n");
  CHECK_THROWS_AS(parse_case(negative), ParseError);
  std::remove(negative.c_str());

  std::string model_one = write_temp(
      "pwlcost.m",
      "mpc.baseMVA = 100;\n"
      "mpc.bus = [\n1 3 0 0 0 0 1 1 0 230 1 1.1 0.9;\n"
      "2 1 10 2 0 0 1 1 0 230 1 1.1 0.9;\n];\n"
      "mpc.branch = [1 2 0.01 0.05 0 0 0 0 0 0 1;];\n"
      "mpc.gen = [1 0 0 10 -10 1.0 100 1 50 0;];\n"
      "mpc.gencost = [1 0 0 2 0 0 10 100;];\n");
  CHECK_THROWS_AS(parse_case(model_one), ParseError);
  std::remove(model_one.c_str());
}

TEST_CASE("golden power flow matches the independent reference") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotInjections slot = base_injections(net);
  SlotSolution sol = ac_power_flow(net, slot);

  REQUIRE(sol.converged);
  CHECK(sol.iterations <= 10);
  CHECK(sol.max_mismatch_pu <= 1e-8);

  for (const GoldenBus& ref : kGolden14) {
    int i = net.bus_index(ref.id);
    CHECK(std::abs(sol.v_mag_pu[i] - ref.vm) <= 1e-6);
    double va_deg = sol.v_ang_rad[i] * 180.0 / M_PI;
    CHECK(std::abs(va_deg - ref.va_deg) <= 1e-5);
  }
  CHECK(std::abs(sol.loss_mw - kGoldenLossMw) <= 1e-4);
  CHECK(std::abs(sol.gen_p_mw[0] - kGoldenSlackMw) <= 1e-4);
  CHECK(sol.total_load_mw == doctest::Approx(259.0));

  CHECK(recomputed_mismatch(net, slot, sol) <= 1e-8);
}

TEST_CASE("zero-load lossless case settles at the slack setpoint") {
  NetworkCase net;
  net.base_mva = 100.0;
  for (int id = 1; id <= 3; ++id)
    net.buses.push_back({id, id == 1 ? BusType::slack : BusType::pq, 0, 0, 0,
                         0, 230, 1.1, 0.9});
  for (int id = 1; id <= 2; ++id) {
    Branch line;
    line.from_bus = id;
    line.to_bus = id + 1;
    line.x_pu = 0.1;
    net.branches.push_back(line);
  }
  Generator g;
  g.bus = 1;
  g.v_setpoint_pu = 1.03;
  net.generators.push_back(g);
  validate_case(net);

  SlotSolution sol = ac_power_flow(net, base_injections(net));
  REQUIRE(sol.converged);
  for (double vm : sol.v_mag_pu) CHECK(std::abs(vm - 1.03) <= 1e-9);
  for (double va : sol.v_ang_rad) CHECK(std::abs(va) <= 1e-9);
  CHECK(std::abs(sol.loss_mw) <= 1e-9);
}

TEST_CASE("doubled loads depress the voltage profile") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotInjections base = base_injections(net);
  SlotInjections heavy = base;
  for (double& p : heavy.p_load_mw) p *= 2.0;
  for (double& q : heavy.q_load_mvar) q *= 2.0;

  SlotSolution sol_base = ac_power_flow(net, base);
  SlotSolution sol_heavy = ac_power_flow(net, heavy);
  REQUIRE(sol_base.converged);
  REQUIRE(sol_heavy.converged);

  auto min_vm = [](const SlotSolution& s) {
    double best = s.v_mag_pu[0];
    for (double v : s.v_mag_pu) best = std::min(best, v);
    return best;
  };
  CHECK(min_vm(sol_heavy) < min_vm(sol_base));
  CHECK(std::abs(min_vm(sol_heavy) - 0.973064649724) <= 1e-6);
  CHECK(std::abs(sol_heavy.loss_mw - 66.9802681310) <= 1e-3);
}

TEST_CASE("voltage collapse is reported, not thrown") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotInjections slot = base_injections(net);
  for (int id : {5, 9, 13}) slot.p_load_mw[net.bus_index(id)] += 260.0;

  SlotSolution sol = ac_power_flow(net, slot);
  CHECK_FALSE(sol.converged);
  CHECK(sol.max_mismatch_pu > 1e-8);
  CHECK(sol.iterations <= PowerFlowOptions{}.max_iterations);
}

TEST_CASE("generator handling covers fixed injections and missing units") {
  NetworkCase net = two_bus_case();
  Generator pq_gen;
  pq_gen.bus = 2;
  pq_gen.p_mw = 20.0;
  pq_gen.q_mvar = 5.0;
  pq_gen.p_max_mw = 30.0;
  net.generators.push_back(pq_gen);

  SlotSolution with_gen = ac_power_flow(net, base_injections(net));
  REQUIRE(with_gen.converged);

  NetworkCase bare = two_bus_case();
  SlotSolution without = ac_power_flow(bare, base_injections(bare));
  REQUIRE(without.converged);
  CHECK(with_gen.gen_p_mw[0] < without.gen_p_mw[0] - 15.0);
  CHECK(with_gen.gen_p_mw[1] == doctest::Approx(20.0));
  CHECK(with_gen.gen_q_mvar[1] == doctest::Approx(5.0));
  CHECK(recomputed_mismatch(net, base_injections(net), with_gen) <= 1e-8);

  NetworkCase no_slack_gen = two_bus_case();
  no_slack_gen.generators[0].in_service = false;
  CHECK_THROWS_AS(ac_power_flow(no_slack_gen, base_injections(no_slack_gen)),
                  StructuralError);
}

TEST_CASE("pv bus without an in-service generator degrades to pq") {
  NetworkCase net = two_bus_case();
  net.buses[1].type = BusType::pv;
  Generator dead;
  dead.bus = 2;
  dead.v_setpoint_pu = 1.05;
  dead.in_service = false;
  net.generators.push_back(dead);

  SlotSolution sol = ac_power_flow(net, base_injections(net));
  REQUIRE(sol.converged);
  CHECK(sol.v_mag_pu[1] < 1.02);
}

TEST_CASE("mapped site demand lands on its bus") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotTable dc(3, 2, 0.0);
  dc.at(0, 0) = 130.0;
  dc.at(0, 1) = 260.0;
  dc.at(1, 0) = 40.0;
  dc.at(2, 1) = 15.0;
  std::vector<int> map{5, 9, 13};

  std::vector<SlotInjections> series =
      build_timeseries_case(net, dc, map, {}, {});
  REQUIRE(series.size() == 2);
  CHECK(series[0].p_load_mw[net.bus_index(5)] == doctest::Approx(7.6 + 130.0));
  CHECK(series[1].p_load_mw[net.bus_index(5)] == doctest::Approx(7.6 + 260.0));
  CHECK(series[0].p_load_mw[net.bus_index(9)] == doctest::Approx(29.5 + 40.0));
  CHECK(series[1].p_load_mw[net.bus_index(13)] ==
        doctest::Approx(13.5 + 15.0));
  CHECK(series[0].q_load_mvar[net.bus_index(5)] == doctest::Approx(1.6));
  CHECK(series[0].p_load_mw[net.bus_index(4)] == doctest::Approx(47.8));
}

TEST_CASE("background series rescales load at constant power factor") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotTable dc(0, 0);
  std::vector<std::vector<double>> background(
      1, std::vector<double>(net.buses.size(), 0.0));
  for (size_t i = 0; i < net.buses.size(); ++i)
    background[0][i] = net.buses[i].p_load_mw * 0.5;

  std::vector<SlotInjections> series =
      build_timeseries_case(net, dc, {}, background, {});
  REQUIRE(series.size() == 1);
  int b3 = net.bus_index(3);
  CHECK(series[0].p_load_mw[b3] == doctest::Approx(94.2 * 0.5));
  CHECK(series[0].q_load_mvar[b3] == doctest::Approx(19.0 * 0.5));
  int b7 = net.bus_index(7);
  CHECK(series[0].p_load_mw[b7] == doctest::Approx(0.0));
  CHECK(series[0].q_load_mvar[b7] == doctest::Approx(0.0));
}

TEST_CASE("pv profile drives pq-bus generators capped at rating") {
  NetworkCase net = parse_case(data_path("fixture/case14_dc.m"));
  SlotTable dc(0, 0);
  std::vector<double> pv{100.0, 600.0, 0.0};

  std::vector<SlotInjections> series =
      build_timeseries_case(net, dc, {}, {}, pv);
  REQUIRE(series.size() == 3);
  size_t pv_gen = net.generators.size() - 1;
  CHECK(series[0].gen_p_mw[pv_gen] == doctest::Approx(100.0));
  CHECK(series[1].gen_p_mw[pv_gen] == doctest::Approx(480.0));
  CHECK(series[2].gen_p_mw[pv_gen] == doctest::Approx(0.0));
  for (size_t gi = 0; gi + 1 < net.generators.size(); ++gi)
    CHECK(series[1].gen_p_mw[gi] == doctest::Approx(net.generators[gi].p_mw));
}

TEST_CASE("timeseries assembly rejects inconsistent inputs") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotTable dc(1, 2, 10.0);

  CHECK_THROWS_AS(build_timeseries_case(net, dc, {99}, {}, {}),
                  StructuralError);
  CHECK_THROWS_AS(build_timeseries_case(net, dc, {5, 9}, {}, {}),
                  StructuralError);

  std::vector<std::vector<double>> background(
      3, std::vector<double>(net.buses.size(), 1.0));
  CHECK_THROWS_AS(build_timeseries_case(net, dc, {5}, background, {}),
                  StructuralError);

  std::vector<std::vector<double>> ragged(2, std::vector<double>(3, 1.0));
  CHECK_THROWS_AS(build_timeseries_case(net, dc, {5}, ragged, {}),
                  StructuralError);

  CHECK_THROWS_AS(build_timeseries_case(net, dc, {5}, {}, {1.0, 2.0}),
                  StructuralError);  // no generator on a PQ bus

  SlotTable empty(0, 0);
  CHECK_THROWS_AS(build_timeseries_case(net, empty, {}, {}, {}),
                  StructuralError);
}

TEST_CASE("security metrics match hand-computed exposure and severity") {
  NetworkCase net = two_bus_case();
  SecurityOptions band{0.94, 1.06};

  SUBCASE("all inside the open band") {
    std::vector<SlotSolution> slots{hand_slot({1.0, 1.0}, {50.0}),
                                    hand_slot({0.95, 1.059}, {79.9})};
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.violation_bus_hours == 0);
    CHECK(rep.congestion_line_hours == 0);
    CHECK(rep.worst_hour_buses == 0);
    CHECK(rep.avdi_pct == 0.0);
    CHECK(rep.mvdi_pct == 0.0);
    CHECK(rep.events.empty());
  }

  SUBCASE("one bus below the floor for three slots") {
    std::vector<SlotSolution> slots(3, hand_slot({1.0, 0.93}, {10.0}));
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.violation_bus_hours == 3);
    CHECK(rep.worst_hour_buses == 1);
    CHECK(rep.mvdi_pct == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.avdi_pct == doctest::Approx(100.0 * 0.03 / 6.0).epsilon(1e-12));
    REQUIRE(rep.events.size() == 3);
    CHECK(rep.events[0].kind == 'V');
    CHECK(rep.events[0].element == 2);
  }

  SUBCASE("a bound hit counts as violated with zero exceedance") {
    std::vector<SlotSolution> slots{hand_slot({1.06, 1.0}, {0.0})};
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.violation_bus_hours == 1);
    CHECK(rep.mvdi_pct == 0.0);
    CHECK(rep.avdi_pct == 0.0);
  }

  SUBCASE("congestion counts line-hours above rating") {
    std::vector<SlotSolution> slots{hand_slot({1.0, 1.0}, {95.0}),
                                    hand_slot({1.0, 1.0}, {80.0})};
    slots[1].flow_to_mva[0] = 84.0;  // receiving end governs
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.congestion_line_hours == 2);
    REQUIRE(rep.events.size() == 2);
    CHECK(rep.events[0].kind == 'C');
    CHECK(rep.events[0].magnitude == doctest::Approx(15.0));
    CHECK(rep.events[1].magnitude == doctest::Approx(4.0));
  }

  SUBCASE("unrated branches are never congested") {
    NetworkCase unrated = two_bus_case();
    unrated.branches[0].rating_mva = 0.0;
    std::vector<SlotSolution> slots{hand_slot({1.0, 1.0}, {500.0})};
    SecurityReport rep = security_metrics(unrated, slots, band);
    CHECK(rep.congestion_line_hours == 0);
  }

  SUBCASE("non-converged slots are excluded and counted") {
    std::vector<SlotSolution> slots{hand_slot({1.0, 0.92}, {0.0}),
                                    hand_slot({1.0, 0.5}, {0.0}, false)};
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.slots_total == 2);
    CHECK(rep.slots_converged == 1);
    CHECK(rep.slots_skipped == 1);
    CHECK(rep.violation_bus_hours == 1);
    CHECK(rep.per_slot_bus_violations[0] == 1);
    CHECK(rep.per_slot_bus_violations[1] == -1);
    CHECK(rep.mvdi_pct == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rep.avdi_pct == doctest::Approx(100.0 * 0.02 / 2.0).epsilon(1e-9));
  }

  SUBCASE("worst hour tracks the densest slot") {
    std::vector<SlotSolution> slots{hand_slot({0.93, 0.92}, {0.0}),
                                    hand_slot({1.0, 0.9}, {0.0})};
    SecurityReport rep = security_metrics(net, slots, band);
    CHECK(rep.violation_bus_hours == 3);
    CHECK(rep.worst_hour_buses == 2);
    CHECK(rep.mvdi_pct == doctest::Approx(4.0).epsilon(1e-9));
  }

  SUBCASE("empty input is an error") {
    std::vector<SlotSolution> empty;
    CHECK_THROWS_AS(security_metrics(net, empty, band), StructuralError);
  }
}

TEST_CASE("generation cost prices dispatch and borrows by capacity") {
  NetworkCase net = two_bus_case();
  net.generators[0].cost = GenCost{0, 0, {2.0, 0.0}};  // 2 $/MWh, no constant

  SlotSolution slot;
  slot.converged = true;
  slot.gen_p_mw = {100.0};
  std::vector<SlotSolution> two_slots(2, slot);
  CHECK(generation_cost(net, two_slots, 1.0) == doctest::Approx(400.0));
  CHECK(generation_cost(net, two_slots, 0.5) == doctest::Approx(200.0));

  SUBCASE("non-converged slots are skipped") {
    two_slots[1].converged = false;
    CHECK(generation_cost(net, two_slots, 1.0) == doctest::Approx(200.0));
  }

  SUBCASE("capacity matching picks the nearest donor") {
    NetworkCase donors = two_bus_case();
    donors.generators[0].p_max_mw = 100.0;
    donors.generators[0].cost = GenCost{0, 0, {1.0, 0.0}};
    Generator big;
    big.bus = 2;
    big.p_max_mw = 300.0;
    big.cost = GenCost{0, 0, {5.0, 0.0}};
    donors.generators.push_back(big);
    Generator orphan;
    orphan.bus = 2;
    orphan.p_max_mw = 120.0;
    donors.generators.push_back(orphan);

    SlotSolution s;
    s.converged = true;
    s.gen_p_mw = {0.0, 0.0, 10.0};
    CHECK(generation_cost(donors, {s}, 1.0) == doctest::Approx(10.0));

    donors.generators[2].p_max_mw = 250.0;
    CHECK(generation_cost(donors, {s}, 1.0) == doctest::Approx(50.0));

    CHECK_THROWS_AS(generation_cost(donors, {s}, 1.0, false),
                    StructuralError);
  }

  SUBCASE("no donors at all is an error") {
    NetworkCase bare = two_bus_case();
    bare.generators[0].cost.reset();
    SlotSolution s;
    s.converged = true;
    s.gen_p_mw = {10.0};
    CHECK_THROWS_AS(generation_cost(bare, {s}, 1.0), StructuralError);
  }

  SUBCASE("constant polynomial prices zero dispatch at its constant") {
    NetworkCase flat = two_bus_case();
    flat.generators[0].cost = GenCost{0, 0, {0.0}};
    SlotSolution s;
    s.converged = true;
    s.gen_p_mw = {0.0};
    CHECK(generation_cost(flat, {s}, 1.0) == doctest::Approx(0.0));
  }
}

TEST_CASE("repeated solves are bit-identical and thread count is cosmetic") {
  NetworkCase net = parse_case(data_path("case14.m"));
  SlotTable dc(3, 4, 0.0);
  for (int t = 0; t < 4; ++t) {
    dc.at(0, t) = 30.0 * t;
    dc.at(1, t) = 15.0 * (3 - t);
    dc.at(2, t) = 20.0;
  }
  std::vector<SlotInjections> series =
      build_timeseries_case(net, dc, {5, 9, 13}, {}, {});

  std::vector<SlotSolution> a = solve_series(net, series);
  std::vector<SlotSolution> b = solve_series(net, series);
  std::vector<SlotSolution> c = solve_series(net, series, {}, 3);

  REQUIRE(a.size() == b.size());
  for (size_t t = 0; t < a.size(); ++t) {
    REQUIRE(a[t].converged);
    for (size_t i = 0; i < a[t].v_mag_pu.size(); ++i) {
      CHECK(a[t].v_mag_pu[i] == b[t].v_mag_pu[i]);
      CHECK(a[t].v_mag_pu[i] == c[t].v_mag_pu[i]);
      CHECK(a[t].v_ang_rad[i] == c[t].v_ang_rad[i]);
    }
    for (size_t l = 0; l < a[t].flow_from_mva.size(); ++l)
      CHECK(a[t].flow_from_mva[l] == c[t].flow_from_mva[l]);
  }
}
