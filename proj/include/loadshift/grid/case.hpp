#pragma once

#include <optional>
#include <string>
#include <vector>

namespace loadshift::grid {

enum class BusType { pq = 1, pv = 2, slack = 3 };

struct Bus {
  int id = 0;
  BusType type = BusType::pq;
  double p_load_mw = 0.0;
  double q_load_mvar = 0.0;
  double shunt_g_mw = 0.0;    // conductance at V = 1 pu
  double shunt_b_mvar = 0.0;  // susceptance at V = 1 pu
  double base_kv = 0.0;
  double v_max_pu = 0.0;
  double v_min_pu = 0.0;
};

struct Branch {
  int from_bus = 0;  // bus ids, not indices
  int to_bus = 0;
  double r_pu = 0.0;
  double x_pu = 0.0;
  double b_pu = 0.0;         // total line charging susceptance
  double rating_mva = 0.0;   // 0 means unenforced
  double tap = 0.0;          // 0 means nominal 1:1
  double shift_deg = 0.0;
  bool in_service = true;
};

/// Polynomial generation cost in dollars per hour: coefficients in
/// descending powers of the dispatched MW.
struct GenCost {
  double startup = 0.0;
  double shutdown = 0.0;
  std::vector<double> coefficients;

  double evaluate(double p_mw) const;
};

struct Generator {
  int bus = 0;
  double p_mw = 0.0;
  double q_mvar = 0.0;
  double q_max_mvar = 0.0;
  double q_min_mvar = 0.0;
  double v_setpoint_pu = 1.0;
  double p_max_mw = 0.0;
  double p_min_mw = 0.0;
  bool in_service = true;
  std::optional<GenCost> cost;
};

/// A static network in the MATPOWER table convention: per-unit branch
/// impedances on the system base, loads and dispatches in MW/MVAr.
struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  /// Index into `buses` for a bus id; -1 when absent.
  int bus_index(int bus_id) const;
  int slack_index() const;
};

/// Reads the `baseMVA`, `bus`, `branch`, `gen` and `gencost` tables from a
/// MATPOWER-style case file and validates the result: exactly one slack
/// bus, all endpoints resolvable, the in-service graph connected, and no
/// negative thermal ratings (a rating of 0 marks the limit unenforced).
NetworkCase parse_case(const std::string& path);

/// Structural checks used by parse_case, callable on programmatically
/// built cases.  Throws StructuralError on the first violation.
void validate_case(const NetworkCase& net);

}  // namespace loadshift::grid
