#include "loadshift/grid/case.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "loadshift/core/errors.hpp"

namespace loadshift::grid {

double GenCost::evaluate(double p_mw) const {
  double total = 0.0;
  for (double c : coefficients) total = total * p_mw + c;
  return total;
}

int NetworkCase::bus_index(int bus_id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  return -1;
}

int NetworkCase::slack_index() const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].type == BusType::slack) return static_cast<int>(i);
  return -1;
}

namespace {

struct Matrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> row_lines;
};

/// One scalar assignment (`mpc.baseMVA = 100;`) or bracketed table, keyed by
/// the identifier after `mpc.`.
struct RawCase {
  std::string file;
  std::map<std::string, double> scalars;
  std::map<std::string, Matrix> tables;
};

std::string strip_comment(const std::string& line) {
  size_t pos = line.find('%');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_field(const std::string& token, double& out) {
  size_t used = 0;
  try {
    out = std::stod(token, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == token.size();
}

RawCase read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open case file");
  RawCase raw;
  raw.file = path;

  std::string line;
  int line_no = 0;
  std::string table_name;
  std::string pending_row;
  int row_start_line = 0;

  auto flush_row = [&](Matrix& mat) {
    std::istringstream row(pending_row);
    std::vector<double> values;
    std::string token;
    while (row >> token) {
      if (token == "," ) continue;
      if (!token.empty() && token.back() == ',') token.pop_back();
      if (token.empty()) continue;
      double v = 0.0;
      if (!parse_field(token, v))
        throw ParseError(path, row_start_line,
                         "non-numeric entry '" + token + "' in mpc." +
                             table_name);
      values.push_back(v);
    }
    if (!values.empty()) {
      mat.rows.push_back(std::move(values));
      mat.row_lines.push_back(row_start_line);
    }
    pending_row.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string text = strip_comment(line);
    if (table_name.empty()) {
      size_t mpc = text.find("mpc.");
      if (mpc == std::string::npos) continue;
      size_t eq = text.find('=', mpc);
      if (eq == std::string::npos) continue;
      std::string name = text.substr(mpc + 4, eq - mpc - 4);
      name.erase(std::remove_if(name.begin(), name.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 name.end());
      std::string rest = text.substr(eq + 1);
      size_t bracket = rest.find('[');
      if (bracket == std::string::npos) {
        std::string value = rest;
        value.erase(std::remove_if(
                        value.begin(), value.end(),
                        [](unsigned char c) {
                          return std::isspace(c) || c == ';' || c == '\'';
                        }),
                    value.end());
        double v = 0.0;
        if (parse_field(value, v)) raw.scalars[name] = v;
        continue;
      }
      table_name = name;
      pending_row.clear();
      row_start_line = line_no;
      text = rest.substr(bracket + 1);
    }

    // Inside a table: rows are separated by ';', the table ends at ']'.
    Matrix& mat = raw.tables[table_name];
    for (char c : text) {
      if (c == ']') {
        flush_row(mat);
        table_name.clear();
        break;
      }
      if (c == ';') {
        flush_row(mat);
        row_start_line = line_no;
      } else {
        if (pending_row.empty()) row_start_line = line_no;
        pending_row += c;
      }
    }
  }
  if (!table_name.empty())
    throw ParseError(path, line_no, "unterminated table mpc." + table_name);
  return raw;
}


void require_columns(const RawCase& raw, const std::string& table,
                     const std::vector<double>& row, int line, size_t need) {
  if (row.size() < need)
    throw ParseError(raw.file, line,
                     "mpc." + table + " row has " +
                         std::to_string(row.size()) + " columns, expected " +
                         std::to_string(need));
}

}  // namespace

NetworkCase parse_case(const std::string& path) {
  RawCase raw = read_raw(path);
  NetworkCase net;
  net.name = path;

  auto scalar = raw.scalars.find("baseMVA");
  if (scalar == raw.scalars.end())
    throw ParseError(path, 0, "missing mpc.baseMVA");
  net.base_mva = scalar->second;
  if (net.base_mva <= 0.0) throw ParseError(path, 0, "baseMVA must be > 0");

  auto table = [&](const char* name) -> const Matrix& {
    auto it = raw.tables.find(name);
    if (it == raw.tables.end())
      throw ParseError(path, 0, std::string("missing table mpc.") + name);
    return it->second;
  };

  const Matrix& bus = table("bus");
  for (size_t i = 0; i < bus.rows.size(); ++i) {
    const std::vector<double>& row = bus.rows[i];
    int line = bus.row_lines[i];
    require_columns(raw, "bus", row, line, 13);
    Bus b;
    b.id = static_cast<int>(row[0]);
    int type = static_cast<int>(row[1]);
    if (type < 1 || type > 3)
      throw ParseError(path, line,
                       "bus " + std::to_string(b.id) + " has type " +
                           std::to_string(type) + ", expected 1, 2 or 3");
    b.type = static_cast<BusType>(type);
    b.p_load_mw = row[2];
    b.q_load_mvar = row[3];
    b.shunt_g_mw = row[4];
    b.shunt_b_mvar = row[5];
    b.base_kv = row[9];
    b.v_max_pu = row[11];
    b.v_min_pu = row[12];
    net.buses.push_back(b);
  }

  const Matrix& branch = table("branch");
  for (size_t i = 0; i < branch.rows.size(); ++i) {
    const std::vector<double>& row = branch.rows[i];
    int line = branch.row_lines[i];
    require_columns(raw, "branch", row, line, 11);
    Branch br;
    br.from_bus = static_cast<int>(row[0]);
    br.to_bus = static_cast<int>(row[1]);
    br.r_pu = row[2];
    br.x_pu = row[3];
    br.b_pu = row[4];
    br.rating_mva = row[5];
    if (br.rating_mva < 0.0)
      throw ParseError(path, line, "negative thermal rating on branch " +
                                       std::to_string(br.from_bus) + "-" +
                                       std::to_string(br.to_bus));
    br.tap = row[8];
    br.shift_deg = row[9];
    br.in_service = row[10] != 0.0;
    net.branches.push_back(br);
  }

  const Matrix& gen = table("gen");
  for (size_t i = 0; i < gen.rows.size(); ++i) {
    const std::vector<double>& row = gen.rows[i];
    int line = gen.row_lines[i];
    require_columns(raw, "gen", row, line, 10);
    Generator g;
    g.bus = static_cast<int>(row[0]);
    g.p_mw = row[1];
    g.q_mvar = row[2];
    g.q_max_mvar = row[3];
    g.q_min_mvar = row[4];
    g.v_setpoint_pu = row[5];
    g.in_service = row[7] != 0.0;
    g.p_max_mw = row[8];
    g.p_min_mw = row[9];
    net.generators.push_back(g);
  }

  auto cost_it = raw.tables.find("gencost");
  if (cost_it != raw.tables.end()) {
    const Matrix& cost = cost_it->second;
    if (cost.rows.size() != net.generators.size())
      throw ParseError(path, cost.row_lines.empty() ? 0 : cost.row_lines[0],
                       "mpc.gencost has " + std::to_string(cost.rows.size()) +
                           " rows for " +
                           std::to_string(net.generators.size()) +
                           " generators");
    for (size_t i = 0; i < cost.rows.size(); ++i) {
      const std::vector<double>& row = cost.rows[i];
      int line = cost.row_lines[i];
      require_columns(raw, "gencost", row, line, 4);
      int model = static_cast<int>(row[0]);
      if (model != 2)
        throw ParseError(path, line,
                         "only polynomial cost model 2 is supported, got " +
                             std::to_string(model));
      int ncost = static_cast<int>(row[3]);
      if (ncost < 1)
        throw ParseError(path, line, "gencost needs at least one coefficient");
      require_columns(raw, "gencost", row, line, 4 + ncost);
      GenCost gc;
      gc.startup = row[1];
      gc.shutdown = row[2];
      gc.coefficients.assign(row.begin() + 4, row.begin() + 4 + ncost);
      net.generators[i].cost = std::move(gc);
    }
  }

  validate_case(net);
  return net;
}

void validate_case(const NetworkCase& net) {
  if (net.buses.empty()) throw StructuralError("case has no buses");

  int slack_count = 0;
  for (size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    if (b.type == BusType::slack) ++slack_count;
    for (size_t k = i + 1; k < net.buses.size(); ++k)
      if (net.buses[k].id == b.id)
        throw StructuralError("duplicate bus id " + std::to_string(b.id));
  }
  if (slack_count == 0) throw StructuralError("case has no slack bus");
  if (slack_count > 1)
    throw StructuralError("case has " + std::to_string(slack_count) +
                          " slack buses, expected exactly one");

  for (const Branch& br : net.branches) {
    if (net.bus_index(br.from_bus) < 0 || net.bus_index(br.to_bus) < 0)
      throw StructuralError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) +
                            " references an unknown bus");
    if (br.rating_mva < 0.0)
      throw StructuralError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) +
                            " has a negative thermal rating");
    if (br.in_service && br.r_pu == 0.0 && br.x_pu == 0.0)
      throw StructuralError("branch " + std::to_string(br.from_bus) + "-" +
                            std::to_string(br.to_bus) +
                            " has zero impedance");
  }

  for (const Generator& g : net.generators)
    if (net.bus_index(g.bus) < 0)
      throw StructuralError("generator references unknown bus " +
                            std::to_string(g.bus));

  // Connectivity over in-service branches, breadth-first from the slack.
  size_t n = net.buses.size();
  std::vector<std::vector<int>> adjacency(n);
  for (const Branch& br : net.branches) {
    if (!br.in_service) continue;
    int f = net.bus_index(br.from_bus);
    int t = net.bus_index(br.to_bus);
    adjacency[f].push_back(t);
    adjacency[t].push_back(f);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> queue{net.slack_index()};
  seen[net.slack_index()] = 1;
  for (size_t head = 0; head < queue.size(); ++head)
    for (int next : adjacency[queue[head]])
      if (!seen[next]) {
        seen[next] = 1;
        queue.push_back(next);
      }
  for (size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw StructuralError("bus " + std::to_string(net.buses[i].id) +
                            " is disconnected from the slack bus");
}

}  // namespace loadshift::grid
