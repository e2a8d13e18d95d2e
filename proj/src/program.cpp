#include "loadshift/opt/program.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "loadshift/core/csv.hpp"
#include "loadshift/core/errors.hpp"

namespace loadshift {

int MathProgram::count_variables_with_prefix(const std::string& prefix) const {
  int count = 0;
  for (const Variable& v : variables)
    if (v.name.rfind(prefix, 0) == 0) ++count;
  return count;
}

int MathProgram::count_rows_with_prefix(const std::string& prefix) const {
  int count = 0;
  for (const LinearRow& row : rows)
    if (row.tag.rfind(prefix, 0) == 0) ++count;
  return count;
}

void MathProgram::check_well_formed() const {
  const int n = static_cast<int>(variables.size());
  if (static_cast<int>(objective.size()) != n)
    throw StructuralError("objective length does not match variable count");
  for (const Variable& v : variables) {
    if (v.lb > v.ub)
      throw StructuralError("variable " + v.name + " has lb > ub");
    if (std::isnan(v.lb) || std::isnan(v.ub))
      throw StructuralError("variable " + v.name + " has NaN bound");
  }
  for (const LinearRow& row : rows) {
    for (const auto& [j, a] : row.terms) {
      if (j < 0 || j >= n)
        throw StructuralError("row " + row.tag +
                              " references unknown variable " +
                              std::to_string(j));
      if (std::isnan(a))
        throw StructuralError("row " + row.tag + " has NaN coefficient");
    }
  }
  for (const PwlCost& pwl : pwl_costs) {
    if (pwl.var < 0 || pwl.var >= n)
      throw StructuralError("piecewise cost references unknown variable " +
                            std::to_string(pwl.var));
    if (pwl.weight < 0.0)
      throw StructuralError("piecewise cost weight must be nonnegative");
    if (pwl.segments.empty())
      throw StructuralError("piecewise cost has no segments");
    for (size_t k = 1; k < pwl.segments.size(); ++k)
      if (pwl.segments[k].first < pwl.segments[k - 1].first - 1e-12)
        throw StructuralError(
            "piecewise cost segments must have nondecreasing slopes");
  }
}

namespace {

void write_terms(std::ofstream& out,
                 const std::vector<std::pair<int, double>>& terms,
                 const std::vector<Variable>& vars) {
  bool first = true;
  for (const auto& [j, a] : terms) {
    if (a == 0.0) continue;
    double mag = std::abs(a);
    out << (a < 0.0 ? (first ? "- " : " - ") : (first ? "" : " + "));
    out << csv::format_number(mag) << ' ' << vars[j].name;
    first = false;
  }
  if (first) out << "0 " << vars[0].name;
}

}  // namespace

void write_lp_format(const MathProgram& program, const std::string& path) {
  program.check_well_formed();
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");

  // Piecewise costs are lowered to explicit epigraph variables q so the file
  // is a plain MILP any external solver can consume.
  std::vector<Variable> vars = program.variables;
  std::vector<double> obj = program.objective;
  std::vector<LinearRow> rows = program.rows;
  for (size_t k = 0; k < program.pwl_costs.size(); ++k) {
    const PwlCost& pwl = program.pwl_costs[k];
    Variable q;
    q.name = "q_" + std::to_string(k);
    q.kind = VarKind::continuous;
    q.lb = 0.0;
    q.ub = std::numeric_limits<double>::infinity();
    int q_id = static_cast<int>(vars.size());
    vars.push_back(q);
    obj.push_back(-pwl.weight);
    int seg = 0;
    for (const auto& [slope, intercept] : pwl.segments) {
      LinearRow row;
      row.tag = "pwl_" + std::to_string(k) + "_" + std::to_string(seg++);
      row.sense = RowSense::le;
      row.rhs = -intercept;
      row.terms = {{pwl.var, slope}, {q_id, -1.0}};
      rows.push_back(std::move(row));
    }
  }

  out << "Maximize\n obj: ";
  bool first = true;
  for (size_t j = 0; j < vars.size(); ++j) {
    if (obj[j] == 0.0) continue;
    double mag = std::abs(obj[j]);
    out << (obj[j] < 0.0 ? (first ? "- " : " - ") : (first ? "" : " + "));
    out << csv::format_number(mag) << ' ' << vars[j].name;
    first = false;
  }
  if (first) out << "0 " << (vars.empty() ? "x_none" : vars[0].name);
  out << "\nSubject To\n";
  for (const LinearRow& row : rows) {
    out << ' ' << row.tag << ": ";
    write_terms(out, row.terms, vars);
    switch (row.sense) {
      case RowSense::le: out << " <= "; break;
      case RowSense::ge: out << " >= "; break;
      case RowSense::eq: out << " = "; break;
    }
    out << csv::format_number(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const Variable& v : vars) {
    if (std::isinf(v.lb) && std::isinf(v.ub)) {
      out << ' ' << v.name << " free\n";
    } else {
      out << ' ';
      if (std::isinf(v.lb))
        out << "-inf";
      else
        out << csv::format_number(v.lb);
      out << " <= " << v.name << " <= ";
      if (std::isinf(v.ub))
        out << "+inf";
      else
        out << csv::format_number(v.ub);
      out << '\n';
    }
  }
  bool any_int = false;
  for (const Variable& v : vars)
    if (v.kind == VarKind::integer) any_int = true;
  if (any_int) {
    out << "Generals\n";
    for (const Variable& v : vars)
      if (v.kind == VarKind::integer) out << ' ' << v.name << '\n';
  }
  out << "End\n";
}

}  // namespace loadshift
