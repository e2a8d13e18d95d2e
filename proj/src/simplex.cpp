#include "loadshift/opt/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <vector>

namespace loadshift {

namespace {

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

/// Product-form update factor: after a pivot with FTRAN'd column w at basis
/// position p, the new basis inverse is E^-1 * old, with E = I + (w-e_p)e_p^T.
struct Eta {
  int pivot_pos = 0;
  double pivot_val = 1.0;
  std::vector<std::pair<int, double>> column;  // nonzeros of w
};

class Simplex {
 public:
  Simplex(const LpProblem& problem, const SimplexOptions& options)
      : p_(problem), opt_(options) {}

  LpSolution run() {
    build_columns();
    init_state();
    if (m_ == 0) return solve_without_rows();

    if (!refactorize()) return fail(LpStatus::numerical_failure);
    compute_basic_values();

    // Phase 2 can drift slightly out of feasibility through tolerance
    // stacking; re-entering phase 1 from the current basis repairs it.
    for (int attempt = 0; attempt < 3; ++attempt) {
      if (total_infeasibility() > phase1_exit_tol()) {
        LpStatus st = iterate(true);
        if (st != LpStatus::optimal) return fail(st);
        if (total_infeasibility() > phase1_exit_tol())
          return fail(LpStatus::infeasible);
      }
      LpStatus st = iterate(false);
      if (st != LpStatus::optimal) return fail(st);
      if (!refactorize()) return fail(LpStatus::numerical_failure);
      compute_basic_values();
      if (total_infeasibility() <= phase1_exit_tol()) return extract();
    }
    return fail(LpStatus::numerical_failure);
  }

 private:
  // --- setup -------------------------------------------------------------

  void build_columns() {
    n_ = p_.num_vars;
    m_ = static_cast<int>(p_.rows.size());
    total_ = n_ + m_;

    col_start_.assign(n_ + 1, 0);
    for (const auto& row : p_.rows)
      for (const auto& [j, a] : row.terms)
        if (a != 0.0) ++col_start_[j + 1];
    for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (const auto& [j, a] : p_.rows[i].terms)
        if (a != 0.0) {
          col_row_[fill[j]] = i;
          col_val_[fill[j]] = a;
          ++fill[j];
        }

    lo_.assign(total_, 0.0);
    up_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p_.lower[j];
      up_[j] = p_.upper[j];
      cost_[j] = p_.cost[j];
    }
    rhs_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      rhs_[i] = p_.rows[i].rhs;
      int s = n_ + i;
      switch (p_.rows[i].sense) {
        case RowSense::le:
          lo_[s] = 0.0;
          up_[s] = kInf;
          break;
        case RowSense::ge:
          lo_[s] = -kInf;
          up_[s] = 0.0;
          break;
        case RowSense::eq:
          lo_[s] = 0.0;
          up_[s] = 0.0;
          break;
      }
    }
  }

  void init_state() {
    state_.assign(total_, VarState::at_lower);
    for (int j = 0; j < total_; ++j) {
      if (std::isfinite(lo_[j]))
        state_[j] = VarState::at_lower;
      else if (std::isfinite(up_[j]))
        state_[j] = VarState::at_upper;
      else
        state_[j] = VarState::free_zero;
    }
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      basis_[i] = n_ + i;
      state_[n_ + i] = VarState::basic;
    }
    in_basis_pos_.assign(total_, -1);
    for (int i = 0; i < m_; ++i) in_basis_pos_[basis_[i]] = i;
    xb_.assign(m_, 0.0);
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case VarState::at_lower: return lo_[j];
      case VarState::at_upper: return up_[j];
      default: return 0.0;
    }
  }

  // --- basis algebra -----------------------------------------------------

  bool refactorize() {
    etas_.clear();
    Eigen::SparseMatrix<double> B(m_, m_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(m_) * 3);
    for (int i = 0; i < m_; ++i) {
      int j = basis_[i];
      if (j >= n_) {
        trips.emplace_back(j - n_, i, 1.0);
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          trips.emplace_back(col_row_[k], i, col_val_[k]);
      }
    }
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    return lu_.info() == Eigen::Success;
  }

  /// Solves B w = v in place.
  void ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v);
    for (const Eta& e : etas_) {
      double t = v[e.pivot_pos] / e.pivot_val;
      if (t != 0.0) {
        for (const auto& [i, w] : e.column) v[i] -= w * t;
      }
      v[e.pivot_pos] = t;
    }
  }

  /// Solves B^T y = v in place.
  void btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dot = 0.0;
      for (const auto& [i, w] : it->column) dot += w * v[i];
      v[it->pivot_pos] -= (dot - v[it->pivot_pos]) / it->pivot_val;
    }
    v = lu_.transpose().solve(v);
  }

  void compute_basic_values() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = rhs_[i];
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic) continue;
      double v = nonbasic_value(j);
      if (v == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= v;
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
          rhs[col_row_[k]] -= col_val_[k] * v;
      }
    }
    ftran(rhs);
    for (int i = 0; i < m_; ++i) xb_[i] = rhs[i];
  }

  Eigen::VectorXd column_dense(int j) const {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
    if (j >= n_) {
      col[j - n_] = 1.0;
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        col[col_row_[k]] = col_val_[k];
    }
    return col;
  }

  double column_dot(int j, const Eigen::VectorXd& y) const {
    if (j >= n_) return y[j - n_];
    double dot = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
      dot += col_val_[k] * y[col_row_[k]];
    return dot;
  }

  // --- infeasibility bookkeeping ------------------------------------------

  double infeasibility_of(int pos) const {
    int j = basis_[pos];
    if (xb_[pos] < lo_[j] - opt_.feas_tol) return lo_[j] - xb_[pos];
    if (xb_[pos] > up_[j] + opt_.feas_tol) return xb_[pos] - up_[j];
    return 0.0;
  }

  double total_infeasibility() const {
    double total = 0.0;
    for (int i = 0; i < m_; ++i) total += infeasibility_of(i);
    return total;
  }

  double phase1_exit_tol() const { return opt_.feas_tol * (1.0 + m_ * 0.01); }

  // --- main loop -----------------------------------------------------------

  LpStatus iterate(bool phase1) {
    int stall = 0;
    bool bland = false;
    while (true) {
      if (++iterations_ > opt_.max_iterations)
        return LpStatus::iteration_limit;

      if (phase1 && total_infeasibility() <= phase1_exit_tol())
        return LpStatus::optimal;

      Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
      if (phase1) {
        for (int i = 0; i < m_; ++i) {
          int j = basis_[i];
          if (xb_[i] < lo_[j] - opt_.feas_tol)
            y[i] = -1.0;
          else if (xb_[i] > up_[j] + opt_.feas_tol)
            y[i] = 1.0;
        }
      } else {
        for (int i = 0; i < m_; ++i) y[i] = cost_[basis_[i]];
      }
      btran(y);

      int entering = -1;
      int direction = 0;
      double best_score = bland ? 0.0 : opt_.opt_tol;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (lo_[j] == up_[j]) continue;  // fixed, cannot move
        double z = column_dot(j, y);
        double score;
        int dir;
        if (phase1) {
          // Moving x_j by dir*theta changes infeasibility at rate -dir*z.
          if (state_[j] == VarState::at_lower) {
            score = z;
            dir = 1;
          } else if (state_[j] == VarState::at_upper) {
            score = -z;
            dir = -1;
          } else {
            score = std::abs(z);
            dir = z > 0.0 ? 1 : -1;
          }
        } else {
          double d = cost_[j] - z;
          if (state_[j] == VarState::at_lower) {
            score = -d;
            dir = 1;
          } else if (state_[j] == VarState::at_upper) {
            score = d;
            dir = -1;
          } else {
            score = std::abs(d);
            dir = d < 0.0 ? 1 : -1;
          }
        }
        double threshold = bland ? opt_.opt_tol : best_score;
        if (score > threshold) {
          entering = j;
          direction = dir;
          best_score = score;
          if (bland) break;
        }
      }

      if (entering < 0) {
        if (phase1)
          return total_infeasibility() <= phase1_exit_tol()
                     ? LpStatus::optimal
                     : LpStatus::infeasible;
        return LpStatus::optimal;
      }

      Eigen::VectorXd w = column_dense(entering);
      ftran(w);

      // Ratio test: smallest step that hits a bound.
      double flip_theta = up_[entering] - lo_[entering];  // may be +inf
      double best_theta = flip_theta;
      int leave_pos = -1;
      bool leave_at_upper = false;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        double wi = w[i];
        if (std::abs(wi) < opt_.pivot_tol) continue;
        int j = basis_[i];
        double rate = -direction * wi;  // d(xb_i)/d(theta)
        double theta = kInf;
        bool to_upper = false;
        if (phase1 && xb_[i] < lo_[j] - opt_.feas_tol) {
          if (rate > 0.0) {
            theta = (lo_[j] - xb_[i]) / rate;
            to_upper = false;
          }
        } else if (phase1 && xb_[i] > up_[j] + opt_.feas_tol) {
          if (rate < 0.0) {
            theta = (up_[j] - xb_[i]) / rate;
            to_upper = true;
          }
        } else if (rate > 0.0 && std::isfinite(up_[j])) {
          theta = (up_[j] - xb_[i] + opt_.feas_tol) / rate;
          to_upper = true;
        } else if (rate < 0.0 && std::isfinite(lo_[j])) {
          theta = (lo_[j] - xb_[i] - opt_.feas_tol) / rate;
          to_upper = false;
        }
        if (theta >= best_theta) {
          // Tie-breaking: prefer larger pivots (stability) or, under
          // Bland's rule, the smallest variable index (anti-cycling).
          bool tie = theta < best_theta + 1e-10 && leave_pos >= 0;
          if (!tie) continue;
          bool take = bland ? j < basis_[leave_pos]
                            : std::abs(wi) > std::abs(best_pivot);
          if (!take) continue;
        }
        best_theta = std::max(0.0, theta);
        leave_pos = i;
        leave_at_upper = to_upper;
        best_pivot = wi;
      }

      if (leave_pos < 0 && !std::isfinite(best_theta)) {
        if (phase1) return LpStatus::numerical_failure;
        return LpStatus::unbounded;
      }

      double theta = std::isfinite(best_theta) ? std::max(0.0, best_theta)
                                               : 0.0;
      if (theta <= 1e-10) {
        if (++stall > 64) bland = true;
      } else {
        stall = 0;
        bland = false;
      }

      // Apply the step.
      if (theta > 0.0) {
        for (int i = 0; i < m_; ++i) xb_[i] -= direction * theta * w[i];
      }
      if (leave_pos < 0) {
        // Bound flip: entering moves to its opposite bound.
        state_[entering] = direction > 0 ? VarState::at_upper
                                         : VarState::at_lower;
        continue;
      }

      int leaving = basis_[leave_pos];
      double enter_value = nonbasic_value(entering) + direction * theta;
      state_[leaving] = leave_at_upper ? VarState::at_upper
                                       : VarState::at_lower;
      if (!std::isfinite(up_[leaving]) && leave_at_upper)
        state_[leaving] = VarState::free_zero;
      if (!std::isfinite(lo_[leaving]) && !leave_at_upper)
        state_[leaving] = VarState::free_zero;
      in_basis_pos_[leaving] = -1;
      state_[entering] = VarState::basic;
      basis_[leave_pos] = entering;
      in_basis_pos_[entering] = leave_pos;
      xb_[leave_pos] = enter_value;

      Eta eta;
      eta.pivot_pos = leave_pos;
      eta.pivot_val = w[leave_pos];
      for (int i = 0; i < m_; ++i)
        if (i == leave_pos || std::abs(w[i]) > 1e-12)
          eta.column.emplace_back(i, w[i]);
      etas_.push_back(std::move(eta));

      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactorize()) return LpStatus::numerical_failure;
        compute_basic_values();
      }
    }
  }

  // --- results -------------------------------------------------------------

  LpSolution extract() {
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.iterations = iterations_;
    sol.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j)
      if (state_[j] != VarState::basic) sol.x[j] = nonbasic_value(j);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.x[basis_[i]] = xb_[i];
    for (int j = 0; j < n_; ++j)
      sol.x[j] = std::clamp(sol.x[j], lo_[j], up_[j]);

    // Independent residual check against the original rows.
    double scale = 1.0;
    for (int i = 0; i < m_; ++i) scale = std::max(scale, std::abs(rhs_[i]));
    for (int i = 0; i < m_; ++i) {
      double lhs = 0.0;
      for (const auto& [j, a] : p_.rows[i].terms) lhs += a * sol.x[j];
      double resid = lhs - rhs_[i];
      bool bad = false;
      switch (p_.rows[i].sense) {
        case RowSense::le: bad = resid > 1e-5 * scale; break;
        case RowSense::ge: bad = resid < -1e-5 * scale; break;
        case RowSense::eq: bad = std::abs(resid) > 1e-5 * scale; break;
      }
      if (bad) return fail(LpStatus::numerical_failure);
    }

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += p_.cost[j] * sol.x[j];
    sol.objective = obj;
    return sol;
  }

  LpSolution solve_without_rows() {
    LpSolution sol;
    sol.iterations = 0;
    sol.x.assign(n_, 0.0);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) {
      double v;
      if (p_.cost[j] > 0.0)
        v = p_.lower[j];
      else if (p_.cost[j] < 0.0)
        v = p_.upper[j];
      else
        v = std::isfinite(p_.lower[j]) ? p_.lower[j]
                                       : std::min(0.0, p_.upper[j]);
      if (!std::isfinite(v)) {
        if (p_.cost[j] == 0.0) {
          v = 0.0;
        } else {
          sol.status = LpStatus::unbounded;
          return sol;
        }
      }
      if (p_.lower[j] > p_.upper[j]) {
        sol.status = LpStatus::infeasible;
        return sol;
      }
      sol.x[j] = v;
      obj += p_.cost[j] * v;
    }
    sol.status = LpStatus::optimal;
    sol.objective = obj;
    return sol;
  }

  LpSolution fail(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    return sol;
  }

  const LpProblem& p_;
  const SimplexOptions& opt_;
  int n_ = 0;
  int m_ = 0;
  int total_ = 0;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, up_, cost_, rhs_;
  std::vector<VarState> state_;
  std::vector<int> basis_, in_basis_pos_;
  std::vector<double> xb_;
  std::vector<Eta> etas_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  long long iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options) {
  for (int j = 0; j < problem.num_vars; ++j)
    if (problem.lower[j] > problem.upper[j] + 1e-12) {
      LpSolution sol;
      sol.status = LpStatus::infeasible;
      return sol;
    }
  Simplex simplex(problem, options);
  return simplex.run();
}

LoweredProgram lower_program(const MathProgram& program) {
  program.check_well_formed();
  LoweredProgram out;
  out.num_original = static_cast<int>(program.variables.size());
  out.max_constant = program.objective_constant;

  LpProblem& lp = out.lp;
  lp.num_vars = out.num_original;
  lp.lower.resize(lp.num_vars);
  lp.upper.resize(lp.num_vars);
  lp.cost.resize(lp.num_vars);
  out.is_integer.resize(lp.num_vars);
  for (int j = 0; j < lp.num_vars; ++j) {
    lp.lower[j] = program.variables[j].lb;
    lp.upper[j] = program.variables[j].ub;
    lp.cost[j] = -program.objective[j];
    out.is_integer[j] = program.variables[j].kind == VarKind::integer ? 1 : 0;
  }
  for (const LinearRow& row : program.rows) {
    LpProblem::Row lp_row;
    lp_row.sense = row.sense;
    lp_row.rhs = row.rhs;
    lp_row.terms = row.terms;
    lp.rows.push_back(std::move(lp_row));
  }
  for (const PwlCost& pwl : program.pwl_costs) {
    double lb = kInf;
    double ub = -kInf;
    double v_lo = program.variables[pwl.var].lb;
    double v_hi = program.variables[pwl.var].ub;
    for (const auto& [slope, intercept] : pwl.segments) {
      lb = std::min(lb, std::min(slope * v_lo + intercept,
                                 slope * v_hi + intercept));
      ub = std::max(ub, std::max(slope * v_lo + intercept,
                                 slope * v_hi + intercept));
    }
    int q = lp.num_vars++;
    lp.lower.push_back(lb);
    lp.upper.push_back(ub);
    lp.cost.push_back(pwl.weight);  // cost in min space
    out.is_integer.push_back(0);
    for (const auto& [slope, intercept] : pwl.segments) {
      LpProblem::Row row;
      row.sense = RowSense::le;
      row.rhs = -intercept;
      row.terms = {{pwl.var, slope}, {q, -1.0}};
      lp.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace loadshift
