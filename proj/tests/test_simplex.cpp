#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "loadshift/opt/simplex.hpp"

using namespace loadshift;

namespace {

/// 64-bit LCG shared with tests/oracles/lp_oracle.py; both sides must draw
/// identical instances for the frozen objectives to apply.
struct Lcg {
  uint64_t state;
  explicit Lcg(uint64_t seed) : state(seed) {}
  uint64_t next_int(uint64_t k) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (state >> 33) % k;
  }
};

LpProblem::Row row(RowSense sense, double rhs,
                   std::vector<std::pair<int, double>> terms) {
  LpProblem::Row r;
  r.sense = sense;
  r.rhs = rhs;
  r.terms = std::move(terms);
  return r;
}

LpProblem make_random_lp(uint64_t seed) {
  Lcg rng(seed);
  int n = 3 + static_cast<int>(rng.next_int(4));
  int m = 2 + static_cast<int>(rng.next_int(4));
  LpProblem lp;
  lp.num_vars = n;
  std::vector<double> ub(n), x0(n);
  for (int i = 0; i < n; ++i) ub[i] = 1.0 + rng.next_int(9);
  for (int i = 0; i < n; ++i)
    x0[i] = ub[i] * (0.25 + 0.25 * rng.next_int(3));
  std::vector<std::vector<double>> a(m, std::vector<double>(n));
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k)
      a[i][k] = static_cast<double>(rng.next_int(7)) - 3.0;
  for (int i = 0; i < m; ++i) {
    double rhs = 0.0;
    for (int k = 0; k < n; ++k) rhs += a[i][k] * x0[k];
    rhs += rng.next_int(3);
    LpProblem::Row r;
    r.sense = RowSense::le;
    r.rhs = rhs;
    for (int k = 0; k < n; ++k)
      if (a[i][k] != 0.0) r.terms.emplace_back(k, a[i][k]);
    lp.rows.push_back(std::move(r));
  }
  lp.cost.resize(n);
  for (int i = 0; i < n; ++i)
    lp.cost[i] = static_cast<double>(rng.next_int(11)) - 5.0;
  lp.lower.assign(n, 0.0);
  lp.upper = ub;
  return lp;
}

double row_activity(const LpProblem::Row& r, const std::vector<double>& x) {
  double v = 0.0;
  for (auto [var, coef] : r.terms) v += coef * x[var];
  return v;
}

void check_feasible(const LpProblem& lp, const LpSolution& sol,
                    double tol = 1e-7) {
  REQUIRE(sol.x.size() == static_cast<size_t>(lp.num_vars));
  for (int i = 0; i < lp.num_vars; ++i) {
    CHECK(sol.x[i] >= lp.lower[i] - tol);
    CHECK(sol.x[i] <= lp.upper[i] + tol);
  }
  for (const auto& r : lp.rows) {
    double v = row_activity(r, sol.x);
    if (r.sense == RowSense::le) CHECK(v <= r.rhs + tol);
    if (r.sense == RowSense::ge) CHECK(v >= r.rhs - tol);
    if (r.sense == RowSense::eq) CHECK(std::abs(v - r.rhs) <= tol);
  }
}

}  // namespace

TEST_CASE("two-variable production mix") {
  LpProblem lp;
  lp.num_vars = 2;
  lp.cost = {-3.0, -2.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kInf, kInf};
  lp.rows.push_back(row(RowSense::le, 4.0, {{0, 1.0}, {1, 1.0}}));
  lp.rows.push_back(row(RowSense::le, 6.0, {{0, 1.0}, {1, 3.0}}));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-12.0));
  CHECK(sol.x[0] == doctest::Approx(4.0));
  CHECK(std::abs(sol.x[1]) <= 1e-9);
  check_feasible(lp, sol);
}

TEST_CASE("bounded diet with a strict lower-bounded variable") {
  LpProblem lp;
  lp.num_vars = 3;
  lp.cost = {2.0, 3.0, 1.0};
  lp.lower = {0.0, 0.0, 1.0};
  lp.upper = {4.0, 5.0, 8.0};
  lp.rows.push_back(
      row(RowSense::ge, 10.0, {{0, 1.0}, {1, 1.0}, {2, 1.0}}));
  lp.rows.push_back(row(RowSense::ge, -2.0, {{0, 1.0}, {1, -1.0}}));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(12.0));
  check_feasible(lp, sol);
}

TEST_CASE("free variable with equality rows") {
  LpProblem lp;
  lp.num_vars = 3;
  lp.cost = {1.0, 2.0, -1.0};
  lp.lower = {0.0, 0.0, -kInf};
  lp.upper = {kInf, kInf, kInf};
  lp.rows.push_back(row(RowSense::eq, 5.0, {{0, 1.0}, {1, 1.0}, {2, 1.0}}));
  lp.rows.push_back(row(RowSense::eq, 1.0, {{1, 1.0}, {2, -1.0}}));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(4.0));
  check_feasible(lp, sol);
}

TEST_CASE("degenerate corner does not cycle") {
  LpProblem lp;
  lp.num_vars = 2;
  lp.cost = {-1.0, -1.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {1.0, 1.0};
  lp.rows.push_back(row(RowSense::le, 1.0, {{0, 1.0}}));
  lp.rows.push_back(row(RowSense::le, 1.0, {{1, 1.0}}));
  lp.rows.push_back(row(RowSense::le, 2.0, {{0, 1.0}, {1, 1.0}}));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-2.0));
}

TEST_CASE("mixed senses with an equality") {
  LpProblem lp;
  lp.num_vars = 3;
  lp.cost = {-1.0, -4.0, -2.0};
  lp.lower = {0.0, 0.0, 0.0};
  lp.upper = {5.0, 6.0, 4.0};
  lp.rows.push_back(row(RowSense::le, 7.0, {{0, 1.0}, {1, 1.0}, {2, 1.0}}));
  lp.rows.push_back(row(RowSense::ge, -3.0, {{0, 1.0}, {1, -1.0}}));
  lp.rows.push_back(row(RowSense::eq, 4.0, {{1, 1.0}, {2, 1.0}}));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-19.0));
  check_feasible(lp, sol);
}

TEST_CASE("conflicting rows are infeasible") {
  LpProblem lp;
  lp.num_vars = 2;
  lp.cost = {1.0, 1.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kInf, kInf};
  lp.rows.push_back(row(RowSense::le, 1.0, {{0, 1.0}, {1, 1.0}}));
  lp.rows.push_back(row(RowSense::ge, 3.0, {{0, 1.0}, {1, 1.0}}));
  LpSolution sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::infeasible);
}

TEST_CASE("descent along an uncapped variable is unbounded") {
  LpProblem lp;
  lp.num_vars = 2;
  lp.cost = {-1.0, 0.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kInf, kInf};
  lp.rows.push_back(row(RowSense::le, 1.0, {{1, 1.0}}));
  LpSolution sol = solve_lp(lp);
  CHECK(sol.status == LpStatus::unbounded);
}

TEST_CASE("empty constraint set optimizes at bounds") {
  LpProblem lp;
  lp.num_vars = 3;
  lp.cost = {2.0, -3.0, 0.0};
  lp.lower = {-1.0, -2.0, 0.5};
  lp.upper = {4.0, 5.0, 0.5};
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0 * -1.0 + -3.0 * 5.0));
  CHECK(sol.x[2] == doctest::Approx(0.5));
}

TEST_CASE("crossing bound gap is rejected as infeasible") {
  LpProblem lp;
  lp.num_vars = 1;
  lp.cost = {1.0};
  lp.lower = {2.0};
  lp.upper = {1.0};
  CHECK(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("seeded instances match the frozen reference objectives") {
  struct Expect {
    uint64_t seed;
    double objective;
  };
  // Frozen from tests/oracles/lp_oracle.py (scipy HiGHS).
  const Expect expected[] = {
      {1, -22.25},
      {2, -12.357142857142858},
      {3, 2.9375},
      {4, -54.0},
      {5, -31.0},
  };
  for (const Expect& e : expected) {
    CAPTURE(e.seed);
    LpProblem lp = make_random_lp(e.seed);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective ==
          doctest::Approx(e.objective).epsilon(1e-9));
    check_feasible(lp, sol);
  }
}

TEST_CASE("random instances stay feasible and beat their seed point") {
  for (uint64_t seed = 10; seed < 60; ++seed) {
    CAPTURE(seed);
    LpProblem lp = make_random_lp(seed);
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);
    check_feasible(lp, sol);
    // x0 used by the generator is feasible by construction; the optimum
    // cannot be worse.  Reconstruct it by replaying the generator draws.
    Lcg rng(seed);
    int n = 3 + static_cast<int>(rng.next_int(4));
    rng.next_int(4);
    std::vector<double> ub(n), x0(n);
    for (int i = 0; i < n; ++i) ub[i] = 1.0 + rng.next_int(9);
    for (int i = 0; i < n; ++i)
      x0[i] = ub[i] * (0.25 + 0.25 * rng.next_int(3));
    double at_x0 = 0.0;
    for (int i = 0; i < n; ++i) at_x0 += lp.cost[i] * x0[i];
    CHECK(sol.objective <= at_x0 + 1e-9);
  }
}

TEST_CASE("frequent refactorization agrees with the default") {
  for (uint64_t seed : {3, 17, 23}) {
    CAPTURE(seed);
    LpProblem lp = make_random_lp(seed);
    LpSolution well_settled = solve_lp(lp);
    SimplexOptions tight;
    tight.refactor_interval = 1;
    LpSolution refreshed = solve_lp(lp, tight);
    REQUIRE(well_settled.status == LpStatus::optimal);
    REQUIRE(refreshed.status == LpStatus::optimal);
    CHECK(refreshed.objective ==
          doctest::Approx(well_settled.objective).epsilon(1e-9));
  }
}

TEST_CASE("solves are deterministic") {
  LpProblem lp = make_random_lp(42);
  LpSolution first = solve_lp(lp);
  LpSolution second = solve_lp(lp);
  REQUIRE(first.status == second.status);
  CHECK(first.iterations == second.iterations);
  REQUIRE(first.x.size() == second.x.size());
  for (size_t i = 0; i < first.x.size(); ++i) CHECK(first.x[i] == second.x[i]);
}
