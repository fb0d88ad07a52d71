#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "uavnoma/milp.hpp"

using namespace uavnoma;

namespace {

// Independent LP oracle: enumerate every basic point (n active constraints
// drawn from rows and bounds), keep the feasible ones, return the best
// objective. Exponential, so only for small instances.
struct DenseLp {
  int n = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> rows;  // a.x <= b
  std::vector<double> rhs;
  std::vector<double> lo, hi;
};

bool solve_square(std::vector<std::vector<double>> m, std::vector<double> b,
                  std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  x.assign(n, 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-11;
    for (int r = col; r < n; ++r)
      if (std::fabs(m[r][col]) > best) {
        best = std::fabs(m[r][col]);
        piv = r;
      }
    if (piv < 0) return false;
    std::swap(m[col], m[piv]);
    std::swap(b[col], b[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int i = 0; i < n; ++i) x[i] = b[i] / m[i][i];
  return true;
}

double vertex_enumeration_best(const DenseLp& lp) {
  // candidate active constraints: each row, each bound
  struct Con {
    std::vector<double> a;
    double b;
  };
  std::vector<Con> cons;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) cons.push_back({lp.rows[r], lp.rhs[r]});
  for (int v = 0; v < lp.n; ++v) {
    std::vector<double> e(lp.n, 0.0);
    e[v] = 1.0;
    cons.push_back({e, lp.lo[v]});
    cons.push_back({e, lp.hi[v]});
  }
  const int m = static_cast<int>(cons.size());
  std::vector<int> pick(lp.n);
  double best = -std::numeric_limits<double>::infinity();

  std::vector<int> idx(lp.n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == lp.n) {
      std::vector<std::vector<double>> m2(lp.n);
      std::vector<double> b2(lp.n);
      for (int k = 0; k < lp.n; ++k) {
        m2[k] = cons[idx[k]].a;
        b2[k] = cons[idx[k]].b;
      }
      std::vector<double> x;
      if (!solve_square(m2, b2, x)) return;
      for (int v = 0; v < lp.n; ++v)
        if (x[v] < lp.lo[v] - 1e-8 || x[v] > lp.hi[v] + 1e-8) return;
      for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        double act = 0.0;
        for (int v = 0; v < lp.n; ++v) act += lp.rows[r][v] * x[v];
        if (act > lp.rhs[r] + 1e-8) return;
      }
      double obj = 0.0;
      for (int v = 0; v < lp.n; ++v) obj += lp.c[v] * x[v];
      best = std::max(best, obj);
      return;
    }
    for (int k = start; k < m; ++k) {
      idx[depth] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

MilpProblem from_dense(const DenseLp& lp) {
  MilpProblem p;
  for (int v = 0; v < lp.n; ++v) p.add_var("x" + std::to_string(v), lp.lo[v], lp.hi[v], false, lp.c[v]);
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    std::vector<std::pair<int, double>> coeffs;
    for (int v = 0; v < lp.n; ++v)
      if (lp.rows[r][v] != 0.0) coeffs.push_back({v, lp.rows[r][v]});
    p.add_row(coeffs, Relation::LessEq, lp.rhs[r]);
  }
  return p;
}

}  // namespace

TEST_CASE("trivial LP optimum") {
  MilpProblem p;
  const int x = p.add_var("x", 0, 1, false, 1.0);
  const int y = p.add_var("y", 0, 1, false, 1.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, Relation::LessEq, 1.0);
  const MilpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.dual_feasible);
}

TEST_CASE("infeasible LP detected") {
  MilpProblem p;
  const int x = p.add_var("x", 0, 10, false, 1.0);
  p.add_row({{x, 1.0}}, Relation::GreaterEq, 2.0);
  p.add_row({{x, 1.0}}, Relation::LessEq, 1.0);
  CHECK(solve_lp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded LP reported as its own status") {
  MilpProblem p;
  p.add_var("x", 0, std::numeric_limits<double>::infinity(), false, 1.0);
  CHECK(solve_lp(p).status == SolveStatus::Unbounded);
}

TEST_CASE("equality rows handled through phase 1") {
  MilpProblem p;
  const int x = p.add_var("x", 0, 10, false, 2.0);
  const int y = p.add_var("y", 0, 10, false, 1.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, Relation::Equal, 4.0);
  p.add_row({{x, 1.0}}, Relation::LessEq, 3.0);
  const MilpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.0 * 3.0 + 1.0).epsilon(1e-9));
  CHECK(s.values[x] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(s.values[y] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("randomized dense LPs match vertex enumeration") {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int solved = 0;
  for (int inst = 0; inst < 25; ++inst) {
    DenseLp lp;
    lp.n = 4 + inst % 2;  // 4-5 variables keeps enumeration exact and fast
    const int m = 5 + inst % 3;
    lp.c.resize(lp.n);
    for (auto& v : lp.c) v = u(gen);
    lp.lo.assign(lp.n, 0.0);
    lp.hi.assign(lp.n, 2.0);
    for (int r = 0; r < m; ++r) {
      std::vector<double> row(lp.n);
      for (auto& v : row) v = u(gen);
      lp.rows.push_back(row);
      lp.rhs.push_back(1.0 + u(gen));  // keeps the origin feasible often enough
    }
    const double oracle = vertex_enumeration_best(lp);
    const MilpSolution s = solve_lp(from_dense(lp));
    if (!std::isfinite(oracle)) {
      CHECK(s.status == SolveStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(s.dual_feasible);
    ++solved;
  }
  CHECK(solved >= 15);  // the generator must actually produce feasible instances
}

TEST_CASE("knapsack reference MILP") {
  MilpProblem p;
  const int a = p.add_var("a", 0, 1, true, 5.0);
  const int b = p.add_var("b", 0, 1, true, 4.0);
  p.add_row({{a, 3.0}, {b, 2.0}}, Relation::LessEq, 3.0);
  const MilpSolution s = solve_milp(p, 1e-9);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.values[a] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.values[b] == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("all-continuous MILP equals the LP relaxation") {
  MilpProblem p;
  const int x = p.add_var("x", 0, 3, false, 1.0);
  const int y = p.add_var("y", 0, 3, false, 2.0);
  p.add_row({{x, 1.0}, {y, 2.0}}, Relation::LessEq, 4.0);
  const MilpSolution lp = solve_lp(p);
  const MilpSolution ip = solve_milp(p, 1e-9);
  REQUIRE(lp.status == SolveStatus::Optimal);
  REQUIRE(ip.status == SolveStatus::Optimal);
  CHECK(ip.objective == doctest::Approx(lp.objective).epsilon(1e-12));
}

TEST_CASE("random small MILPs match exhaustive enumeration") {
  std::mt19937 gen(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 40; ++inst) {
    const int nb = 6 + inst % 5;  // 6-10 binaries
    MilpProblem p;
    std::vector<double> c(nb);
    for (int v = 0; v < nb; ++v) {
      c[v] = -1.0 + 2.0 * u(gen);
      p.add_var("b" + std::to_string(v), 0, 1, true, c[v]);
    }
    const int m = 3 + inst % 3;
    std::vector<std::vector<double>> rows(m, std::vector<double>(nb));
    std::vector<double> rhs(m);
    for (int r = 0; r < m; ++r) {
      for (auto& v : rows[r]) v = -0.5 + 1.5 * u(gen);
      rhs[r] = 0.5 + 2.0 * u(gen);
      std::vector<std::pair<int, double>> coeffs;
      for (int v = 0; v < nb; ++v) coeffs.push_back({v, rows[r][v]});
      p.add_row(coeffs, Relation::LessEq, rhs[r]);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << nb); ++mask) {
      bool ok = true;
      for (int r = 0; r < m && ok; ++r) {
        double act = 0.0;
        for (int v = 0; v < nb; ++v)
          if (mask & (1 << v)) act += rows[r][v];
        ok = act <= rhs[r] + 1e-12;
      }
      if (!ok) continue;
      double obj = 0.0;
      for (int v = 0; v < nb; ++v)
        if (mask & (1 << v)) obj += c[v];
      best = std::max(best, obj);
    }
    const MilpSolution s = solve_milp(p, 1e-9);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(best).epsilon(1e-7));
    CHECK(s.gap <= 1e-9);
    CHECK(check_milp_solution(p, s.values, 1e-6));
    double prev = -std::numeric_limits<double>::infinity();
    for (double v : s.incumbent_history) {
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("infeasible MILP detected") {
  MilpProblem p;
  const int a = p.add_var("a", 0, 1, true, 1.0);
  const int b = p.add_var("b", 0, 1, true, 1.0);
  p.add_row({{a, 1.0}, {b, 1.0}}, Relation::GreaterEq, 3.0);
  CHECK(solve_milp(p, 1e-9).status == SolveStatus::Infeasible);
}

TEST_CASE("LP text dump carries names and sections") {
  MilpProblem p;
  const int a = p.add_var("a_0_0_0", 0, 1, true, 5.0);
  p.add_var("eta_R", 0, std::numeric_limits<double>::infinity(), false, 1.0);
  p.add_row({{a, 3.0}}, Relation::LessEq, 3.0, "cap_0");
  const std::string text = to_lp_text(p);
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("a_0_0_0") != std::string::npos);
  CHECK(text.find("eta_R") != std::string::npos);
  CHECK(text.find("cap_0") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
}
