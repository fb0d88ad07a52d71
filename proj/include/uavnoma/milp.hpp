#pragma once

// Self-contained mixed-integer linear programming: a dense two-phase primal
// simplex core with a Bland's-rule anti-cycling fallback, plus best-bound
// branch-and-bound over binary variables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavnoma/model.hpp"

namespace uavnoma {

enum class Relation : std::uint8_t { LessEq, Equal, GreaterEq };

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

struct MilpProblem {
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<double> objective;       // maximize objective . x
  std::vector<Row> rows;
  std::vector<double> lower, upper;    // upper may be +inf; lower must be finite
  std::vector<std::uint8_t> is_binary;
  std::vector<std::string> var_names;

  int n_vars() const { return static_cast<int>(objective.size()); }

  int add_var(const std::string& name, double lo, double hi, bool binary, double obj = 0.0) {
    var_names.push_back(name);
    lower.push_back(lo);
    upper.push_back(hi);
    is_binary.push_back(binary ? 1 : 0);
    objective.push_back(obj);
    return n_vars() - 1;
  }

  void add_row(std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs,
               std::string name = {}) {
    rows.push_back(Row{std::move(coeffs), rel, rhs, std::move(name)});
  }

  void validate() const {
    for (int v = 0; v < n_vars(); ++v) {
      if (!std::isfinite(lower[v]))
        throw std::invalid_argument("MilpProblem: variable lower bounds must be finite");
      if (is_binary[v] && (lower[v] < -1e-12 || upper[v] > 1.0 + 1e-12))
        throw std::invalid_argument("MilpProblem: binary variables must have bounds within [0,1]");
      if (upper[v] < lower[v])
        throw std::invalid_argument("MilpProblem: upper bound below lower bound");
    }
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("MilpProblem: non-finite rhs");
      for (const auto& [v, c] : r.coeffs) {
        if (v < 0 || v >= n_vars()) throw std::invalid_argument("MilpProblem: coefficient index out of range");
        if (!std::isfinite(c)) throw std::invalid_argument("MilpProblem: non-finite coefficient");
      }
    }
  }
};

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double gap = 0.0;        // |best bound - incumbent| at termination
  int node_count = 0;
  bool dual_feasible = true;               // reduced-cost sign check at the LP optimum
  std::vector<double> incumbent_history;   // objective of each accepted incumbent
};

namespace simplex_detail {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr long kMaxPivots = 200000;

/// Dense full-tableau primal simplex with native variable bounds: variables
/// live in [0, u] after the lower-bound shift, nonbasic variables rest at
/// either bound, and a bound-to-bound move needs no pivot. Rows become
/// equalities via slack/surplus columns; artificial columns give the phase-1
/// start basis.
class Tableau {
 public:
  Tableau(const MilpProblem& p, const std::vector<double>& lo, const std::vector<double>& hi)
      : prob_(p), lo_(lo) {
    build(hi);
  }

  SolveStatus solve(std::vector<double>& x_out, double& obj_out, bool& dual_ok) {
    set_costs_phase1();
    const SolveStatus ph1 = run();
    if (ph1 == SolveStatus::IterationLimit) return ph1;
    if (phase1_infeasibility() > 1e-7) return SolveStatus::Infeasible;
    pivot_out_artificials();
    set_costs_phase2();
    const SolveStatus ph2 = run();
    if (ph2 != SolveStatus::Optimal) return ph2;
    extract(x_out);
    obj_out = 0.0;
    for (int v = 0; v < prob_.n_vars(); ++v) obj_out += prob_.objective[v] * x_out[v];
    dual_ok = reduced_costs_ok();
    return SolveStatus::Optimal;
  }

 private:
  enum class Status : std::uint8_t { Basic, AtLower, AtUpper };

  const MilpProblem& prob_;
  const std::vector<double>& lo_;

  int m_ = 0;        // rows
  int n_cols_ = 0;   // structural + slack + artificial
  int n_struct_ = 0;
  int n_art_ = 0;
  std::vector<double> t_;      // m x n_cols, equals B^-1 A after pivots
  std::vector<double> z_;      // c_B B^-1 A - c per column
  std::vector<double> cost_;   // active cost vector (maximize)
  std::vector<double> ub_;     // column upper bounds after the shift
  std::vector<double> xb_;     // values of the basic variables
  std::vector<Status> status_;
  std::vector<int> basis_;
  std::vector<std::uint8_t> banned_;  // artificial columns excluded after phase 1
  std::vector<double> col_buf_;
  bool bland_ = false;
  long degenerate_streak_ = 0;

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * n_cols_ + c]; }
  double at(int r, int c) const { return t_[static_cast<std::size_t>(r) * n_cols_ + c]; }

  void build(const std::vector<double>& hi) {
    const int n = prob_.n_vars();
    n_struct_ = n;
    m_ = static_cast<int>(prob_.rows.size());
    int n_slack = 0;
    for (const auto& row : prob_.rows)
      if (row.rel != Relation::Equal) ++n_slack;
    n_art_ = m_;
    n_cols_ = n + n_slack + n_art_;
    t_.assign(static_cast<std::size_t>(m_) * n_cols_, 0.0);
    ub_.assign(n_cols_, std::numeric_limits<double>::infinity());
    status_.assign(n_cols_, Status::AtLower);
    basis_.assign(m_, -1);
    banned_.assign(n_cols_, 0);
    xb_.assign(m_, 0.0);
    col_buf_.assign(m_, 0.0);
    for (int v = 0; v < n; ++v) ub_[v] = hi[v] - lo_[v];

    int slack_at = n;
    const int art_at = n + n_slack;
    for (int r = 0; r < m_; ++r) {
      const auto& row = prob_.rows[r];
      double b = row.rhs;
      for (const auto& [v, c] : row.coeffs) at(r, v) += c;
      for (int v = 0; v < n; ++v) b -= at(r, v) * lo_[v];  // shift x = x' + lo
      if (row.rel != Relation::Equal) {
        at(r, slack_at) = row.rel == Relation::LessEq ? 1.0 : -1.0;
        ub_[slack_at] = std::numeric_limits<double>::infinity();
        ++slack_at;
      }
      // negate rows with negative residual so the start basis is the identity
      // over the artificial columns (nonbasics all rest at zero)
      if (b < 0.0) {
        b = -b;
        for (int c = 0; c < art_at; ++c) at(r, c) = -at(r, c);
      }
      const int art = art_at + r;
      at(r, art) = 1.0;
      basis_[r] = art;
      status_[art] = Status::Basic;
      xb_[r] = b;
    }
  }

  void set_costs_phase1() {
    cost_.assign(n_cols_, 0.0);
    for (int c = n_cols_ - n_art_; c < n_cols_; ++c) cost_[c] = -1.0;
    rebuild_z();
  }

  void set_costs_phase2() {
    cost_.assign(n_cols_, 0.0);
    for (int v = 0; v < n_struct_; ++v) cost_[v] = prob_.objective[v];
    for (int c = n_cols_ - n_art_; c < n_cols_; ++c) banned_[c] = 1;
    rebuild_z();
    bland_ = false;
    degenerate_streak_ = 0;
  }

  void rebuild_z() {
    z_.assign(n_cols_, 0.0);
    for (int c = 0; c < n_cols_; ++c) {
      double acc = -cost_[c];
      for (int r = 0; r < m_; ++r) {
        const double cb = cost_[basis_[r]];
        if (cb != 0.0) acc += cb * at(r, c);
      }
      z_[c] = acc;
    }
  }

  double phase1_infeasibility() const {
    double acc = 0.0;
    const int art_at = n_cols_ - n_art_;
    for (int r = 0; r < m_; ++r)
      if (basis_[r] >= art_at) acc += xb_[r];
    return acc;
  }

  SolveStatus run() {
    for (long it = 0; it < kMaxPivots; ++it) {
      const int col = choose_entering();
      if (col < 0) return SolveStatus::Optimal;
      if (!step(col)) return SolveStatus::Unbounded;
    }
    return SolveStatus::IterationLimit;
  }

  // reduced cost improvement of moving column c off its bound
  double improvement(int c) const {
    const double d = -z_[c];  // c_j - c_B B^-1 A_j
    return status_[c] == Status::AtLower ? d : -d;
  }

  int choose_entering() const {
    int best = -1;
    double best_gain = kCostTol;
    for (int c = 0; c < n_cols_; ++c) {
      if (banned_[c] || status_[c] == Status::Basic) continue;
      const double gain = improvement(c);
      if (gain > best_gain) {
        if (bland_) return c;  // first improving index
        best_gain = gain;
        best = c;
      }
    }
    return best;
  }

  /// One bounded-simplex step on entering column `col`. Returns false when
  /// the problem is unbounded along that direction.
  bool step(int col) {
    const double dir = status_[col] == Status::AtLower ? 1.0 : -1.0;
    for (int r = 0; r < m_; ++r) col_buf_[r] = at(r, col);

    double limit = ub_[col];  // bound-to-bound distance of the entering column
    int leave_row = -1;
    bool leave_to_upper = false;
    for (int r = 0; r < m_; ++r) {
      const double delta = dir * col_buf_[r];  // basic r moves by -delta per unit
      double cap = std::numeric_limits<double>::infinity();
      bool to_upper = false;
      if (delta > kPivotTol) {
        cap = xb_[r] / delta;  // hits its lower bound (zero)
      } else if (delta < -kPivotTol) {
        const double room = ub_[basis_[r]] - xb_[r];
        if (!std::isfinite(room)) continue;
        cap = room / (-delta);
        to_upper = true;
      } else {
        continue;
      }
      if (cap < limit - 1e-12 ||
          (cap < limit + 1e-12 && leave_row >= 0 && basis_[r] < basis_[leave_row])) {
        limit = cap;
        leave_row = r;
        leave_to_upper = to_upper;
      }
    }
    if (!std::isfinite(limit)) return false;  // nothing blocks: unbounded

    const double t = std::max(limit, 0.0);
    if (t * improvement(col) < 1e-12) {
      if (++degenerate_streak_ > 4L * (m_ + n_cols_)) bland_ = true;
    } else {
      degenerate_streak_ = 0;
    }

    for (int r = 0; r < m_; ++r) xb_[r] -= t * dir * col_buf_[r];
    if (leave_row < 0) {
      // bound flip: the entering variable traverses to its other bound
      status_[col] = status_[col] == Status::AtLower ? Status::AtUpper : Status::AtLower;
      return true;
    }
    const int leaving = basis_[leave_row];
    status_[leaving] = leave_to_upper ? Status::AtUpper : Status::AtLower;
    const double enter_value = status_[col] == Status::AtLower ? t : ub_[col] - t;
    pivot(leave_row, col);
    status_[col] = Status::Basic;
    xb_[leave_row] = enter_value;
    return true;
  }

  void pivot(int row, int col) {
    const double inv = 1.0 / at(row, col);
    for (int c = 0; c < n_cols_; ++c) at(row, c) *= inv;
    at(row, col) = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = at(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < n_cols_; ++c) at(r, c) -= f * at(row, c);
      at(r, col) = 0.0;
    }
    const double fz = z_[col];
    if (fz != 0.0) {
      for (int c = 0; c < n_cols_; ++c) z_[c] -= fz * at(row, c);
      z_[col] = 0.0;
    }
    basis_[row] = col;
  }

  void pivot_out_artificials() {
    const int art_start = n_cols_ - n_art_;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art_start) continue;
      int col = -1;
      for (int c = 0; c < art_start; ++c) {
        if (std::fabs(at(r, c)) > kPivotTol) {
          col = c;
          break;
        }
      }
      if (col >= 0) {
        const int art = basis_[r];
        const double keep = xb_[r];
        pivot(r, col);
        status_[col] = Status::Basic;
        status_[art] = Status::AtLower;
        xb_[r] = keep;  // basic value unchanged by a zero-valued swap
      }
      // otherwise the row is redundant; the artificial stays basic at zero
    }
  }

  bool reduced_costs_ok() const {
    for (int c = 0; c < n_cols_; ++c) {
      if (banned_[c] || status_[c] == Status::Basic) continue;
      if (improvement(c) > 1e-6) return false;  // an improving nonbasic column remains
    }
    return true;
  }

  void extract(std::vector<double>& x) const {
    x.assign(prob_.n_vars(), 0.0);
    for (int v = 0; v < n_struct_; ++v)
      if (status_[v] == Status::AtUpper) x[v] = ub_[v];
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_struct_) x[basis_[r]] = xb_[r];
    for (int v = 0; v < prob_.n_vars(); ++v) x[v] += lo_[v];
  }
};

}  // namespace simplex_detail

/// Solve the LP relaxation (integrality flags ignored).
inline MilpSolution solve_lp(const MilpProblem& p) {
  p.validate();
  MilpSolution sol;
  simplex_detail::Tableau tab(p, p.lower, p.upper);
  sol.status = tab.solve(sol.values, sol.objective, sol.dual_feasible);
#ifndef NDEBUG
  if (sol.status == SolveStatus::Optimal && !sol.dual_feasible)
    throw std::logic_error("solve_lp: reduced-cost sign check failed at optimum");
#endif
  return sol;
}

namespace bnb_detail {

inline MilpSolution solve_relaxation(const MilpProblem& p, const std::vector<double>& lo,
                                     const std::vector<double>& hi) {
  MilpSolution sol;
  simplex_detail::Tableau tab(p, lo, hi);
  sol.status = tab.solve(sol.values, sol.objective, sol.dual_feasible);
  return sol;
}

inline int most_fractional_binary(const MilpProblem& p, const std::vector<double>& x,
                                  double int_tol) {
  int var = -1;
  double score = -1.0;
  for (int v = 0; v < p.n_vars(); ++v) {
    if (!p.is_binary[v]) continue;
    const double frac = std::fabs(x[v] - std::round(x[v]));
    if (frac <= int_tol) continue;
    const double sc = 0.5 - std::fabs(x[v] - std::floor(x[v]) - 0.5);
    if (sc > score + 1e-15) {
      score = sc;
      var = v;
    }
  }
  return var;
}

enum class DiveRule : std::uint8_t { MaxValue, MostFractional };

/// Rounding dive: repeatedly fix a fractional binary and re-solve, flipping
/// once per level on infeasibility. MaxValue commits the relaxation's
/// strongest preferences first (effective on assignment shapes);
/// MostFractional resolves the most ambivalent variable first. Cheap source
/// of incumbents for flat-bound max-min instances where best-bound alone
/// rarely reaches a leaf.
inline bool plunge(const MilpProblem& p, std::vector<double> lo, std::vector<double> hi,
                   double int_tol, DiveRule rule, std::vector<double>& x_out, double& obj_out) {
  MilpSolution relax = solve_relaxation(p, lo, hi);
  if (relax.status != SolveStatus::Optimal) return false;
  for (int level = 0; level < p.n_vars() + 8; ++level) {
    int var = -1;
    if (rule == DiveRule::MostFractional) {
      var = most_fractional_binary(p, relax.values, int_tol);
    } else {
      double best = -1.0;
      for (int v = 0; v < p.n_vars(); ++v) {
        if (!p.is_binary[v] || hi[v] <= lo[v] + 0.5) continue;  // already fixed
        const double frac = std::fabs(relax.values[v] - std::round(relax.values[v]));
        if (frac <= int_tol) continue;
        if (relax.values[v] > best + 1e-15) {
          best = relax.values[v];
          var = v;
        }
      }
    }
    if (var < 0) {
      x_out = relax.values;
      obj_out = relax.objective;
      return true;
    }
    const double toward = rule == DiveRule::MaxValue ? 1.0 : std::round(relax.values[var]);
    auto try_fix = [&](double val) {
      std::vector<double> lo2 = lo, hi2 = hi;
      if (val >= 0.5) lo2[var] = 1.0;
      else hi2[var] = 0.0;
      MilpSolution probe = solve_relaxation(p, lo2, hi2);
      if (probe.status != SolveStatus::Optimal) return false;
      lo = std::move(lo2);
      hi = std::move(hi2);
      relax = std::move(probe);
      return true;
    };
    if (!try_fix(toward) && !try_fix(1.0 - toward)) return false;
  }
  return false;
}

}  // namespace bnb_detail

inline bool check_milp_solution(const MilpProblem& p, const std::vector<double>& x, double tol);

/// Best-bound branch-and-bound with most-fractional branching and a
/// depth-first dive on ties. The certified gap at termination is at most
/// `gap_abs` (absolute, in objective units). An optional warm start that
/// re-checks as feasible seeds the incumbent.
inline MilpSolution solve_milp(const MilpProblem& p, double gap_abs = 1e-7,
                               long node_limit = 200000,
                               const std::vector<double>* warm_start = nullptr) {
  p.validate();
  const double int_tol = std::clamp(gap_abs, 1e-9, 1e-4);

  struct Node {
    double bound;
    int depth;
    long seq;
    std::vector<double> lo, hi;
  };
  struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
      if (a.depth != b.depth) return a.depth < b.depth;  // dive deeper first
      return a.seq > b.seq;
    }
  };

  MilpSolution best;
  best.status = SolveStatus::Infeasible;
  best.objective = -std::numeric_limits<double>::infinity();
  bool have_incumbent = false;
  std::vector<double> incumbent_history;

  auto offer_incumbent = [&](const std::vector<double>& x, double obj) {
    if (have_incumbent && obj <= best.objective) return;
    best.values = x;
    best.objective = obj;
    have_incumbent = true;
    incumbent_history.push_back(obj);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long seq = 0;
  open.push(Node{std::numeric_limits<double>::infinity(), 0, seq++, p.lower, p.upper});

  int nodes = 0;
  bool hit_limit = false;
  double loose_bound = -std::numeric_limits<double>::infinity();

  if (warm_start && check_milp_solution(p, *warm_start, 1e-6)) {
    double obj = 0.0;
    for (int v = 0; v < p.n_vars(); ++v) obj += p.objective[v] * (*warm_start)[v];
    offer_incumbent(*warm_start, obj);
  }
  {
    std::vector<double> x;
    double obj = 0.0;
    if (bnb_detail::plunge(p, p.lower, p.upper, int_tol, bnb_detail::DiveRule::MaxValue, x, obj))
      offer_incumbent(x, obj);
    if (bnb_detail::plunge(p, p.lower, p.upper, int_tol, bnb_detail::DiveRule::MostFractional, x,
                           obj))
      offer_incumbent(x, obj);
  }
  int plunges_left = 8;

  while (!open.empty()) {
    if (nodes >= node_limit) {
      hit_limit = true;
      loose_bound = std::max(loose_bound, open.top().bound);
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound <= best.objective + gap_abs) continue;
    ++nodes;

    MilpSolution relax = bnb_detail::solve_relaxation(p, node.lo, node.hi);
    if (relax.status == SolveStatus::IterationLimit) {
      hit_limit = true;
      loose_bound = std::max(loose_bound, node.bound);
      continue;
    }
    if (relax.status == SolveStatus::Infeasible) continue;
    if (relax.status == SolveStatus::Unbounded) {
      MilpSolution sol;
      sol.status = SolveStatus::Unbounded;
      return sol;
    }
    if (have_incumbent && relax.objective <= best.objective + gap_abs) continue;

    const int branch_var = bnb_detail::most_fractional_binary(p, relax.values, int_tol);

    if (branch_var < 0) {
      offer_incumbent(relax.values, relax.objective);
      best.dual_feasible = relax.dual_feasible;
      continue;
    }

    // periodic dive from the current frontier to refresh the incumbent
    if (plunges_left > 0 && nodes % 400 == 0 && nodes > 0) {
      --plunges_left;
      std::vector<double> x;
      double obj = 0.0;
      const auto rule = plunges_left % 2 == 0 ? bnb_detail::DiveRule::MaxValue
                                              : bnb_detail::DiveRule::MostFractional;
      if (bnb_detail::plunge(p, node.lo, node.hi, int_tol, rule, x, obj)) offer_incumbent(x, obj);
    }

    Node down{relax.objective, node.depth + 1, seq++, node.lo, node.hi};
    down.hi[branch_var] = 0.0;
    Node up{relax.objective, node.depth + 1, seq++, node.lo, node.hi};
    up.lo[branch_var] = 1.0;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  best.node_count = nodes;
  best.incumbent_history = std::move(incumbent_history);
  if (!have_incumbent) {
    best.status = hit_limit ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
    best.values.clear();
    best.objective = 0.0;
    return best;
  }
  best.status = hit_limit ? SolveStatus::IterationLimit : SolveStatus::Optimal;
  best.gap = hit_limit ? std::max(0.0, loose_bound - best.objective) : 0.0;
  return best;
}

inline MilpSolution solve_milp(const MilpProblem& p, const AlgoConfig& cfg) {
  return solve_milp(p, cfg.bnb_gap);
}

/// Re-substitute a solution into every row and bound; true when all hold
/// within `tol` (absolute, on row activity).
inline bool check_milp_solution(const MilpProblem& p, const std::vector<double>& x, double tol) {
  if (static_cast<int>(x.size()) != p.n_vars()) return false;
  for (int v = 0; v < p.n_vars(); ++v) {
    if (x[v] < p.lower[v] - tol || x[v] > p.upper[v] + tol) return false;
    if (p.is_binary[v] && std::fabs(x[v] - std::round(x[v])) > 1e-6) return false;
  }
  for (const auto& row : p.rows) {
    double act = 0.0;
    for (const auto& [v, c] : row.coeffs) act += c * x[v];
    switch (row.rel) {
      case Relation::LessEq:
        if (act > row.rhs + tol) return false;
        break;
      case Relation::GreaterEq:
        if (act < row.rhs - tol) return false;
        break;
      case Relation::Equal:
        if (std::fabs(act - row.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

/// Plain-text dump in an LP-style layout for audits and external cross-checks.
inline std::string to_lp_text(const MilpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  auto var = [&p](int v) {
    return p.var_names[v].empty() ? "x" + std::to_string(v) : p.var_names[v];
  };
  os << "Maximize\n obj:";
  bool first = true;
  for (int v = 0; v < p.n_vars(); ++v) {
    if (p.objective[v] == 0.0) continue;
    os << (first ? " " : " + ") << p.objective[v] << " " << var(v);
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const auto& row = p.rows[r];
    os << " " << (row.name.empty() ? "c" + std::to_string(r) : row.name) << ":";
    bool f2 = true;
    for (const auto& [v, c] : row.coeffs) {
      os << (f2 ? " " : " + ") << c << " " << var(v);
      f2 = false;
    }
    if (f2) os << " 0";
    switch (row.rel) {
      case Relation::LessEq: os << " <= "; break;
      case Relation::GreaterEq: os << " >= "; break;
      case Relation::Equal: os << " = "; break;
    }
    os << row.rhs << "\n";
  }
  os << "Bounds\n";
  for (int v = 0; v < p.n_vars(); ++v) {
    os << " " << p.lower[v] << " <= " << var(v);
    if (std::isfinite(p.upper[v])) os << " <= " << p.upper[v];
    os << "\n";
  }
  bool any_bin = false;
  for (int v = 0; v < p.n_vars(); ++v) any_bin |= p.is_binary[v] != 0;
  if (any_bin) {
    os << "Binaries\n";
    for (int v = 0; v < p.n_vars(); ++v)
      if (p.is_binary[v]) os << " " << var(v) << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace uavnoma
