#ifndef MGFLEX_MILP_SIMPLEX_HPP
#define MGFLEX_MILP_SIMPLEX_HPP

// Primal revised simplex for bounded variables.
//
// Computational form: every row i gets an activity variable r_i with
// A x - r = 0 and bounds on both x and r, so all constraint senses become
// bounds. The basis is factorized with a sparse LU and updated with
// product-form eta columns between refactorizations. Phase 1 minimizes the
// sum of bound infeasibilities of the basic variables, which also lets the
// solver start from any (warm) basis.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgflex/milp/problem.hpp"

namespace mgflex::milp {

// Column-compressed structural matrix plus bounds and costs.
struct LpData {
  int m = 0;
  int n = 0;
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> cost;
  std::vector<double> lower;  // n + m entries: columns then row activities
  std::vector<double> upper;

  explicit LpData(const MilpProblem& p) : m(p.num_rows()), n(p.num_variables()) {
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (int i = 0; i < m; ++i) {
      for (const auto& t : p.rows()[i].terms) {
        auto& c = cols[t.var];
        if (!c.empty() && c.back().first == i) c.back().second += t.coef;
        else c.emplace_back(i, t.coef);
      }
    }
    col_start.reserve(n + 1);
    col_start.push_back(0);
    for (auto& c : cols) {
      std::sort(c.begin(), c.end());
      for (std::size_t k = 0; k < c.size(); ++k) {
        if (k + 1 < c.size() && c[k + 1].first == c[k].first) {
          c[k + 1].second += c[k].second;
          continue;
        }
        if (c[k].second == 0.0) continue;
        row_index.push_back(c[k].first);
        value.push_back(c[k].second);
      }
      col_start.push_back(static_cast<int>(row_index.size()));
    }
    cost.resize(n);
    lower.resize(n + m);
    upper.resize(n + m);
    for (int j = 0; j < n; ++j) {
      cost[j] = p.variable(j).cost;
      lower[j] = p.variable(j).lower;
      upper[j] = p.variable(j).upper;
    }
    for (int i = 0; i < m; ++i) {
      const auto& r = p.rows()[i];
      lower[n + i] = r.sense == Sense::less_equal ? -kInf : r.rhs;
      upper[n + i] = r.sense == Sense::greater_equal ? kInf : r.rhs;
    }
  }
};

enum class VarState : std::uint8_t { basic, at_lower, at_upper, at_zero };
using Basis = std::vector<VarState>;  // n + m entries

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  long iteration_limit = 0;  // 0: 50 * (rows + cols) + 10000
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  std::vector<double> values;        // structural
  std::vector<double> row_activity;  // A x
  std::vector<double> duals;         // one per row
  std::vector<double> reduced_costs; // structural
  double objective = kInf;           // without the problem's constant offset
  double dual_objective = -kInf;
  long iterations = 0;
  long bland_switches = 0;
  Basis basis;
  std::string diagnostics;
};

class RevisedSimplex {
 public:
  RevisedSimplex(const LpData& data, std::span<const double> lower, std::span<const double> upper,
                 LpOptions options = {})
      : d_(data),
        m_(data.m),
        total_(data.n + data.m),
        lo_(lower.begin(), lower.end()),
        hi_(upper.begin(), upper.end()),
        opt_(options) {
    if (opt_.iteration_limit <= 0) opt_.iteration_limit = 50L * total_ + 10000;
  }

  LpSolution solve(const Basis* warm = nullptr) {
    LpSolution sol;
    for (int j = 0; j < total_; ++j) {
      if (lo_[j] > hi_[j] + opt_.feasibility_tol) {
        sol.status = LpStatus::infeasible;
        sol.diagnostics = "crossed bounds on variable " + std::to_string(j);
        return sol;
      }
    }
    init_basis(warm);
    if (!refactor()) {
      slack_basis();
      if (!refactor()) {
        sol.status = LpStatus::numerical_failure;
        sol.diagnostics = "slack basis factorization failed";
        return sol;
      }
    }
    compute_basic_values();
    LpStatus status = iterate(sol);
    sol.status = status;
    sol.iterations = iterations_;
    sol.bland_switches = bland_switches_;
    if (status == LpStatus::optimal) fill_solution(sol);
    sol.basis = state_;
    return sol;
  }

 private:
  template <class F>
  void for_column(int j, F&& f) const {
    if (j < d_.n) {
      for (int p = d_.col_start[j]; p < d_.col_start[j + 1]; ++p) f(d_.row_index[p], d_.value[p]);
    } else {
      f(j - d_.n, -1.0);
    }
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case VarState::at_lower: return lo_[j];
      case VarState::at_upper: return hi_[j];
      default: return 0.0;
    }
  }

  VarState resting_state(int j) const {
    if (std::isfinite(lo_[j])) return VarState::at_lower;
    if (std::isfinite(hi_[j])) return VarState::at_upper;
    return VarState::at_zero;
  }

  void init_basis(const Basis* warm) {
    state_.assign(total_, VarState::at_lower);
    x_.assign(total_, 0.0);
    bool usable = warm && static_cast<int>(warm->size()) == total_ &&
                  std::count(warm->begin(), warm->end(), VarState::basic) == m_;
    if (usable) {
      state_ = *warm;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (state_[j] == VarState::at_lower && !std::isfinite(lo_[j])) state_[j] = resting_state(j);
        if (state_[j] == VarState::at_upper && !std::isfinite(hi_[j])) state_[j] = resting_state(j);
        if (state_[j] == VarState::at_zero && (std::isfinite(lo_[j]) || std::isfinite(hi_[j]))) {
          state_[j] = resting_state(j);
        }
      }
      rebuild_head();
    } else {
      slack_basis();
    }
  }

  void slack_basis() {
    for (int j = 0; j < d_.n; ++j) state_[j] = resting_state(j);
    for (int j = d_.n; j < total_; ++j) state_[j] = VarState::basic;
    rebuild_head();
  }

  void rebuild_head() {
    head_.clear();
    pos_.assign(total_, -1);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic) {
        pos_[j] = static_cast<int>(head_.size());
        head_.push_back(j);
      } else {
        x_[j] = nonbasic_value(j);
      }
    }
  }

  bool refactor() {
    etas_.clear();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 3);
    for (int r = 0; r < m_; ++r) {
      for_column(head_[r], [&](int i, double v) { trip.emplace_back(i, r, v); });
    }
    Eigen::SparseMatrix<double> b(m_, m_);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    if (m_ == 0) return true;
    lu_.analyzePattern(b);
    lu_.factorize(b);
    if (lu_.info() != Eigen::Success) return false;
    // SparseLU accepts near-singular pivots; reject bases it cannot solve.
    Eigen::VectorXd probe = Eigen::VectorXd::Ones(m_);
    Eigen::VectorXd sol = lu_.solve(probe);
    if (!sol.allFinite() || (b * sol - probe).lpNorm<Eigen::Infinity>() > 1e-6) return false;
    return true;
  }

  // Replaces basic structurals by slacks when the basis went singular.
  bool recover() {
    ++recoveries_;
    if (recoveries_ > 5) return false;
    slack_basis();
    if (!refactor()) return false;
    compute_basic_values();
    return true;
  }

  void ftran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v);
    for (const auto& e : etas_) {
      double xr = v[e.row] / e.pivot;
      if (xr != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) v[e.idx[k]] -= e.val[k] * xr;
      }
      v[e.row] = xr;
    }
  }

  void btran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v[it->row];
      for (std::size_t k = 0; k < it->idx.size(); ++k) acc -= v[it->idx[k]] * it->val[k];
      v[it->row] = acc / it->pivot;
    }
    v = lu_.transpose().solve(v);
  }

  void compute_basic_values() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic) continue;
      x_[j] = nonbasic_value(j);
      if (x_[j] == 0.0) continue;
      for_column(j, [&](int i, double v) { rhs[i] -= v * x_[j]; });
    }
    ftran(rhs);
    for (int r = 0; r < m_; ++r) x_[head_[r]] = rhs[r];
  }

  double infeasibility(int j) const {
    if (x_[j] < lo_[j] - opt_.feasibility_tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + opt_.feasibility_tol) return x_[j] - hi_[j];
    return 0.0;
  }

  double true_cost(int j) const { return j < d_.n ? d_.cost[j] : 0.0; }

  double reduced_cost(int j, const Eigen::VectorXd& y, double cj) const {
    double dj = cj;
    for_column(j, [&](int i, double v) { dj -= y[i] * v; });
    return dj;
  }

  LpStatus iterate(LpSolution& sol) {
    Eigen::VectorXd y(m_), alpha(m_), col(m_);
    long degenerate = 0;
    bool bland = false;
    bool verified = false;
    const long degenerate_limit = 3L * total_;

    while (true) {
      if (iterations_ >= opt_.iteration_limit) {
        sol.diagnostics = "iteration limit reached";
        return LpStatus::iteration_limit;
      }
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor() && !recover()) {
          sol.diagnostics = "basis became singular during refactorization";
          return LpStatus::numerical_failure;
        }
        compute_basic_values();
      }

      bool phase1 = false;
      for (int r = 0; r < m_; ++r) {
        double inf = infeasibility(head_[r]);
        if (inf > 0.0) phase1 = true;
        y[r] = 0.0;
      }
      for (int r = 0; r < m_; ++r) {
        int b = head_[r];
        if (phase1) {
          if (x_[b] < lo_[b] - opt_.feasibility_tol) y[r] = -1.0;
          else if (x_[b] > hi_[b] + opt_.feasibility_tol) y[r] = 1.0;
        } else {
          y[r] = true_cost(b);
        }
      }
      btran(y);

      // Pricing: Dantzig, or Bland's first-index rule while anti-cycling.
      int enter = -1;
      double enter_d = 0.0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        VarState st = state_[j];
        if (st == VarState::basic || lo_[j] == hi_[j]) continue;
        double dj = reduced_cost(j, y, phase1 ? 0.0 : true_cost(j));
        bool eligible = (st == VarState::at_lower && dj < -opt_.optimality_tol) ||
                        (st == VarState::at_upper && dj > opt_.optimality_tol) ||
                        (st == VarState::at_zero && std::abs(dj) > opt_.optimality_tol);
        if (!eligible) continue;
        if (bland) {
          enter = j;
          enter_d = dj;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          enter_d = dj;
        }
      }

      if (enter < 0) {
        // Confirm with a fresh factorization before declaring termination.
        if (!verified && !etas_.empty()) {
          verified = true;
          if (!refactor() && !recover()) {
            sol.diagnostics = "basis became singular during final refactorization";
            return LpStatus::numerical_failure;
          }
          compute_basic_values();
          continue;
        }
        if (phase1) {
          double total_inf = 0.0;
          for (int r = 0; r < m_; ++r) total_inf += infeasibility(head_[r]);
          sol.diagnostics = "phase 1 residual " + std::to_string(total_inf);
          return LpStatus::infeasible;
        }
        return LpStatus::optimal;
      }
      verified = false;

      const double dir = enter_d < 0.0 ? 1.0 : -1.0;
      col.setZero();
      for_column(enter, [&](int i, double v) { col[i] = v; });
      alpha = col;
      ftran(alpha);

      // Harris two-pass ratio test.
      double theta_max = kInf;
      for (int r = 0; r < m_; ++r) {
        double a = alpha[r];
        if (std::abs(a) < opt_.pivot_tol) continue;
        double rate = -dir * a;
        auto [lb, ub] = ratio_bounds(head_[r], phase1);
        int b = head_[r];
        if (rate < 0.0 && std::isfinite(lb)) {
          theta_max = std::min(theta_max, (x_[b] - lb + opt_.feasibility_tol) / -rate);
        } else if (rate > 0.0 && std::isfinite(ub)) {
          theta_max = std::min(theta_max, (ub - x_[b] + opt_.feasibility_tol) / rate);
        }
      }
      const double range = hi_[enter] - lo_[enter];
      int leave_row = -1;
      double theta = kInf;
      double leave_bound = 0.0;
      if (std::isfinite(theta_max)) {
        double best_pivot = 0.0;
        int best_var = total_;
        for (int r = 0; r < m_; ++r) {
          double a = alpha[r];
          if (std::abs(a) < opt_.pivot_tol) continue;
          double rate = -dir * a;
          auto [lb, ub] = ratio_bounds(head_[r], phase1);
          int b = head_[r];
          double t;
          double bound;
          if (rate < 0.0 && std::isfinite(lb)) {
            t = (x_[b] - lb) / -rate;
            bound = lb;
          } else if (rate > 0.0 && std::isfinite(ub)) {
            t = (ub - x_[b]) / rate;
            bound = ub;
          } else {
            continue;
          }
          if (t > theta_max) continue;
          bool take;
          if (bland) take = leave_row < 0 || t < theta - 1e-12 || (t <= theta + 1e-12 && b < best_var);
          else take = std::abs(a) > best_pivot;
          if (take) {
            best_pivot = std::abs(a);
            best_var = b;
            leave_row = r;
            theta = std::max(t, 0.0);
            leave_bound = bound;
          }
        }
      }

      bool flip = std::isfinite(range) && (leave_row < 0 || range <= theta);
      if (flip) theta = range;
      if (!std::isfinite(theta)) {
        if (phase1) {
          sol.diagnostics = "phase 1 direction without blocking variable";
          return LpStatus::numerical_failure;
        }
        return LpStatus::unbounded;
      }

      double max_rate = 0.0;
      for (int r = 0; r < m_; ++r) max_rate = std::max(max_rate, std::abs(alpha[r]));
      if (theta * std::max(max_rate, 1.0) < 1e-12) {
        if (++degenerate > degenerate_limit && !bland) {
          bland = true;
          ++bland_switches_;
        }
      } else {
        degenerate = 0;
        bland = false;
      }

      x_[enter] += dir * theta;
      if (theta != 0.0) {
        for (int r = 0; r < m_; ++r) {
          if (alpha[r] != 0.0) x_[head_[r]] -= dir * theta * alpha[r];
        }
      }
      ++iterations_;

      if (flip) {
        if (dir > 0) {
          state_[enter] = VarState::at_upper;
          x_[enter] = hi_[enter];
        } else {
          state_[enter] = VarState::at_lower;
          x_[enter] = lo_[enter];
        }
        continue;
      }

      const int leave = head_[leave_row];
      // In phase 1 the bound reached may be the far one (an infeasible
      // variable becoming feasible), so classify by value, not by side.
      x_[leave] = leave_bound;
      state_[leave] = leave_bound == lo_[leave] ? VarState::at_lower : VarState::at_upper;
      pos_[leave] = -1;
      state_[enter] = VarState::basic;
      head_[leave_row] = enter;
      pos_[enter] = leave_row;

      Eta eta;
      eta.row = leave_row;
      eta.pivot = alpha[leave_row];
      for (int r = 0; r < m_; ++r) {
        if (r != leave_row && alpha[r] != 0.0) {
          eta.idx.push_back(r);
          eta.val.push_back(alpha[r]);
        }
      }
      etas_.push_back(std::move(eta));
    }
  }

  // Bounds a basic variable must respect during the ratio test. In phase 1
  // an infeasible variable may move freely away from its violated bound
  // and is blocked only once it reaches it.
  std::pair<double, double> ratio_bounds(int b, bool phase1) const {
    if (phase1) {
      if (x_[b] < lo_[b] - opt_.feasibility_tol) return {-kInf, lo_[b]};
      if (x_[b] > hi_[b] + opt_.feasibility_tol) return {hi_[b], kInf};
    }
    return {lo_[b], hi_[b]};
  }

  void fill_solution(LpSolution& sol) {
    const int n = d_.n;
    sol.values.assign(x_.begin(), x_.begin() + n);
    sol.row_activity.assign(x_.begin() + n, x_.end());
    Eigen::VectorXd y(m_);
    for (int r = 0; r < m_; ++r) y[r] = true_cost(head_[r]);
    btran(y);
    sol.duals.assign(y.data(), y.data() + m_);
    sol.reduced_costs.assign(n, 0.0);
    double primal = 0.0;
    for (int j = 0; j < n; ++j) primal += d_.cost[j] * x_[j];
    // Bounded dual objective: sum over all variables of d_j times the bound
    // the reduced cost sign selects.
    double dual = 0.0;
    for (int j = 0; j < total_; ++j) {
      double dj = state_[j] == VarState::basic ? 0.0 : reduced_cost(j, y, true_cost(j));
      if (j < n) sol.reduced_costs[j] = dj;
      if (std::abs(dj) <= 1e-12) continue;
      double bound = dj > 0.0 ? lo_[j] : hi_[j];
      if (lo_[j] == hi_[j]) bound = lo_[j];
      dual += dj * bound;
    }
    sol.objective = primal;
    sol.dual_objective = dual;
  }

  struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };

  const LpData& d_;
  int m_;
  int total_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  LpOptions opt_;

  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<double> x_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iterations_ = 0;
  long bland_switches_ = 0;
  int recoveries_ = 0;
};

inline LpSolution solve_lp(const LpData& data, std::span<const double> lower,
                           std::span<const double> upper, const Basis* warm = nullptr,
                           const LpOptions& options = {}) {
  RevisedSimplex simplex(data, lower, upper, options);
  return simplex.solve(warm);
}

// Solves the continuous relaxation of a problem.
inline LpSolution solve_lp(const MilpProblem& problem, const LpOptions& options = {}) {
  problem.validate();
  LpData data(problem);
  LpSolution sol = solve_lp(data, data.lower, data.upper, nullptr, options);
  if (sol.status == LpStatus::optimal) {
    sol.objective += problem.objective_offset();
    sol.dual_objective += problem.objective_offset();
  }
  return sol;
}

}  // namespace mgflex::milp

#endif  // MGFLEX_MILP_SIMPLEX_HPP
