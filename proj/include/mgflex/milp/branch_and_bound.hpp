#ifndef MGFLEX_MILP_BRANCH_AND_BOUND_HPP
#define MGFLEX_MILP_BRANCH_AND_BOUND_HPP

// Best-bound branch-and-bound over the bounded revised simplex.

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <utility>
#include <vector>

#include "mgflex/milp/problem.hpp"
#include "mgflex/milp/simplex.hpp"

namespace mgflex::milp {

struct MilpOptions {
  double rel_gap = 1e-4;
  long node_limit = 100000;
  double time_limit_s = kInf;
  double integrality_tol = 1e-6;
  bool root_dive = true;
  // Optional starting point. Its integer values are pinned and the LP is
  // re-solved; a feasible result seeds the incumbent.
  std::vector<double> start;
  LpOptions lp;
};

namespace detail {

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  double bound;
  long id;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id < b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& p, const MilpOptions& opt)
      : p_(p), opt_(opt), data_(p), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < p.num_variables(); ++j) {
      if (p.variable(j).integer) int_vars_.push_back(j);
    }
  }

  MilpSolution run() {
    MilpSolution sol;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    if (opt_.start.size() == static_cast<std::size_t>(p_.num_variables())) {
      consider_incumbent(opt_.start, {}, nullptr);
    }

    LpSolution root = solve_node({}, nullptr);
    ++sol.nodes;
    if (root.status == LpStatus::infeasible) return finish(sol, Status::infeasible, -kInf);
    if (root.status == LpStatus::unbounded) return finish(sol, Status::unbounded, -kInf);
    if (root.status != LpStatus::optimal) {
      uncertified_ = true;
      return finish(sol, Status::node_limit, -kInf);
    }
    const double root_obj = root.objective + p_.objective_offset();
    sol.root_bound = root_obj;
    auto root_basis = std::make_shared<const Basis>(root.basis);

    if (int frac_var = select_branch(root.values); frac_var < 0) {
      consider_incumbent(root.values, {}, root_basis);
    } else {
      if (opt_.root_dive) dive(root, root_basis);
      branch(open, root.values, frac_var, {}, root_obj, root_basis);
    }

    bool limit_hit = false;
    double frontier = kInf;
    while (!open.empty()) {
      if (has_incumbent_ && open.top().bound >= incumbent_obj_ - prune_tolerance()) {
        frontier = open.top().bound;
        break;
      }
      if (sol.nodes >= opt_.node_limit || elapsed() > opt_.time_limit_s) {
        limit_hit = true;
        frontier = open.top().bound;
        break;
      }
      Node node = open.top();
      open.pop();
      ++sol.nodes;
      LpSolution lp = solve_node(node.changes, node.basis.get());
      if (lp.status == LpStatus::infeasible) continue;
      if (lp.status != LpStatus::optimal) {
        // Unresolved node: its subtree is dropped, so optimality is no
        // longer certified.
        uncertified_ = true;
        pruned_bound_ = std::min(pruned_bound_, node.bound);
        continue;
      }
      double obj = lp.objective + p_.objective_offset();
      if (has_incumbent_ && obj >= incumbent_obj_ - prune_tolerance()) {
        pruned_bound_ = std::min(pruned_bound_, obj);
        continue;
      }
      auto basis = std::make_shared<const Basis>(lp.basis);
      int var = select_branch(lp.values);
      if (var < 0) {
        consider_incumbent(lp.values, node.changes, basis);
        continue;
      }
      branch(open, lp.values, var, node.changes, obj, basis);
    }

    double best_bound = std::min(frontier, pruned_bound_);
    if (limit_hit) return finish(sol, Status::node_limit, best_bound);
    if (!has_incumbent_) {
      return finish(sol, uncertified_ ? Status::node_limit : Status::infeasible, best_bound);
    }
    return finish(sol, uncertified_ ? Status::feasible_gap : Status::optimal, best_bound);
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  double prune_tolerance() const {
    return std::max(1e-9, opt_.rel_gap * std::abs(incumbent_obj_));
  }

  LpSolution solve_node(const std::vector<BoundChange>& changes, const Basis* warm) {
    std::vector<double> lo = data_.lower;
    std::vector<double> hi = data_.upper;
    for (const auto& c : changes) {
      lo[c.var] = c.lower;
      hi[c.var] = c.upper;
    }
    LpSolution lp = solve_lp(data_, lo, hi, warm, opt_.lp);
    lp_iterations_ += lp.iterations;
    if (warm && (lp.status == LpStatus::numerical_failure || lp.status == LpStatus::iteration_limit)) {
      lp = solve_lp(data_, lo, hi, nullptr, opt_.lp);
      lp_iterations_ += lp.iterations;
    }
    return lp;
  }

  // Most fractional integer variable, lowest index on ties; -1 if integral.
  int select_branch(const std::vector<double>& x) const {
    int best = -1;
    double best_score = opt_.integrality_tol;
    for (int j : int_vars_) {
      double frac = x[j] - std::floor(x[j]);
      double score = std::min(frac, 1.0 - frac);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void branch(std::priority_queue<Node, std::vector<Node>, NodeOrder>& open,
              const std::vector<double>& x, int var, const std::vector<BoundChange>& changes,
              double bound, const std::shared_ptr<const Basis>& basis) {
    double lo = data_.lower[var];
    double hi = data_.upper[var];
    for (const auto& c : changes) {
      if (c.var == var) {
        lo = c.lower;
        hi = c.upper;
      }
    }
    Node down{bound, next_id_++, changes, basis};
    down.changes.push_back({var, lo, std::floor(x[var])});
    Node up{bound, next_id_++, changes, basis};
    up.changes.push_back({var, std::ceil(x[var]), hi});
    open.push(std::move(down));
    open.push(std::move(up));
  }

  // Re-solves with the integer variables pinned to their rounded values so
  // the stored incumbent satisfies every row exactly, not just within the
  // integrality tolerance.
  void consider_incumbent(const std::vector<double>& x, std::vector<BoundChange> changes,
                          const std::shared_ptr<const Basis>& basis) {
    for (int j : int_vars_) {
      double v = std::round(x[j]);
      changes.push_back({j, v, v});
    }
    LpSolution lp = solve_node(changes, basis.get());
    if (lp.status != LpStatus::optimal) return;
    std::vector<double> values = lp.values;
    for (int j : int_vars_) values[j] = std::round(values[j]);
    double obj = p_.objective(values);
    if (!has_incumbent_ || obj < incumbent_obj_) {
      has_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_ = std::move(values);
    }
  }

  // Fix-and-resolve dive from the root: pin the most fractional variable to
  // its nearest integer (the other side if that is infeasible) until the LP
  // solution is integral.
  void dive(const LpSolution& root, std::shared_ptr<const Basis> basis) {
    std::vector<BoundChange> changes;
    std::vector<double> x = root.values;
    for (std::size_t depth = 0; depth <= int_vars_.size(); ++depth) {
      int var = select_branch(x);
      if (var < 0) {
        consider_incumbent(x, changes, basis);
        return;
      }
      double nearest = std::round(x[var]);
      double other = nearest > x[var] ? std::floor(x[var]) : std::ceil(x[var]);
      bool moved = false;
      for (double v : {nearest, other}) {
        auto trial = changes;
        trial.push_back({var, v, v});
        LpSolution lp = solve_node(trial, basis.get());
        if (lp.status != LpStatus::optimal) continue;
        if (has_incumbent_ && lp.objective + p_.objective_offset() >= incumbent_obj_) return;
        changes = std::move(trial);
        x = lp.values;
        basis = std::make_shared<const Basis>(lp.basis);
        moved = true;
        break;
      }
      if (!moved) return;
    }
  }

  MilpSolution& finish(MilpSolution& sol, Status status, double best_bound) {
    sol.status = status;
    sol.lp_iterations = lp_iterations_;
    sol.wall_seconds = elapsed();
    if (has_incumbent_) {
      sol.values = incumbent_;
      sol.objective = incumbent_obj_;
      sol.best_bound = std::min(best_bound, incumbent_obj_);
      double diff = std::max(0.0, incumbent_obj_ - sol.best_bound);
      sol.gap = diff <= 1e-9 ? 0.0 : diff / std::max(std::abs(incumbent_obj_), 1e-10);
    } else {
      sol.best_bound = best_bound;
    }
    return sol;
  }

  const MilpProblem& p_;
  MilpOptions opt_;
  LpData data_;
  std::chrono::steady_clock::time_point start_;
  std::vector<int> int_vars_;
  bool has_incumbent_ = false;
  double incumbent_obj_ = kInf;
  std::vector<double> incumbent_;
  double pruned_bound_ = kInf;
  bool uncertified_ = false;
  long next_id_ = 1;
  long lp_iterations_ = 0;
};

}  // namespace detail

inline MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {}) {
  problem.validate();
  detail::BranchAndBound bb(problem, options);
  return bb.run();
}

}  // namespace mgflex::milp

#endif  // MGFLEX_MILP_BRANCH_AND_BOUND_HPP
