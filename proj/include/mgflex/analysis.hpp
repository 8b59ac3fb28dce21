#ifndef MGFLEX_ANALYSIS_HPP
#define MGFLEX_ANALYSIS_HPP

// Feeder variability metrics, price-based versus flexibility-oriented
// comparison, and cost-benefit selection of the ramp limits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mgflex/core_model.hpp"
#include "mgflex/milp/branch_and_bound.hpp"
#include "mgflex/scheduling/run.hpp"

namespace mgflex {

struct RampMetrics {
  double max_intra = 0.0;  // MW per intra-hour step
  double max_inter = 0.0;  // MW across an hour boundary
  double mean_abs_intra = 0.0;
  double mean_abs_inter = 0.0;
};

inline RampMetrics ramp_metrics(const Profile& feeder) {
  RampMetrics r;
  const TimeGrid& g = feeder.grid();
  double sum_intra = 0.0, sum_inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (std::size_t i = 1; i < feeder.size(); ++i) {
    double d = std::abs(feeder[i] - feeder[i - 1]);
    if (g.starts_hour(i)) {
      r.max_inter = std::max(r.max_inter, d);
      sum_inter += d;
      ++n_inter;
    } else {
      r.max_intra = std::max(r.max_intra, d);
      sum_intra += d;
      ++n_intra;
    }
  }
  if (n_intra > 0) r.mean_abs_intra = sum_intra / n_intra;
  if (n_inter > 0) r.mean_abs_inter = sum_inter / n_inter;
  return r;
}

// A step difference is assessed only when neither endpoint lies in an
// islanding window of the scenario.
inline bool assessed(const Scenario& sc, std::size_t i) {
  return i > 0 && !sc.islanded(i) && !sc.islanded(i - 1);
}

struct ModeReport {
  Mode mode = Mode::price_based;
  CostBreakdown cost;
  std::vector<Profile> feeder;        // [scenario]
  std::vector<Profile> exchange;      // [scenario]
  std::vector<RampMetrics> ramps;     // [scenario], full series
  int intra_violations = 0;           // assessed steps, all scenarios
  int inter_violations = 0;
};

struct ComparisonReport {
  FlexibilityLimits limits;
  ModeReport price;
  ModeReport flex;
  double cost_increase = 0.0;
  std::optional<double> percent_increase;  // empty when the price cost is not positive
};

inline ModeReport mode_report(const Schedule& sched, Mode mode, const MicrogridModel& model,
                              const Profile& prices, const ScenarioSet& scenarios,
                              const ProsumerSet& prosumers, const FlexibilityLimits& limits) {
  require_same_grid(sched.grid, prosumers.grid(), "compare_modes");
  require_same_grid(sched.grid, scenarios.grid(), "compare_modes");
  if (sched.scenarios.size() != scenarios.size()) {
    throw Error(ErrorCode::dimension, "schedule and scenario set differ in scenario count");
  }
  ModeReport r;
  r.mode = mode;
  r.cost = operation_cost(sched, model, prices);
  const TimeGrid& g = sched.grid;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    Profile ex = sched.exchange_profile(s);
    Profile feeder = aggregate_feeder(ex, prosumers);
    for (const auto& v : intra_hour_violations(feeder, limits)) {
      if (assessed(scenarios[s], g.index(v.hour, v.step))) ++r.intra_violations;
    }
    for (const auto& v : inter_hour_violations(feeder, limits)) {
      if (assessed(scenarios[s], g.index(v.hour, 1))) ++r.inter_violations;
    }
    r.ramps.push_back(ramp_metrics(feeder));
    r.feeder.push_back(std::move(feeder));
    r.exchange.push_back(std::move(ex));
  }
  return r;
}

inline ComparisonReport compare_modes(const Schedule& price_run, const Schedule& flex_run,
                                      const MicrogridModel& model, const Profile& prices,
                                      const ScenarioSet& scenarios, const ProsumerSet& prosumers,
                                      const FlexibilityLimits& limits) {
  require_same_grid(price_run.grid, flex_run.grid, "compare_modes");
  ComparisonReport rep;
  rep.limits = limits;
  rep.price = mode_report(price_run, Mode::price_based, model, prices, scenarios, prosumers, limits);
  rep.flex = mode_report(flex_run, Mode::flexibility_oriented, model, prices, scenarios, prosumers, limits);
  rep.cost_increase = rep.flex.cost.total - rep.price.cost.total;
  if (rep.price.cost.total > 0.0) rep.percent_increase = 100.0 * rep.cost_increase / rep.price.cost.total;
  return rep;
}

struct ModeComparison {
  ScheduleRun flex;
  ScheduleRun price;
  ComparisonReport report;
};

// Solves the flexibility-oriented problem first and hands its point to the
// price-based solve as a starting incumbent. The flexibility point is
// feasible for the price-based problem, so the reported price cost never
// exceeds the flexibility cost even when both stop inside the MIP gap.
inline ModeComparison run_comparison(const MicrogridModel& model, const Profile& prices,
                                     const ScenarioSet& scenarios, const ProsumerSet& prosumers,
                                     const FlexibilityLimits& limits,
                                     const milp::MilpOptions& options = {}) {
  ScheduleRun flex = schedule_microgrid(model, prices, scenarios, Mode::flexibility_oriented,
                                        prosumers, limits, options);
  milp::MilpOptions seeded = options;
  seeded.start = flex.solution.values;
  ScheduleRun price =
      schedule_microgrid(model, prices, scenarios, Mode::price_based, prosumers, limits, seeded);
  ComparisonReport rep =
      compare_modes(price.schedule, flex.schedule, model, prices, scenarios, prosumers, limits);
  return {std::move(flex), std::move(price), std::move(rep)};
}

// Flexibility-oriented costs along a list of limits ordered from tightest
// to loosest. Each solve starts from the previous point, which stays
// feasible as the limits relax.
inline std::vector<ScheduleRun> limit_sweep(const MicrogridModel& model, const Profile& prices,
                                            const ScenarioSet& scenarios,
                                            const ProsumerSet& prosumers,
                                            const std::vector<FlexibilityLimits>& tight_to_loose,
                                            const milp::MilpOptions& options = {}) {
  std::vector<ScheduleRun> runs;
  milp::MilpOptions opt = options;
  for (const auto& lim : tight_to_loose) {
    runs.push_back(schedule_microgrid(model, prices, scenarios, Mode::flexibility_oriented,
                                      prosumers, lim, opt));
    opt.start = runs.back().solution.values;
  }
  return runs;
}

// One lattice point of the cost-benefit study. The saving is the utility's
// avoided grid-upgrade expense when the microgrid honours these limits; the
// payment is the microgrid's cost increase over price-based operation.
struct LimitCandidate {
  FlexibilityLimits limits;
  double grid_upgrade_saving = 0.0;
  double microgrid_payment = 0.0;

  double net() const { return microgrid_payment - grid_upgrade_saving; }
};

struct FlexCostCurves {
  std::vector<LimitCandidate> samples;

  void validate() const {
    if (samples.empty()) throw Error(ErrorCode::schema, "candidate lattice is empty");
    for (const auto& c : samples) {
      c.limits.validate();
      if (!(c.grid_upgrade_saving >= 0.0) || !(c.microgrid_payment >= 0.0)) {
        throw Error(ErrorCode::schema, "candidate expenses must be finite and >= 0");
      }
    }
  }
};

namespace detail {

inline double limit_value(const std::optional<double>& d) { return d ? *d : kInf; }

// Lexicographic looseness: larger delta1 first, then larger delta2.
inline bool looser(const FlexibilityLimits& a, const FlexibilityLimits& b) {
  double a1 = limit_value(a.delta1), b1 = limit_value(b.delta1);
  if (a1 != b1) return a1 > b1;
  return limit_value(a.delta2) > limit_value(b.delta2);
}

}  // namespace detail

inline constexpr double kNetTieTolerance = 1e-9;

inline LimitCandidate select_limits(const FlexCostCurves& curves) {
  curves.validate();
  const LimitCandidate* best = &curves.samples.front();
  for (const auto& c : curves.samples) {
    double tol = kNetTieTolerance * std::max(1.0, std::abs(best->net()));
    if (c.net() < best->net() - tol) {
      best = &c;
    } else if (std::abs(c.net() - best->net()) <= tol && detail::looser(c.limits, best->limits)) {
      best = &c;
    }
  }
  return *best;
}

// Microgrid payment for each candidate, obtained by re-solving the
// flexibility-oriented schedule. Repeated limit pairs are solved once. The
// price-based baseline starts from the cheapest candidate point, so every
// payment is nonnegative.
inline std::vector<double> microgrid_payments(const MicrogridModel& model, const Profile& prices,
                                              const ScenarioSet& scenarios,
                                              const ProsumerSet& prosumers,
                                              const std::vector<FlexibilityLimits>& candidates,
                                              const milp::MilpOptions& options = {}) {
  using Key = std::pair<double, double>;
  std::map<Key, milp::MilpSolution> cache;
  std::vector<double> costs;
  const milp::MilpSolution* cheapest = nullptr;
  for (const auto& lim : candidates) {
    Key key{detail::limit_value(lim.delta1), detail::limit_value(lim.delta2)};
    auto it = cache.find(key);
    if (it == cache.end()) {
      ScheduleRun run = schedule_microgrid(model, prices, scenarios, Mode::flexibility_oriented,
                                           prosumers, lim, options);
      it = cache.emplace(key, std::move(run.solution)).first;
    }
    costs.push_back(it->second.objective);
    if (!cheapest || it->second.objective < cheapest->objective) cheapest = &it->second;
  }
  milp::MilpOptions seeded = options;
  if (cheapest) seeded.start = cheapest->values;
  ScheduleRun base = schedule_microgrid(model, prices, scenarios, Mode::price_based, prosumers,
                                        FlexibilityLimits::unbounded(), seeded);
  for (double& c : costs) c = std::max(0.0, c - base.solution.objective);
  return costs;
}

}  // namespace mgflex

#endif  // MGFLEX_ANALYSIS_HPP
