#ifndef MGFLEX_SCHEDULING_RUN_HPP
#define MGFLEX_SCHEDULING_RUN_HPP

#include <optional>

#include "mgflex/core_model.hpp"
#include "mgflex/milp/branch_and_bound.hpp"
#include "mgflex/scheduling/builder.hpp"
#include "mgflex/scheduling/schedule.hpp"

namespace mgflex {

struct ScheduleRun {
  SchedulingProblem problem;
  milp::MilpSolution solution;
  Schedule schedule;
};

// Builds, solves and extracts one schedule. In price-based mode the limits
// and prosumers are ignored.
inline ScheduleRun schedule_microgrid(const MicrogridModel& model, const Profile& prices,
                                      const ScenarioSet& scenarios, Mode mode,
                                      const ProsumerSet& prosumers, const FlexibilityLimits& limits,
                                      const milp::MilpOptions& options = {}) {
  std::optional<ExchangeEnvelope> env;
  if (mode == Mode::flexibility_oriented) env = exchange_envelope(prosumers, limits, scenarios);
  SchedulingProblem sp = build_problem(model, prices, scenarios, mode, env);
  milp::MilpSolution sol = milp::solve_milp(sp.milp, options);
  Schedule sched = extract_schedule(sp, sol);
  return {std::move(sp), std::move(sol), std::move(sched)};
}

}  // namespace mgflex

#endif  // MGFLEX_SCHEDULING_RUN_HPP
