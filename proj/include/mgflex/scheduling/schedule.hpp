#ifndef MGFLEX_SCHEDULING_SCHEDULE_HPP
#define MGFLEX_SCHEDULING_SCHEDULE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "mgflex/core_model.hpp"
#include "mgflex/milp/problem.hpp"
#include "mgflex/scheduling/builder.hpp"
#include "mgflex/scheduling/model.hpp"

namespace mgflex {

struct ScenarioSchedule {
  std::string id;
  double probability = 1.0;
  std::vector<std::vector<double>> unit_output;  // [unit][step] MW
  std::vector<std::vector<double>> charge;       // [storage][step] MW
  std::vector<std::vector<double>> discharge;
  std::vector<std::vector<double>> energy;       // MWh at the end of each step
  std::vector<std::vector<double>> load;         // [adjustable][step] MW
  std::vector<double> exchange;                  // MW, import-positive
};

// Expected values over scenarios; currency units of the price profile.
struct CostBreakdown {
  double generation = 0.0;
  double no_load = 0.0;
  double startup = 0.0;
  double energy_purchase = 0.0;
  double energy_sale = 0.0;
  double total = 0.0;
};

struct Schedule {
  TimeGrid grid;
  std::vector<std::vector<int>> commitment;  // [unit][hour] 0/1
  std::vector<ScenarioSchedule> scenarios;
  CostBreakdown cost;

  Profile exchange_profile(std::size_t s) const { return Profile(grid, scenarios[s].exchange); }
};

inline int count_startups(const std::vector<int>& on) {
  int n = 0;
  int prev = 0;
  for (int v : on) {
    if (v == 1 && prev == 0) ++n;
    prev = v;
  }
  return n;
}

// Cost recomputed from the schedule series alone.
inline CostBreakdown operation_cost(const Schedule& sched, const MicrogridModel& model,
                                    const Profile& prices) {
  require_same_grid(sched.grid, prices.grid(), "operation_cost");
  const double h = sched.grid.step_hours();
  CostBreakdown c;
  for (std::size_t u = 0; u < sched.commitment.size(); ++u) {
    const auto& unit = model.units.at(u);
    for (int on : sched.commitment[u]) c.no_load += on * unit.no_load_cost;
    c.startup += count_startups(sched.commitment[u]) * unit.startup_cost;
  }
  for (const auto& sc : sched.scenarios) {
    double gen = 0.0, buy = 0.0, sell = 0.0;
    for (std::size_t u = 0; u < sc.unit_output.size(); ++u) {
      for (double p : sc.unit_output[u]) gen += model.units.at(u).marginal_cost * p * h;
    }
    for (std::size_t i = 0; i < sc.exchange.size(); ++i) {
      double e = sc.exchange[i];
      if (e > 0.0) buy += prices[i] * e * h;
      else sell += prices[i] * -e * h;
    }
    c.generation += sc.probability * gen;
    c.energy_purchase += sc.probability * buy;
    c.energy_sale += sc.probability * sell;
  }
  c.total = c.generation + c.no_load + c.startup + c.energy_purchase - c.energy_sale;
  return c;
}

inline constexpr double kCostAgreementTol = 1e-6;

inline Schedule extract_schedule(const SchedulingProblem& sp, const milp::MilpSolution& sol) {
  if (sol.status != milp::Status::optimal && sol.status != milp::Status::feasible_gap) {
    throw Error(sol.status == milp::Status::node_limit ? ErrorCode::no_solution : ErrorCode::infeasible,
                std::string("no schedule: solver status ") + milp::to_string(sol.status));
  }
  const auto& x = sol.values;
  const TimeGrid& g = sp.grid();
  const std::size_t N = g.size();
  Schedule out{g, {}, {}, {}};
  for (const auto& on : sp.commitment) {
    std::vector<int> series;
    for (int var : on) series.push_back(static_cast<int>(std::lround(x[var])));
    out.commitment.push_back(std::move(series));
  }
  auto series = [&](const std::vector<int>& vars) {
    std::vector<double> v(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      if (vars[i] >= 0) v[i] = x[vars[i]];
    }
    return v;
  };
  for (std::size_t s = 0; s < sp.scenarios.size(); ++s) {
    const auto& vars = sp.vars[s];
    ScenarioSchedule sc;
    sc.id = sp.scenarios[s].id;
    sc.probability = sp.scenarios[s].probability;
    for (const auto& v : vars.unit_output) sc.unit_output.push_back(series(v));
    for (const auto& v : vars.charge) sc.charge.push_back(series(v));
    for (const auto& v : vars.discharge) sc.discharge.push_back(series(v));
    for (const auto& v : vars.energy) sc.energy.push_back(series(v));
    for (const auto& v : vars.load) sc.load.push_back(series(v));
    sc.exchange = series(vars.exchange);
    out.scenarios.push_back(std::move(sc));
  }
  out.cost = operation_cost(out, sp.model, sp.prices);
  double solver_obj = sol.objective;
  if (std::abs(out.cost.total - solver_obj) > kCostAgreementTol * std::max(1.0, std::abs(solver_obj))) {
    throw Error(ErrorCode::integrity, "recomputed cost " + std::to_string(out.cost.total) +
                                          " disagrees with solver objective " +
                                          std::to_string(solver_obj));
  }
  return out;
}

// Independent physics check of a schedule against its model.
struct ScheduleCheck {
  double max_balance_residual = 0.0;     // MW
  double max_storage_recursion = 0.0;    // MWh
  double max_storage_bound = 0.0;        // MWh outside [e_min, capacity] or terminal
  double max_island_exchange = 0.0;      // MW inside islanding windows
  double max_exchange_excess = 0.0;      // MW above exchange capacity
  double max_unit_bound = 0.0;           // MW outside [p_min u, p_max u]
  double max_ramp_excess = 0.0;          // MW per step beyond ramp limits
  double max_load_residual = 0.0;        // MWh on adjustable energy, MW on bounds
  int min_up_down_violations = 0;
};

inline ScheduleCheck verify_schedule(const Schedule& sched, const MicrogridModel& model,
                                     const ScenarioSet& scenarios) {
  const TimeGrid& g = sched.grid;
  const std::size_t N = g.size();
  const double h = g.step_hours();
  ScheduleCheck c;
  auto bump = [](double& slot, double v) { slot = std::max(slot, v); };

  for (std::size_t u = 0; u < model.units.size(); ++u) {
    const auto& unit = model.units[u];
    const auto& on = sched.commitment[u];
    // Runs of equal status: interior and trailing-interrupted runs must
    // respect minimum durations; the leading off run follows an initial
    // off state and the final run is truncated by the horizon.
    int start = 0;
    for (int t = 1; t <= static_cast<int>(on.size()); ++t) {
      if (t < static_cast<int>(on.size()) && on[t] == on[start]) continue;
      int len = t - start;
      bool at_end = t == static_cast<int>(on.size());
      if (!at_end) {
        if (on[start] == 1 && len < unit.min_up_h) ++c.min_up_down_violations;
        if (on[start] == 0 && start > 0 && len < unit.min_down_h) ++c.min_up_down_violations;
      }
      start = t;
    }
  }

  for (std::size_t s = 0; s < sched.scenarios.size(); ++s) {
    const auto& sc = sched.scenarios[s];
    const Scenario& scen = scenarios[s];
    for (std::size_t i = 0; i < N; ++i) {
      double supply = sc.exchange[i];
      double demand = model.fixed_load[i];
      for (const auto& r : model.renewables) supply += r.trace[i];
      for (const auto& out : sc.unit_output) supply += out[i];
      for (std::size_t k = 0; k < sc.charge.size(); ++k) {
        supply += sc.discharge[k][i];
        demand += sc.charge[k][i];
      }
      for (std::size_t a = 0; a < sc.load.size(); ++a) {
        demand += sc.load[a][i];
        if (model.adjustable_loads[a].fixed_profile) demand += (*model.adjustable_loads[a].fixed_profile)[i];
      }
      bump(c.max_balance_residual, std::abs(supply - demand));
      if (scen.islanded(i)) bump(c.max_island_exchange, std::abs(sc.exchange[i]));
      bump(c.max_exchange_excess, std::abs(sc.exchange[i]) - model.exchange_capacity_MW);
    }
    for (std::size_t u = 0; u < sc.unit_output.size(); ++u) {
      const auto& unit = model.units[u];
      const auto& p = sc.unit_output[u];
      for (std::size_t i = 0; i < N; ++i) {
        int on = sched.commitment[u][g.hour_of(i) - 1];
        bump(c.max_unit_bound, std::max(on * unit.p_min_MW - p[i], p[i] - on * unit.p_max_MW));
        if (i == 0) continue;
        int prev_on = sched.commitment[u][g.hour_of(i - 1) - 1];
        if (on && prev_on) {
          bump(c.max_ramp_excess, p[i] - p[i - 1] - unit.ramp_up_MW);
          bump(c.max_ramp_excess, p[i - 1] - p[i] - unit.ramp_down_MW);
        }
      }
    }
    for (std::size_t k = 0; k < sc.energy.size(); ++k) {
      const auto& st = model.storages[k];
      double prev = st.initial_energy_MWh;
      for (std::size_t i = 0; i < N; ++i) {
        double e = sc.energy[k][i];
        double expect = prev + (st.eta_charge * sc.charge[k][i] - sc.discharge[k][i] / st.eta_discharge) * h;
        bump(c.max_storage_recursion, std::abs(e - expect));
        bump(c.max_storage_bound, std::max(st.e_min_MWh - e, e - st.capacity_MWh));
        prev = e;
      }
      bump(c.max_storage_bound, st.terminal_min() - sc.energy[k][N - 1]);
    }
    for (std::size_t a = 0; a < sc.load.size(); ++a) {
      const auto& al = model.adjustable_loads[a];
      double energy = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double l = sc.load[a][i];
        energy += l * h;
        if (al.window.contains(i)) bump(c.max_load_residual, std::max(al.p_min_MW - l, l - al.p_max_MW));
        else bump(c.max_load_residual, std::abs(l));
      }
      bump(c.max_load_residual, std::abs(energy - al.total_energy_MWh));
    }
  }
  return c;
}

}  // namespace mgflex

#endif  // MGFLEX_SCHEDULING_SCHEDULE_HPP
