#ifndef MGFLEX_SCHEDULING_BUILDER_HPP
#define MGFLEX_SCHEDULING_BUILDER_HPP

// Microgrid optimal-scheduling MILP.
//
// Commitment (u) and startup (v) are hourly and shared by all scenarios;
// dispatch, storage, adjustable loads and the grid exchange are per
// scenario and per intra-hour step. Exchange is import-positive. The
// objective is the probability-weighted operating cost:
//   no-load + startup + sum_s prob_s * (generation + price * exchange) * h

#include <optional>
#include <string>
#include <vector>

#include "mgflex/core_model.hpp"
#include "mgflex/milp/problem.hpp"
#include "mgflex/scheduling/model.hpp"

namespace mgflex {

struct ScenarioVariables {
  std::vector<std::vector<int>> unit_output;  // [unit][step]
  std::vector<std::vector<int>> charge;       // [storage][step]
  std::vector<std::vector<int>> discharge;
  std::vector<std::vector<int>> energy;
  std::vector<std::vector<int>> mode;         // [storage][step], -1 without binary
  std::vector<std::vector<int>> load;         // [adjustable][step], -1 outside window
  std::vector<int> exchange;                  // [step]
  std::vector<int> balance_row;               // [step]
};

struct SchedulingProblem {
  milp::MilpProblem milp;
  MicrogridModel model;
  Profile prices;
  ScenarioSet scenarios;
  Mode mode;
  std::vector<std::vector<int>> commitment;  // [unit][hour]
  std::vector<std::vector<int>> startup;     // [unit][hour]
  std::vector<ScenarioVariables> vars;       // [scenario]
  int flexibility_rows = 0;

  const TimeGrid& grid() const { return model.grid; }
};

namespace detail {

inline std::string tag(const std::string& kind, const std::string& id, std::size_t s, std::size_t i) {
  return kind + "[" + id + ",s" + std::to_string(s) + ",i" + std::to_string(i) + "]";
}

}  // namespace detail

// Adds the exchange-envelope rows: for every bounded (step, scenario) pair,
// lower <= exchange(i) - exchange(i-1) <= upper. Steps touching an
// islanding window are skipped; exchange is pinned to zero there.
inline void flexibility_constraints(SchedulingProblem& sp, const ExchangeEnvelope& env) {
  require_same_grid(sp.grid(), env.grid(), "flexibility_constraints");
  if (env.scenario_count() != sp.scenarios.size()) {
    throw Error(ErrorCode::dimension, "envelope covers " + std::to_string(env.scenario_count()) +
                                          " scenarios, problem has " +
                                          std::to_string(sp.scenarios.size()));
  }
  using milp::Sense;
  for (std::size_t s = 0; s < sp.scenarios.size(); ++s) {
    const Scenario& sc = sp.scenarios[s];
    const auto& x = sp.vars[s].exchange;
    for (std::size_t i = 1; i < sp.grid().size(); ++i) {
      if (!env.bounded(s, i) || sc.islanded(i) || sc.islanded(i - 1)) continue;
      std::vector<milp::Term> diff{{x[i], 1.0}, {x[i - 1], -1.0}};
      if (std::isfinite(env.lower(s, i))) {
        sp.milp.add_row(detail::tag("flex_lo", sc.id, s, i), diff, Sense::greater_equal, env.lower(s, i));
        ++sp.flexibility_rows;
      }
      if (std::isfinite(env.upper(s, i))) {
        sp.milp.add_row(detail::tag("flex_hi", sc.id, s, i), diff, Sense::less_equal, env.upper(s, i));
        ++sp.flexibility_rows;
      }
    }
  }
}

inline SchedulingProblem build_problem(const MicrogridModel& model, const Profile& prices,
                                       const ScenarioSet& scenarios, Mode mode,
                                       const std::optional<ExchangeEnvelope>& envelope = std::nullopt) {
  using milp::Sense;
  using milp::Term;
  model.validate();
  const TimeGrid& g = model.grid;
  require_same_grid(g, prices.grid(), "prices");
  require_same_grid(g, scenarios.grid(), "scenarios");
  if ((mode == Mode::flexibility_oriented) != envelope.has_value()) {
    throw Error(ErrorCode::model,
                "an exchange envelope is required for, and only for, flexibility-oriented mode");
  }

  SchedulingProblem sp{milp::MilpProblem{}, model, prices, scenarios, mode, {}, {}, {}, 0};
  milp::MilpProblem& p = sp.milp;
  const int T = g.hours();
  const std::size_t N = g.size();
  const double h = g.step_hours();

  // Commitment and startup indicators, hour resolution, initially off.
  for (const auto& u : model.units) {
    std::vector<int> on(T), up(T);
    for (int t = 0; t < T; ++t) {
      on[t] = p.add_variable("u[" + u.id + ",t" + std::to_string(t + 1) + "]", 0, 1, u.no_load_cost, true);
      up[t] = p.add_variable("v[" + u.id + ",t" + std::to_string(t + 1) + "]", 0, 1, u.startup_cost);
    }
    for (int t = 0; t < T; ++t) {
      std::vector<Term> start{{up[t], 1.0}, {on[t], -1.0}};
      if (t > 0) start.push_back({on[t - 1], 1.0});
      p.add_row("startup[" + u.id + ",t" + std::to_string(t + 1) + "]", start, Sense::greater_equal, 0.0);

      std::vector<Term> min_up{{on[t], -1.0}};
      for (int tau = std::max(0, t - u.min_up_h + 1); tau <= t; ++tau) min_up.push_back({up[tau], 1.0});
      p.add_row("min_up[" + u.id + ",t" + std::to_string(t + 1) + "]", min_up, Sense::less_equal, 0.0);

      std::vector<Term> min_down;
      for (int tau = std::max(0, t - u.min_down_h + 1); tau <= t; ++tau) min_down.push_back({up[tau], 1.0});
      if (t - u.min_down_h >= 0) min_down.push_back({on[t - u.min_down_h], 1.0});
      p.add_row("min_down[" + u.id + ",t" + std::to_string(t + 1) + "]", min_down, Sense::less_equal, 1.0);
    }
    sp.commitment.push_back(std::move(on));
    sp.startup.push_back(std::move(up));
  }

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios[s];
    const double prob = sc.probability;
    ScenarioVariables v;

    for (std::size_t ui = 0; ui < model.units.size(); ++ui) {
      const auto& u = model.units[ui];
      const auto& on = sp.commitment[ui];
      std::vector<int> out(N);
      for (std::size_t i = 0; i < N; ++i) {
        out[i] = p.add_variable(detail::tag("p", u.id, s, i), 0.0, u.p_max_MW, prob * u.marginal_cost * h);
        int t = g.hour_of(i) - 1;
        p.add_row(detail::tag("pmax", u.id, s, i), {{out[i], 1.0}, {on[t], -u.p_max_MW}}, Sense::less_equal, 0.0);
        if (u.p_min_MW > 0.0) {
          p.add_row(detail::tag("pmin", u.id, s, i), {{out[i], 1.0}, {on[t], -u.p_min_MW}},
                    Sense::greater_equal, 0.0);
        }
      }
      for (std::size_t i = 1; i < N; ++i) {
        if (!g.starts_hour(i)) {
          if (u.ramp_up_MW < u.p_max_MW) {
            p.add_row(detail::tag("ramp_up", u.id, s, i), {{out[i], 1.0}, {out[i - 1], -1.0}},
                      Sense::less_equal, u.ramp_up_MW);
          }
          if (u.ramp_down_MW < u.p_max_MW) {
            p.add_row(detail::tag("ramp_dn", u.id, s, i), {{out[i - 1], 1.0}, {out[i], -1.0}},
                      Sense::less_equal, u.ramp_down_MW);
          }
          continue;
        }
        // Across an hour boundary the limit applies only while the unit
        // stays committed; startups and shutdowns may jump.
        int t = g.hour_of(i) - 1;
        if (u.ramp_up_MW < u.p_max_MW) {
          p.add_row(detail::tag("ramp_up", u.id, s, i),
                    {{out[i], 1.0}, {out[i - 1], -1.0}, {on[t - 1], u.p_max_MW - u.ramp_up_MW}},
                    Sense::less_equal, u.p_max_MW);
        }
        if (u.ramp_down_MW < u.p_max_MW) {
          p.add_row(detail::tag("ramp_dn", u.id, s, i),
                    {{out[i - 1], 1.0}, {out[i], -1.0}, {on[t], u.p_max_MW - u.ramp_down_MW}},
                    Sense::less_equal, u.p_max_MW);
        }
      }
      v.unit_output.push_back(std::move(out));
    }

    for (const auto& st : model.storages) {
      std::vector<int> ch(N), dis(N), en(N), md(N, -1);
      const bool lossy = st.eta_charge * st.eta_discharge < 1.0;
      for (std::size_t i = 0; i < N; ++i) {
        ch[i] = p.add_variable(detail::tag("charge", st.id, s, i), 0.0, st.charge_max_MW);
        dis[i] = p.add_variable(detail::tag("discharge", st.id, s, i), 0.0, st.discharge_max_MW);
        double lo = st.e_min_MWh;
        if (i + 1 == N) lo = std::max(lo, st.terminal_min());
        en[i] = p.add_variable(detail::tag("energy", st.id, s, i), lo, st.capacity_MWh);
        std::vector<Term> rec{{en[i], 1.0}, {ch[i], -st.eta_charge * h}, {dis[i], h / st.eta_discharge}};
        double rhs = st.initial_energy_MWh;
        if (i > 0) {
          rec.push_back({en[i - 1], -1.0});
          rhs = 0.0;
        }
        p.add_row(detail::tag("soc", st.id, s, i), rec, Sense::equal, rhs);
        if (lossy) {
          // mode = 1 permits charging, mode = 0 permits discharging.
          md[i] = p.add_variable(detail::tag("mode", st.id, s, i), 0, 1, 0.0, true);
          p.add_row(detail::tag("ch_gate", st.id, s, i), {{ch[i], 1.0}, {md[i], -st.charge_max_MW}},
                    Sense::less_equal, 0.0);
          p.add_row(detail::tag("dis_gate", st.id, s, i), {{dis[i], 1.0}, {md[i], st.discharge_max_MW}},
                    Sense::less_equal, st.discharge_max_MW);
        }
      }
      v.charge.push_back(std::move(ch));
      v.discharge.push_back(std::move(dis));
      v.energy.push_back(std::move(en));
      v.mode.push_back(std::move(md));
    }

    for (const auto& a : model.adjustable_loads) {
      std::vector<int> ld(N, -1);
      std::vector<Term> total;
      for (std::size_t i = a.window.begin; i < a.window.end; ++i) {
        ld[i] = p.add_variable(detail::tag("load", a.id, s, i), a.p_min_MW, a.p_max_MW);
        total.push_back({ld[i], h});
      }
      p.add_row(detail::tag("energy_req", a.id, s, 0), total, Sense::equal, a.total_energy_MWh);
      v.load.push_back(std::move(ld));
    }

    v.exchange.resize(N);
    v.balance_row.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      double cap = sc.islanded(i) ? 0.0 : model.exchange_capacity_MW;
      v.exchange[i] = p.add_variable(detail::tag("exchange", sc.id, s, i), -cap, cap, prob * prices[i] * h);

      std::vector<Term> bal{{v.exchange[i], 1.0}};
      for (const auto& out : v.unit_output) bal.push_back({out[i], 1.0});
      for (std::size_t k = 0; k < model.storages.size(); ++k) {
        bal.push_back({v.discharge[k][i], 1.0});
        bal.push_back({v.charge[k][i], -1.0});
      }
      for (const auto& ld : v.load) {
        if (ld[i] >= 0) bal.push_back({ld[i], -1.0});
      }
      double demand = model.fixed_load[i];
      for (const auto& a : model.adjustable_loads) {
        if (a.fixed_profile) demand += (*a.fixed_profile)[i];
      }
      for (const auto& r : model.renewables) demand -= r.trace[i];
      v.balance_row[i] = p.add_row(detail::tag("balance", sc.id, s, i), bal, Sense::equal, demand);
    }
    sp.vars.push_back(std::move(v));
  }

  if (envelope) flexibility_constraints(sp, *envelope);
  return sp;
}

}  // namespace mgflex

#endif  // MGFLEX_SCHEDULING_BUILDER_HPP
