#ifndef MGFLEX_IO_OUTPUTS_HPP
#define MGFLEX_IO_OUTPUTS_HPP

// Run artifacts: schedule tables, plot series, comparison and summary
// documents. Every writer is deterministic for identical inputs.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgflex/analysis.hpp"
#include "mgflex/io/case_io.hpp"
#include "mgflex/io/csv.hpp"

namespace mgflex::io {

// One row per (scenario, step). The scenario column holds the index into
// the case's scenario list; commitment columns repeat the hourly status.
inline std::string schedule_table(const Schedule& s, const MicrogridModel& m) {
  const TimeGrid& g = s.grid;
  std::string out = "scenario,minute";
  for (const auto& u : m.units) out += "," + u.id + "_on," + u.id + "_MW";
  for (const auto& st : m.storages) {
    out += "," + st.id + "_charge_MW," + st.id + "_discharge_MW," + st.id + "_energy_MWh";
  }
  for (const auto& a : m.adjustable_loads) out += "," + a.id + "_MW";
  out += ",exchange_MW\n";
  for (std::size_t sc = 0; sc < s.scenarios.size(); ++sc) {
    const auto& x = s.scenarios[sc];
    for (std::size_t i = 0; i < g.size(); ++i) {
      out += std::to_string(sc) + "," + std::to_string(g.minute_of(i));
      for (std::size_t u = 0; u < m.units.size(); ++u) {
        out += "," + std::to_string(s.commitment[u][g.hour_of(i) - 1]) + "," + format_number(x.unit_output[u][i]);
      }
      for (std::size_t k = 0; k < m.storages.size(); ++k) {
        out += "," + format_number(x.charge[k][i]) + "," + format_number(x.discharge[k][i]) + "," +
               format_number(x.energy[k][i]);
      }
      for (std::size_t a = 0; a < m.adjustable_loads.size(); ++a) out += "," + format_number(x.load[a][i]);
      out += "," + format_number(x.exchange[i]) + "\n";
    }
  }
  return out;
}

// Inverse of schedule_table. The cost breakdown is recomputed from the
// series, so a written schedule reproduces its cost.
inline Schedule read_schedule(const Table& t, const MicrogridModel& m, const ScenarioSet& scenarios,
                              const Profile& prices) {
  const TimeGrid& g = m.grid;
  const std::size_t N = g.size();
  if (t.rows.size() != N * scenarios.size()) {
    throw Error(ErrorCode::dimension, t.source + ": has " + std::to_string(t.rows.size()) + " rows, expected " +
                                          std::to_string(N * scenarios.size()));
  }
  int c_scen = t.require_column("scenario");
  int c_min = t.require_column("minute");
  Schedule s{g, std::vector<std::vector<int>>(m.units.size(), std::vector<int>(g.hours(), 0)), {}, {}};
  for (std::size_t sc = 0; sc < scenarios.size(); ++sc) {
    ScenarioSchedule x;
    x.id = scenarios[sc].id;
    x.probability = scenarios[sc].probability;
    x.exchange.resize(N);
    x.unit_output.assign(m.units.size(), std::vector<double>(N));
    x.charge.assign(m.storages.size(), std::vector<double>(N));
    x.discharge = x.charge;
    x.energy = x.charge;
    x.load.assign(m.adjustable_loads.size(), std::vector<double>(N));
    s.scenarios.push_back(std::move(x));
  }
  std::vector<int> on_col, p_col, ch_col, dis_col, e_col, l_col;
  for (const auto& u : m.units) {
    on_col.push_back(t.require_column(u.id + "_on"));
    p_col.push_back(t.require_column(u.id + "_MW"));
  }
  for (const auto& st : m.storages) {
    ch_col.push_back(t.require_column(st.id + "_charge_MW"));
    dis_col.push_back(t.require_column(st.id + "_discharge_MW"));
    e_col.push_back(t.require_column(st.id + "_energy_MWh"));
  }
  for (const auto& a : m.adjustable_loads) l_col.push_back(t.require_column(a.id + "_MW"));
  int c_ex = t.require_column("exchange_MW");

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::size_t sc = r / N, i = r % N;
    if (row[c_scen] != static_cast<double>(sc) || row[c_min] != g.minute_of(i)) {
      throw Error(ErrorCode::schema, t.source + ": row " + std::to_string(r + 1) + " is out of order");
    }
    auto& x = s.scenarios[sc];
    for (std::size_t u = 0; u < m.units.size(); ++u) {
      s.commitment[u][g.hour_of(i) - 1] = static_cast<int>(std::lround(row[on_col[u]]));
      x.unit_output[u][i] = row[p_col[u]];
    }
    for (std::size_t k = 0; k < m.storages.size(); ++k) {
      x.charge[k][i] = row[ch_col[k]];
      x.discharge[k][i] = row[dis_col[k]];
      x.energy[k][i] = row[e_col[k]];
    }
    for (std::size_t a = 0; a < m.adjustable_loads.size(); ++a) x.load[a][i] = row[l_col[a]];
    x.exchange[i] = row[c_ex];
  }
  s.cost = operation_cost(s, m, prices);
  return s;
}

inline std::string prosumer_aggregate_table(const FeederCase& fc) {
  const TimeGrid& g = fc.grid();
  std::vector<double> cons(g.size(), 0.0), gen(g.size(), 0.0);
  for (const auto& p : fc.prosumer_parts) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      cons[i] += p.consumption[i];
      gen[i] += p.generation[i];
    }
  }
  TableWriter w(g);
  w.add("consumption_MW", cons);
  w.add("generation_MW", gen);
  w.add("net_MW", fc.prosumers.aggregate().values());
  return w.str();
}

struct ModeSeries {
  Mode mode;
  const Schedule* schedule;
};

// Feeder net load, or the microgrid exchange when feeder is false, with one
// column per mode and scenario.
inline std::string mode_series_table(const FeederCase& fc, const std::vector<ModeSeries>& runs, bool feeder) {
  TableWriter w(fc.grid());
  for (const auto& r : runs) {
    for (std::size_t s = 0; s < fc.scenarios.size(); ++s) {
      Profile ex = r.schedule->exchange_profile(s);
      Profile v = feeder ? aggregate_feeder(ex, fc.prosumers) : ex;
      w.add(std::string(to_string(r.mode)) + "_" + fc.scenarios[s].id + "_MW", v.values());
    }
  }
  return w.str();
}

inline std::string envelope_table(const ExchangeEnvelope& env, const ScenarioSet& scenarios) {
  TableWriter w(env.grid());
  for (std::size_t s = 0; s < env.scenario_count(); ++s) {
    std::vector<double> lo(env.grid().size()), hi(env.grid().size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] = env.lower(s, i);
      hi[i] = env.upper(s, i);
    }
    w.add(scenarios[s].id + "_lower_MW", lo);
    w.add(scenarios[s].id + "_upper_MW", hi);
  }
  return w.str();
}

namespace detail {

inline json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline json cost_json(const CostBreakdown& c) {
  return {{"generation", c.generation},     {"no_load", c.no_load},         {"startup", c.startup},
          {"energy_purchase", c.energy_purchase}, {"energy_sale", c.energy_sale}, {"total", c.total}};
}

inline json mode_report_json(const ModeReport& r, const ScenarioSet& scenarios) {
  json ramps = json::array();
  for (std::size_t s = 0; s < r.ramps.size(); ++s) {
    const auto& m = r.ramps[s];
    ramps.push_back({{"scenario", scenarios[s].id},
                     {"max_intra_MW", m.max_intra},
                     {"max_inter_MW", m.max_inter},
                     {"mean_abs_intra_MW", m.mean_abs_intra},
                     {"mean_abs_inter_MW", m.mean_abs_inter}});
  }
  return {{"mode", to_string(r.mode)},
          {"cost", cost_json(r.cost)},
          {"intra_hour_violations", r.intra_violations},
          {"inter_hour_violations", r.inter_violations},
          {"feeder_ramps", ramps}};
}

}  // namespace detail

inline json comparison_json(const ComparisonReport& rep, const ScenarioSet& scenarios, const std::string& currency) {
  json pct = nullptr;
  if (rep.percent_increase) pct = *rep.percent_increase;
  return {{"currency", currency},
          {"delta1_MW_per_step", detail::limit_json(rep.limits.delta1)},
          {"delta2_MW", detail::limit_json(rep.limits.delta2)},
          {"price_based", detail::mode_report_json(rep.price, scenarios)},
          {"flexibility_oriented", detail::mode_report_json(rep.flex, scenarios)},
          {"cost_increase", rep.cost_increase},
          {"percent_increase", pct}};
}

inline json solution_json(const milp::MilpSolution& s) {
  return {{"status", milp::to_string(s.status)},
          {"objective", detail::number_or_null(s.objective)},
          {"best_bound", detail::number_or_null(s.best_bound)},
          {"root_bound", detail::number_or_null(s.root_bound)},
          {"relative_gap", detail::number_or_null(s.gap)},
          {"nodes", s.nodes},
          {"lp_iterations", s.lp_iterations}};
}

}  // namespace mgflex::io

#endif  // MGFLEX_IO_OUTPUTS_HPP
