#ifndef MGFLEX_IO_RUN_CASE_HPP
#define MGFLEX_IO_RUN_CASE_HPP

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mgflex/io/outputs.hpp"

namespace mgflex::io {

struct ModeOutcome {
  Mode mode;
  milp::MilpSolution solution;
  std::optional<Schedule> schedule;
};

struct RunResult {
  ErrorCode failure{};  // meaningful only when complete is false
  bool complete = true;
  std::string message;
  std::vector<ModeOutcome> modes;
  std::optional<ComparisonReport> comparison;
  std::vector<std::string> files;  // relative to the output directory
};

// Solves every configured mode and writes the artifacts. When both modes
// run, the flexibility-oriented problem is solved first and seeds the
// price-based solve. A failed solve still leaves a summary marked
// incomplete; series files are written only for a complete run.
inline RunResult run_case(const FeederCase& fc, const CaseConfig& cfg, const std::filesystem::path& out) {
  fc.model.validate();
  cfg.limits.validate();
  RunResult res;
  std::vector<Mode> order;
  for (Mode m : {Mode::flexibility_oriented, Mode::price_based}) {
    if (std::find(cfg.modes.begin(), cfg.modes.end(), m) != cfg.modes.end()) order.push_back(m);
  }
  const bool both = order.size() == 2;

  milp::MilpOptions opt = cfg.solver.options();
  for (Mode m : order) {
    std::optional<ExchangeEnvelope> env;
    if (m == Mode::flexibility_oriented) env = exchange_envelope(fc.prosumers, cfg.limits, fc.scenarios);
    SchedulingProblem sp = build_problem(fc.model, fc.prices, fc.scenarios, m, env);
    ModeOutcome o{m, milp::solve_milp(sp.milp, opt), std::nullopt};
    try {
      o.schedule = extract_schedule(sp, o.solution);
    } catch (const Error& e) {
      res.complete = false;
      res.failure = e.code();
      res.message = std::string(to_string(m)) + ": " + e.what();
    }
    if (o.schedule && m == Mode::flexibility_oriented) opt.start = o.solution.values;
    res.modes.push_back(std::move(o));
    if (!res.complete) break;
  }

  auto write = [&](const std::string& name, const std::string& text) {
    write_text(out / name, text);
    res.files.push_back(name);
  };

  if (res.complete) {
    std::vector<ModeSeries> series;
    // Report order is price first regardless of solve order.
    for (auto it = res.modes.rbegin(); it != res.modes.rend(); ++it) {
      write(std::string("schedule_") + to_string(it->mode) + ".csv", schedule_table(*it->schedule, fc.model));
      series.push_back({it->mode, &*it->schedule});
    }
    write("prosumer_aggregate.csv", prosumer_aggregate_table(fc));
    write("feeder_net_load.csv", mode_series_table(fc, series, true));
    write("microgrid_exchange.csv", mode_series_table(fc, series, false));
    if (both) {
      res.comparison = compare_modes(*res.modes[1].schedule, *res.modes[0].schedule, fc.model, fc.prices,
                                     fc.scenarios, fc.prosumers, cfg.limits);
      write("comparison.json", comparison_json(*res.comparison, fc.scenarios, fc.currency).dump(2) + "\n");
    }
  }

  json runs = json::array();
  for (auto it = res.modes.rbegin(); it != res.modes.rend(); ++it) {
    json r = {{"mode", to_string(it->mode)}, {"solution", solution_json(it->solution)}};
    if (it->schedule) r["cost"] = detail::cost_json(it->schedule->cost);
    runs.push_back(r);
  }
  const TimeGrid& g = fc.grid();
  json summary = {
      {"format", "mgflex-summary 1"},
      {"complete", res.complete},
      {"exit_code", res.complete ? 0 : static_cast<int>(res.failure)},
      {"error", res.complete ? json(nullptr) : json(res.message)},
      {"hours", g.hours()},
      {"steps_per_hour", g.steps_per_hour()},
      {"currency", fc.currency},
      {"delta1_MW_per_step", detail::limit_json(cfg.limits.delta1)},
      {"delta2_MW", detail::limit_json(cfg.limits.delta2)},
      {"rel_gap", cfg.solver.rel_gap},
      {"seed", cfg.seed},
      {"runs", runs},
      {"files", res.files}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  res.files.push_back("summary.json");
  return res;
}

}  // namespace mgflex::io

#endif  // MGFLEX_IO_RUN_CASE_HPP
