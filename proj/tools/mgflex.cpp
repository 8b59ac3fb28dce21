// mgflex: command-line front end for microgrid scheduling studies.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 schema, 4 dimension, 5 model,
// 6 infeasible, 7 no solution within limits, 8 integrity, 9 internal.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mgflex/analysis.hpp"
#include "mgflex/io/case_io.hpp"
#include "mgflex/io/fixture.hpp"
#include "mgflex/io/outputs.hpp"
#include "mgflex/io/run_case.hpp"

namespace fs = std::filesystem;
using namespace mgflex;

namespace {

constexpr int kInternalExit = 9;

struct CommonFlags {
  std::string case_path;
  std::string mode;
  std::string delta1;
  std::string delta2;
  std::optional<int> steps_per_hour;
  std::optional<std::uint64_t> seed;
  std::optional<double> gap;
  std::string out;
};

std::optional<double> parse_limit(const std::string& flag, const std::string& text) {
  if (text == "unbounded") return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::usage, flag + " expects a number or 'unbounded', got '" + text + "'");
  }
}

io::CaseConfig fixture_config() {
  io::CaseConfig cfg;
  cfg.limits.delta1 = 0.0;
  return cfg;
}

// Loads the case named on the command line, or generates the built-in
// fixture, and applies flag overrides.
io::LoadedCase resolve_case(const CommonFlags& f) {
  io::LoadedCase lc = [&]() -> io::LoadedCase {
    if (!f.case_path.empty()) {
      if (f.steps_per_hour || f.seed) {
        throw Error(ErrorCode::usage, "--steps-per-hour and --seed apply to the built-in fixture only");
      }
      return io::load_case(f.case_path);
    }
    io::CaseConfig cfg = fixture_config();
    if (f.steps_per_hour) cfg.steps_per_hour = *f.steps_per_hour;
    if (f.seed) cfg.seed = *f.seed;
    FeederCase fc = default_fixture(cfg.steps_per_hour, cfg.seed);
    return {cfg, std::move(fc)};
  }();
  io::CaseConfig& cfg = lc.config;
  if (!f.mode.empty()) {
    if (f.mode == "both") cfg.modes = {Mode::price_based, Mode::flexibility_oriented};
    else cfg.modes = {io::parse_mode(f.mode)};
  }
  if (!f.delta1.empty()) cfg.limits.delta1 = parse_limit("--delta1", f.delta1);
  if (!f.delta2.empty()) cfg.limits.delta2 = parse_limit("--delta2", f.delta2);
  cfg.limits.validate();
  if (f.gap) cfg.solver.rel_gap = *f.gap;
  return lc;
}

// Flag beats environment beats case file.
fs::path output_dir(const CommonFlags& f, const io::CaseConfig& cfg) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("MGFLEX_OUTPUT_DIR"); env && *env) return env;
  fs::path p = cfg.output_dir;
  if (p.is_relative() && !f.case_path.empty()) p = fs::path(f.case_path).parent_path() / p;
  return p;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    io::write_text(out, text);
  }
}

int cmd_fixture(const CommonFlags& f) {
  io::LoadedCase lc = resolve_case(f);
  fs::path dir = output_dir(f, lc.config);
  io::CaseConfig cfg = lc.config;
  cfg.output_dir = "out";
  io::write_case(dir, lc.data, cfg);
  std::cout << "fixture written to " << (dir / "case.json").string() << "\n";
  return 0;
}

int cmd_check(const CommonFlags& f) {
  io::LoadedCase lc = resolve_case(f);
  const FeederCase& fc = lc.data;
  lc.config.limits.validate();
  std::cout << "ok: " << fc.grid().hours() << " h x " << fc.grid().steps_per_hour() << " steps, "
            << fc.model.units.size() << " units, " << fc.model.renewables.size() << " renewables, "
            << fc.model.storages.size() << " storages, " << fc.model.adjustable_loads.size()
            << " adjustable loads, " << fc.prosumers.members().size() << " prosumers, "
            << fc.scenarios.size() << " scenarios\n";
  return 0;
}

int cmd_run(const CommonFlags& f) {
  io::LoadedCase lc = resolve_case(f);
  fs::path dir = output_dir(f, lc.config);
  io::RunResult res = io::run_case(lc.data, lc.config, dir);
  for (auto it = res.modes.rbegin(); it != res.modes.rend(); ++it) {
    std::printf("%-22s %-12s", to_string(it->mode), milp::to_string(it->solution.status));
    if (it->schedule) std::printf(" cost %.2f %s", it->schedule->cost.total, lc.data.currency.c_str());
    std::printf("\n");
  }
  if (res.comparison && res.comparison->percent_increase) {
    std::printf("flexibility premium %.2f %s (%.3f%%)\n", res.comparison->cost_increase,
                lc.data.currency.c_str(), *res.comparison->percent_increase);
  }
  std::cout << "outputs in " << dir.string() << "\n";
  if (!res.complete) {
    std::cerr << "mgflex: " << res.message << "\n";
    return static_cast<int>(res.failure);
  }
  return 0;
}

int cmd_envelope(const CommonFlags& f) {
  io::LoadedCase lc = resolve_case(f);
  ExchangeEnvelope env = exchange_envelope(lc.data.prosumers, lc.config.limits, lc.data.scenarios);
  emit(f.out, io::envelope_table(env, lc.data.scenarios));
  return 0;
}

int cmd_compare(const CommonFlags& f, const std::string& price_file, const std::string& flex_file) {
  io::LoadedCase lc = resolve_case(f);
  const FeederCase& fc = lc.data;
  Schedule price = io::read_schedule(io::read_table(price_file), fc.model, fc.scenarios, fc.prices);
  Schedule flex = io::read_schedule(io::read_table(flex_file), fc.model, fc.scenarios, fc.prices);
  ComparisonReport rep =
      compare_modes(price, flex, fc.model, fc.prices, fc.scenarios, fc.prosumers, lc.config.limits);
  emit(f.out, io::comparison_json(rep, fc.scenarios, fc.currency).dump(2) + "\n");
  return 0;
}

// Lattice columns: delta1_MW_per_step, delta2_MW, grid_upgrade_saving and
// optionally microgrid_payment; inf marks an unbounded limit. Missing
// payments are computed by re-solving the schedule per candidate.
int cmd_select(const CommonFlags& f, const std::string& lattice_file) {
  io::LoadedCase lc = resolve_case(f);
  const FeederCase& fc = lc.data;
  io::Table t = io::read_table(lattice_file);
  int c1 = t.require_column("delta1_MW_per_step");
  int c2 = t.require_column("delta2_MW");
  int cs = t.require_column("grid_upgrade_saving");
  int cp = t.column("microgrid_payment");
  auto lim = [](double v) { return std::isinf(v) ? std::nullopt : std::optional<double>(v); };
  FlexCostCurves curves;
  std::vector<FlexibilityLimits> cands;
  for (const auto& row : t.rows) {
    FlexibilityLimits l{lim(row[c1]), lim(row[c2])};
    cands.push_back(l);
    curves.samples.push_back({l, row[cs], cp >= 0 ? row[cp] : 0.0});
  }
  if (cp < 0 && !cands.empty()) {
    auto pay = microgrid_payments(fc.model, fc.prices, fc.scenarios, fc.prosumers, cands,
                                  lc.config.solver.options());
    for (std::size_t i = 0; i < pay.size(); ++i) curves.samples[i].microgrid_payment = pay[i];
  }
  LimitCandidate best = select_limits(curves);
  io::json lattice = io::json::array();
  for (const auto& c : curves.samples) {
    lattice.push_back({{"delta1_MW_per_step", io::detail::limit_json(c.limits.delta1)},
                       {"delta2_MW", io::detail::limit_json(c.limits.delta2)},
                       {"grid_upgrade_saving", c.grid_upgrade_saving},
                       {"microgrid_payment", c.microgrid_payment},
                       {"net", c.net()}});
  }
  io::json doc = {{"currency", fc.currency},
                  {"selected",
                   {{"delta1_MW_per_step", io::detail::limit_json(best.limits.delta1)},
                    {"delta2_MW", io::detail::limit_json(best.limits.delta2)},
                    {"net", best.net()}}},
                  {"lattice", lattice}};
  emit(f.out, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Price-based and flexibility-oriented microgrid scheduling"};
  app.require_subcommand(1);
  CommonFlags f;
  std::string price_file, flex_file, lattice_file;

  auto add_case = [&](CLI::App* sub) {
    sub->add_option("case", f.case_path, "case.json; omit to use the built-in fixture");
  };
  auto add_fixture_flags = [&](CLI::App* sub) {
    sub->add_option("--steps-per-hour,-K", f.steps_per_hour, "fixture resolution K (divides 60)");
    sub->add_option("--seed", f.seed, "fixture generator seed");
  };
  auto add_limits = [&](CLI::App* sub) {
    sub->add_option("--delta1", f.delta1, "intra-hour limit, MW per step, or 'unbounded'");
    sub->add_option("--delta2", f.delta2, "inter-hour limit, MW, or 'unbounded'");
  };

  auto* fixture = app.add_subcommand("fixture", "write the built-in fixture as a case directory");
  add_fixture_flags(fixture);
  add_limits(fixture);
  fixture->add_option("--mode", f.mode, "price_based, flexibility_oriented or both");
  fixture->add_option("--out,-o", f.out, "target directory")->required();

  auto* check = app.add_subcommand("check", "validate a case without solving");
  add_case(check);
  add_fixture_flags(check);

  auto* run = app.add_subcommand("run", "solve a case and write schedules, series and reports");
  add_case(run);
  add_fixture_flags(run);
  add_limits(run);
  run->add_option("--mode", f.mode, "price_based, flexibility_oriented or both");
  run->add_option("--gap", f.gap, "relative MIP gap");
  run->add_option("--out,-o", f.out, "output directory (overrides MGFLEX_OUTPUT_DIR)");

  auto* envelope = app.add_subcommand("envelope", "print the exchange envelope for the limits");
  add_case(envelope);
  add_fixture_flags(envelope);
  add_limits(envelope);
  envelope->add_option("--out,-o", f.out, "output file, '-' for stdout");

  auto* compare = app.add_subcommand("compare", "compare two written schedules");
  add_case(compare);
  add_fixture_flags(compare);
  add_limits(compare);
  compare->add_option("--price", price_file, "price-based schedule table")->required();
  compare->add_option("--flex", flex_file, "flexibility-oriented schedule table")->required();
  compare->add_option("--out,-o", f.out, "output file, '-' for stdout");

  auto* select = app.add_subcommand("select-limits", "cost-benefit choice of limits over a lattice");
  add_case(select);
  add_fixture_flags(select);
  select->add_option("--lattice", lattice_file, "candidate lattice table")->required();
  select->add_option("--gap", f.gap, "relative MIP gap");
  select->add_option("--out,-o", f.out, "output file, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorCode::usage);
  }

  try {
    if (*fixture) return cmd_fixture(f);
    if (*check) return cmd_check(f);
    if (*run) return cmd_run(f);
    if (*envelope) return cmd_envelope(f);
    if (*compare) return cmd_compare(f, price_file, flex_file);
    if (*select) return cmd_select(f, lattice_file);
  } catch (const Error& e) {
    std::cerr << "mgflex: " << to_string(e.code()) << " error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mgflex: internal error: " << e.what() << "\n";
    return kInternalExit;
  }
  return static_cast<int>(ErrorCode::usage);
}
