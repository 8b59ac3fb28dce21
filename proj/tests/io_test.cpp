#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mgflex/io/case_io.hpp"
#include "mgflex/io/run_case.hpp"

namespace mgflex::io {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mgflex_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void replace_in(const fs::path& file, const std::string& from, const std::string& to) {
  std::string text = read_text(file);
  auto pos = text.find(from);
  ASSERT_NE(pos, std::string::npos) << from;
  text.replace(pos, from.size(), to);
  write_text(file, text);
}

ErrorCode load_error(const fs::path& p, std::string* message = nullptr) {
  try {
    load_case(p);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return ErrorCode{};
}

TEST(Csv, ParsesHeaderAndNumbers) {
  Table t = parse_table("minute,a_MW\n# comment\n0,1.5\n60,-2e-3\n", "x.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"minute", "a_MW"}));
  EXPECT_EQ(t.values(1), (std::vector<double>{1.5, -2e-3}));
  EXPECT_THROW(parse_table("", "x.csv"), Error);
  try {
    parse_table("minute,a\n0,abc\n", "x.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema);
    EXPECT_NE(std::string(e.what()).find("x.csv:2"), std::string::npos);
  }
  EXPECT_THROW(parse_table("minute,a\n0\n", "x.csv"), Error);
}

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -7.25e-12, 123456789.123456789, 0.0}) {
    double back = 0.0;
    std::string s = format_number(v);
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
}

TEST(CaseFiles, FixtureRoundTrips) {
  fs::path dir = scratch("roundtrip");
  FeederCase fc = default_fixture(2);
  CaseConfig cfg;
  cfg.limits.delta1 = 0.25;
  write_case(dir, fc, cfg);
  LoadedCase lc = load_case(dir / "case.json");
  EXPECT_EQ(lc.config.steps_per_hour, 2);
  EXPECT_EQ(lc.config.limits.delta1, 0.25);
  EXPECT_FALSE(lc.config.limits.delta2.has_value());
  const auto& m = lc.data.model;
  ASSERT_EQ(m.units.size(), 4u);
  EXPECT_EQ(m.renewables.size(), 2u);
  EXPECT_EQ(m.storages.size(), 1u);
  EXPECT_EQ(m.adjustable_loads.size(), 5u);
  EXPECT_EQ(m.units[2].ramp_up_MW, fc.model.units[2].ramp_up_MW);
  EXPECT_EQ(m.adjustable_loads[3].window.begin, fc.model.adjustable_loads[3].window.begin);
  EXPECT_EQ(m.fixed_load.values(), fc.model.fixed_load.values());
  EXPECT_EQ(m.renewables[1].trace.values(), fc.model.renewables[1].trace.values());
  EXPECT_EQ(lc.data.prices.values(), fc.prices.values());
  EXPECT_EQ(lc.data.prosumers.aggregate().values(), fc.prosumers.aggregate().values());
  ASSERT_EQ(lc.data.scenarios.size(), 2u);
  EXPECT_EQ(lc.data.scenarios[1].islanding_windows[0].begin, fc.scenarios[1].islanding_windows[0].begin);
  EXPECT_EQ(lc.data.scenarios[1].probability, 0.1);
}

TEST(CaseFiles, RejectsResolutionThatDoesNotDivideAnHour) {
  fs::path dir = scratch("k7");
  write_case(dir, default_fixture(1), {});
  replace_in(dir / "case.json", "\"steps_per_hour\": 1", "\"steps_per_hour\": 7");
  EXPECT_EQ(load_error(dir / "case.json"), ErrorCode::schema);
}

TEST(CaseFiles, ProfileLengthMismatchNamesTheFile) {
  fs::path dir = scratch("length");
  write_case(dir, default_fixture(1), {});
  std::string text = read_text(dir / "prices.csv");
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  write_text(dir / "prices.csv", text);
  std::string msg;
  EXPECT_EQ(load_error(dir / "case.json", &msg), ErrorCode::dimension);
  EXPECT_NE(msg.find("prices.csv"), std::string::npos);
}

TEST(CaseFiles, MissingFileIsAnIoError) {
  fs::path dir = scratch("missing");
  write_case(dir, default_fixture(1), {});
  fs::remove(dir / "scenarios.json");
  EXPECT_EQ(load_error(dir / "case.json"), ErrorCode::io);
}

TEST(CaseFiles, UnknownFieldIsRejectedWithItsPath) {
  fs::path dir = scratch("unknown");
  write_case(dir, default_fixture(1), {});
  replace_in(dir / "model.json", "\"p_max_MW\": 4.0", "\"p_max_MW\": 4.0, \"pmax\": 3");
  std::string msg;
  EXPECT_EQ(load_error(dir / "case.json", &msg), ErrorCode::schema);
  EXPECT_NE(msg.find("units[0]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("pmax"), std::string::npos) << msg;
}

TEST(CaseFiles, MisalignedWindowIsRejected) {
  fs::path dir = scratch("window");
  write_case(dir, default_fixture(1), {});
  replace_in(dir / "scenarios.json", "\"start_minute\": 1020", "\"start_minute\": 1030");
  EXPECT_EQ(load_error(dir / "case.json"), ErrorCode::schema);
}

TEST(CaseFiles, OversizedAdjustableLoadIsAModelError) {
  fs::path dir = scratch("model");
  write_case(dir, default_fixture(1), {});
  replace_in(dir / "model.json", "\"total_energy_MWh\": 1.2", "\"total_energy_MWh\": 50.0");
  EXPECT_EQ(load_error(dir / "case.json"), ErrorCode::model);
}

TEST(CaseFiles, BadLimitValue) {
  fs::path dir = scratch("limit");
  write_case(dir, default_fixture(1), {});
  replace_in(dir / "case.json", "\"delta1_MW_per_step\": \"unbounded\"", "\"delta1_MW_per_step\": -1");
  EXPECT_EQ(load_error(dir / "case.json"), ErrorCode::schema);
}

CaseConfig both_modes(double delta1) {
  CaseConfig cfg;
  cfg.limits.delta1 = delta1;
  return cfg;
}

std::size_t data_rows(const fs::path& p) { return read_table(p).rows.size(); }

TEST(RunCase, WritesSeriesFilesWithOneRowPerStep) {
  for (int k : {1, 2}) {
    fs::path dir = scratch("series" + std::to_string(k));
    FeederCase fc = default_fixture(k);
    RunResult res = run_case(fc, both_modes(0.0), dir);
    ASSERT_TRUE(res.complete) << res.message;
    for (const char* f : {"prosumer_aggregate.csv", "feeder_net_load.csv", "microgrid_exchange.csv"}) {
      EXPECT_EQ(data_rows(dir / f), fc.grid().size()) << f;
    }
    Table feeder = read_table(dir / "feeder_net_load.csv");
    EXPECT_GE(feeder.column("price_based_grid_connected_MW"), 0);
    EXPECT_GE(feeder.column("flexibility_oriented_grid_connected_MW"), 0);
    EXPECT_TRUE(fs::exists(dir / "comparison.json"));
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    if (k == 1) EXPECT_EQ(read_table(dir / "prosumer_aggregate.csv").rows[1][0], 60.0);
  }
}

TEST(RunCase, ScheduleTableReproducesCost) {
  fs::path dir = scratch("schedule");
  FeederCase fc = default_fixture(2);
  RunResult res = run_case(fc, both_modes(0.0), dir);
  ASSERT_TRUE(res.complete);
  for (const auto& m : res.modes) {
    Table t = read_table(dir / (std::string("schedule_") + to_string(m.mode) + ".csv"));
    Schedule back = read_schedule(t, fc.model, fc.scenarios, fc.prices);
    EXPECT_NEAR(back.cost.total, m.schedule->cost.total, 1e-9);
    EXPECT_EQ(back.commitment, m.schedule->commitment);
  }
}

TEST(RunCase, IdenticalInputsGiveIdenticalFiles) {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  FeederCase fc = default_fixture(2);
  RunResult ra = run_case(fc, both_modes(0.1), a);
  RunResult rb = run_case(default_fixture(2), both_modes(0.1), b);
  ASSERT_EQ(ra.files, rb.files);
  for (const auto& f : ra.files) EXPECT_EQ(read_text(a / f), read_text(b / f)) << f;
}

TEST(RunCase, InfeasibleRunLeavesIncompleteSummary) {
  fs::path dir = scratch("infeasible");
  TimeGrid g(2, 1);
  MicrogridModel m(g);
  m.exchange_capacity_MW = 5.0;
  m.fixed_load = Profile::constant(g, 1.0);
  ScenarioSet sc(g, {{"base", {}, 0.5}, {"island", {{0, 2}}, 0.5}});
  FeederCase fc{m, {}, ProsumerSet(g, {}), Profile::constant(g, 10.0), sc, "$"};
  CaseConfig cfg;
  cfg.modes = {Mode::price_based};
  RunResult res = run_case(fc, cfg, dir);
  EXPECT_FALSE(res.complete);
  EXPECT_EQ(res.failure, ErrorCode::infeasible);
  EXPECT_FALSE(fs::exists(dir / "feeder_net_load.csv"));
  json summary = json::parse(read_text(dir / "summary.json"));
  EXPECT_EQ(summary["complete"], false);
  EXPECT_EQ(summary["exit_code"], static_cast<int>(ErrorCode::infeasible));
  EXPECT_EQ(summary["runs"][0]["solution"]["status"], "infeasible");
}

TEST(RunCase, UnboundedLimitsCostsAgree) {
  fs::path dir = scratch("recovery");
  CaseConfig cfg;
  RunResult res = run_case(default_fixture(2), cfg, dir);
  ASSERT_TRUE(res.complete);
  ASSERT_TRUE(res.comparison.has_value());
  EXPECT_LE(std::abs(res.comparison->cost_increase), 2.0 * cfg.solver.rel_gap * res.comparison->price.cost.total);
}

}  // namespace
}  // namespace mgflex::io
