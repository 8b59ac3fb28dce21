#ifndef MGFLEX_IO_CASE_IO_HPP
#define MGFLEX_IO_CASE_IO_HPP

// Case files: a JSON case config that points at a JSON model, a JSON
// scenario list and three profile tables. Field names carry their units.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgflex/io/csv.hpp"
#include "mgflex/io/feeder_case.hpp"
#include "mgflex/io/fixture.hpp"
#include "mgflex/milp/branch_and_bound.hpp"

namespace mgflex::io {

using json = nlohmann::ordered_json;

struct SolverSettings {
  double rel_gap = 1e-4;
  long node_limit = 100000;
  std::optional<double> time_limit_s;

  milp::MilpOptions options() const {
    milp::MilpOptions o;
    o.rel_gap = rel_gap;
    o.node_limit = node_limit;
    if (time_limit_s) o.time_limit_s = *time_limit_s;
    return o;
  }
};

struct CaseFiles {
  std::string model = "model.json";
  std::string device_profiles = "device_profiles.csv";
  std::string prosumers = "prosumers.csv";
  std::string prices = "prices.csv";
  std::string scenarios = "scenarios.json";
};

struct CaseConfig {
  int hours = kFixtureHours;
  int steps_per_hour = 6;
  std::string currency = "$";
  CaseFiles files;
  std::vector<Mode> modes{Mode::price_based, Mode::flexibility_oriented};
  FlexibilityLimits limits;
  SolverSettings solver;
  std::string output_dir = "out";
  std::uint64_t seed = kFixtureSeed;
};

struct LoadedCase {
  CaseConfig config;
  FeederCase data;
};

namespace detail {

// Field access with the file and key path in every message.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorCode::schema, where_ + ": " + msg); }

  bool has(const std::string& key) const {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) const {
    used_.insert(key);
    if (!j_.contains(key)) fail("missing field '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail("field '" + key + "' must be a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
    return v.get<long>();
  }

  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail("field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  // A finite number or the string "unbounded".
  std::optional<double> limit(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const json& v = raw(key);
    if (v.is_string() && v.get<std::string>() == "unbounded") return std::nullopt;
    if (!v.is_number()) fail("field '" + key + "' must be a number or \"unbounded\"");
    return v.get<double>();
  }

  std::vector<Reader> list(const std::string& key) const {
    std::vector<Reader> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) fail("field '" + key + "' must be an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.emplace_back(v[i], where_ + "." + key + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  Reader object(const std::string& key) const { return Reader(raw(key), where_ + "." + key); }

  // Rejects keys that were never looked up, which catches misspellings.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) fail("unknown field '" + k + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  mutable std::set<std::string> used_;
};

inline json parse_json(const std::filesystem::path& path) {
  std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema, path.string() + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline StepRange read_window(const Reader& r, const TimeGrid& g) {
  long a = r.integer("start_minute");
  long b = r.integer("end_minute");
  r.finish();
  long step = g.step_minutes();
  long total = static_cast<long>(g.size()) * step;
  if (a % step != 0 || b % step != 0) {
    r.fail("window minutes must be multiples of the " + std::to_string(step) + "-minute step");
  }
  if (a < 0 || b > total || a >= b) r.fail("window must satisfy 0 <= start < end <= " + std::to_string(total));
  return {static_cast<std::size_t>(a / step), static_cast<std::size_t>(b / step)};
}

inline json window_json(const StepRange& w, const TimeGrid& g) {
  return {{"start_minute", g.minute_of(w.begin)}, {"end_minute", static_cast<long>(w.end) * g.step_minutes()}};
}

inline json limit_json(const std::optional<double>& d) {
  if (d) return *d;
  return "unbounded";
}

}  // namespace detail

inline Mode parse_mode(const std::string& s) {
  if (s == "price_based") return Mode::price_based;
  if (s == "flexibility_oriented") return Mode::flexibility_oriented;
  throw Error(ErrorCode::schema, "unknown mode '" + s + "' (expected price_based or flexibility_oriented)");
}

inline CaseConfig parse_config(const json& j, const std::string& where) {
  detail::Reader r(j, where);
  CaseConfig c;
  c.hours = static_cast<int>(r.integer("hours"));
  c.steps_per_hour = static_cast<int>(r.integer("steps_per_hour"));
  c.currency = r.text_or("currency", c.currency);
  {
    detail::Reader f = r.object("files");
    c.files.model = f.text("model");
    c.files.device_profiles = f.text("device_profiles");
    c.files.prosumers = f.text("prosumers");
    c.files.prices = f.text("prices");
    c.files.scenarios = f.text("scenarios");
    f.finish();
  }
  if (r.has("modes")) {
    const json& m = r.raw("modes");
    if (!m.is_array() || m.empty()) r.fail("field 'modes' must be a nonempty array");
    c.modes.clear();
    for (const auto& v : m) {
      if (!v.is_string()) r.fail("field 'modes' must hold strings");
      c.modes.push_back(parse_mode(v.get<std::string>()));
    }
  }
  c.limits.delta1 = r.limit("delta1_MW_per_step");
  c.limits.delta2 = r.limit("delta2_MW");
  try {
    c.limits.validate();
  } catch (const Error& e) {
    r.fail(e.what());
  }
  if (r.has("solver")) {
    detail::Reader s = r.object("solver");
    c.solver.rel_gap = s.number_or("rel_gap", c.solver.rel_gap);
    if (s.has("node_limit")) c.solver.node_limit = s.integer("node_limit");
    if (s.has("time_limit_s")) c.solver.time_limit_s = s.number("time_limit_s");
    s.finish();
    if (!(c.solver.rel_gap >= 0.0) || c.solver.node_limit < 1) s.fail("rel_gap must be >= 0 and node_limit >= 1");
  }
  c.output_dir = r.text_or("output_dir", c.output_dir);
  if (r.has("seed")) c.seed = static_cast<std::uint64_t>(r.integer("seed"));
  r.finish();
  return c;
}

inline json config_json(const CaseConfig& c) {
  json modes = json::array();
  for (Mode m : c.modes) modes.push_back(to_string(m));
  json solver = {{"rel_gap", c.solver.rel_gap}, {"node_limit", c.solver.node_limit}};
  if (c.solver.time_limit_s) solver["time_limit_s"] = *c.solver.time_limit_s;
  return {{"hours", c.hours},
          {"steps_per_hour", c.steps_per_hour},
          {"currency", c.currency},
          {"files",
           {{"model", c.files.model},
            {"device_profiles", c.files.device_profiles},
            {"prosumers", c.files.prosumers},
            {"prices", c.files.prices},
            {"scenarios", c.files.scenarios}}},
          {"modes", modes},
          {"delta1_MW_per_step", detail::limit_json(c.limits.delta1)},
          {"delta2_MW", detail::limit_json(c.limits.delta2)},
          {"solver", solver},
          {"output_dir", c.output_dir},
          {"seed", c.seed}};
}

inline MicrogridModel parse_model(const json& j, const std::string& where, const TimeGrid& g,
                                  const Table& profiles) {
  detail::Reader r(j, where);
  MicrogridModel m(g);
  m.exchange_capacity_MW = r.number("exchange_capacity_MW");
  m.fixed_load = profile_column(profiles, g, r.text_or("fixed_load_column", "fixed_load_MW"));
  for (const auto& u : r.list("units")) {
    DispatchableUnit d;
    d.id = u.text("id");
    d.p_min_MW = u.number("p_min_MW");
    d.p_max_MW = u.number("p_max_MW");
    d.marginal_cost = u.number("marginal_cost_per_MWh");
    d.no_load_cost = u.number_or("no_load_cost_per_h", 0.0);
    d.startup_cost = u.number_or("startup_cost", 0.0);
    d.ramp_up_MW = u.number("ramp_up_MW_per_step");
    d.ramp_down_MW = u.number("ramp_down_MW_per_step");
    d.min_up_h = static_cast<int>(u.integer("min_up_h"));
    d.min_down_h = static_cast<int>(u.integer("min_down_h"));
    u.finish();
    m.units.push_back(std::move(d));
  }
  for (const auto& u : r.list("renewables")) {
    std::string id = u.text("id");
    std::string col = u.text_or("trace_column", id + "_MW");
    u.finish();
    m.renewables.push_back({id, profile_column(profiles, g, col)});
  }
  for (const auto& s : r.list("storages")) {
    Storage st;
    st.id = s.text("id");
    st.capacity_MWh = s.number("capacity_MWh");
    st.e_min_MWh = s.number_or("e_min_MWh", 0.0);
    st.charge_max_MW = s.number("charge_max_MW");
    st.discharge_max_MW = s.number("discharge_max_MW");
    st.eta_charge = s.number_or("eta_charge", 1.0);
    st.eta_discharge = s.number_or("eta_discharge", 1.0);
    st.initial_energy_MWh = s.number("initial_energy_MWh");
    if (s.has("terminal_min_MWh")) st.terminal_min_MWh = s.number("terminal_min_MWh");
    s.finish();
    m.storages.push_back(std::move(st));
  }
  for (const auto& a : r.list("adjustable_loads")) {
    AdjustableLoad al;
    al.id = a.text("id");
    al.window = detail::read_window(a.object("window"), g);
    al.total_energy_MWh = a.number("total_energy_MWh");
    al.p_min_MW = a.number_or("p_min_MW", 0.0);
    al.p_max_MW = a.number("p_max_MW");
    if (a.has("fixed_profile_column")) al.fixed_profile = profile_column(profiles, g, a.text("fixed_profile_column"));
    a.finish();
    m.adjustable_loads.push_back(std::move(al));
  }
  r.finish();
  return m;
}

inline json model_json(const MicrogridModel& m) {
  const TimeGrid& g = m.grid;
  json units = json::array(), ren = json::array(), st = json::array(), adj = json::array();
  for (const auto& u : m.units) {
    units.push_back({{"id", u.id},
                     {"p_min_MW", u.p_min_MW},
                     {"p_max_MW", u.p_max_MW},
                     {"marginal_cost_per_MWh", u.marginal_cost},
                     {"no_load_cost_per_h", u.no_load_cost},
                     {"startup_cost", u.startup_cost},
                     {"ramp_up_MW_per_step", u.ramp_up_MW},
                     {"ramp_down_MW_per_step", u.ramp_down_MW},
                     {"min_up_h", u.min_up_h},
                     {"min_down_h", u.min_down_h}});
  }
  for (const auto& r : m.renewables) ren.push_back({{"id", r.id}, {"trace_column", r.id + "_MW"}});
  for (const auto& s : m.storages) {
    json o = {{"id", s.id},
              {"capacity_MWh", s.capacity_MWh},
              {"e_min_MWh", s.e_min_MWh},
              {"charge_max_MW", s.charge_max_MW},
              {"discharge_max_MW", s.discharge_max_MW},
              {"eta_charge", s.eta_charge},
              {"eta_discharge", s.eta_discharge},
              {"initial_energy_MWh", s.initial_energy_MWh}};
    if (s.terminal_min_MWh) o["terminal_min_MWh"] = *s.terminal_min_MWh;
    st.push_back(o);
  }
  for (const auto& a : m.adjustable_loads) {
    json o = {{"id", a.id},
              {"window", detail::window_json(a.window, g)},
              {"total_energy_MWh", a.total_energy_MWh},
              {"p_min_MW", a.p_min_MW},
              {"p_max_MW", a.p_max_MW}};
    if (a.fixed_profile) o["fixed_profile_column"] = a.id + "_fixed_MW";
    adj.push_back(o);
  }
  return {{"exchange_capacity_MW", m.exchange_capacity_MW},
          {"fixed_load_column", "fixed_load_MW"},
          {"units", units},
          {"renewables", ren},
          {"storages", st},
          {"adjustable_loads", adj}};
}

inline ScenarioSet parse_scenarios(const json& j, const std::string& where, const TimeGrid& g) {
  detail::Reader r(j, where);
  std::vector<Scenario> list;
  for (const auto& s : r.list("scenarios")) {
    Scenario sc;
    sc.id = s.text("id");
    sc.probability = s.number("probability");
    for (const auto& w : s.list("islanding_windows")) sc.islanding_windows.push_back(detail::read_window(w, g));
    s.finish();
    list.push_back(std::move(sc));
  }
  r.finish();
  try {
    return ScenarioSet(g, std::move(list));
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

inline json scenarios_json(const ScenarioSet& set) {
  json list = json::array();
  for (const auto& s : set.scenarios()) {
    json w = json::array();
    for (const auto& win : s.islanding_windows) w.push_back(detail::window_json(win, set.grid()));
    list.push_back({{"id", s.id}, {"probability", s.probability}, {"islanding_windows", w}});
  }
  return {{"scenarios", list}};
}

inline std::vector<ProsumerParts> parse_prosumers(const Table& t, const TimeGrid& g) {
  static const std::string kCons = "_consumption_MW";
  static const std::string kGen = "_generation_MW";
  std::vector<ProsumerParts> parts;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h.size() > kCons.size() && h.compare(h.size() - kCons.size(), kCons.size(), kCons) == 0) {
      std::string id = h.substr(0, h.size() - kCons.size());
      parts.push_back({id, profile_column(t, g, h), profile_column(t, g, id + kGen)});
    } else if (!(h.size() > kGen.size() && h.compare(h.size() - kGen.size(), kGen.size(), kGen) == 0)) {
      throw Error(ErrorCode::schema, t.source + ": unexpected column '" + h + "'");
    }
  }
  if (2 * parts.size() + 1 != t.header.size()) {
    throw Error(ErrorCode::schema, t.source + ": every generation column needs a consumption column");
  }
  return parts;
}

// Loads and validates a case. Relative file names resolve against the
// directory holding the config.
inline LoadedCase load_case(const std::filesystem::path& config_path) {
  namespace fs = std::filesystem;
  const std::string where = config_path.string();
  CaseConfig cfg = parse_config(detail::parse_json(config_path), where);
  TimeGrid g = [&] {
    try {
      return TimeGrid(cfg.hours, cfg.steps_per_hour);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }();
  const fs::path base = config_path.parent_path();
  auto path_of = [&](const std::string& f) { return base / f; };

  Table devices = read_table(path_of(cfg.files.device_profiles));
  check_profile_table(devices, g);
  Table pros = read_table(path_of(cfg.files.prosumers));
  check_profile_table(pros, g);
  Table prices = read_table(path_of(cfg.files.prices));
  check_profile_table(prices, g);

  fs::path model_path = path_of(cfg.files.model);
  MicrogridModel model = parse_model(detail::parse_json(model_path), model_path.string(), g, devices);
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(e.code(), model_path.string() + ": " + e.what());
  }
  fs::path scen_path = path_of(cfg.files.scenarios);
  ScenarioSet scenarios = parse_scenarios(detail::parse_json(scen_path), scen_path.string(), g);
  std::vector<ProsumerParts> parts = parse_prosumers(pros, g);
  ProsumerSet set = make_prosumer_set(g, parts);
  Profile price = profile_column(prices, g, "price_per_MWh");
  FeederCase data{std::move(model), std::move(parts), std::move(set), std::move(price), std::move(scenarios),
                  cfg.currency};
  return {std::move(cfg), std::move(data)};
}

// Writes a complete case directory that load_case reads back unchanged.
inline void write_case(const std::filesystem::path& dir, const FeederCase& fc, CaseConfig cfg) {
  const TimeGrid& g = fc.grid();
  cfg.hours = g.hours();
  cfg.steps_per_hour = g.steps_per_hour();
  cfg.currency = fc.currency;

  TableWriter devices(g);
  devices.add("fixed_load_MW", fc.model.fixed_load.values());
  for (const auto& r : fc.model.renewables) devices.add(r.id + "_MW", r.trace.values());
  for (const auto& a : fc.model.adjustable_loads) {
    if (a.fixed_profile) devices.add(a.id + "_fixed_MW", a.fixed_profile->values());
  }
  TableWriter pros(g);
  for (const auto& p : fc.prosumer_parts) {
    pros.add(p.id + "_consumption_MW", p.consumption.values());
    pros.add(p.id + "_generation_MW", p.generation.values());
  }
  TableWriter prices(g);
  prices.add("price_per_MWh", fc.prices.values());

  write_text(dir / cfg.files.device_profiles, devices.str());
  write_text(dir / cfg.files.prosumers, pros.str());
  write_text(dir / cfg.files.prices, prices.str());
  write_text(dir / cfg.files.model, model_json(fc.model).dump(2) + "\n");
  write_text(dir / cfg.files.scenarios, scenarios_json(fc.scenarios).dump(2) + "\n");
  write_text(dir / "case.json", config_json(cfg).dump(2) + "\n");
}

}  // namespace mgflex::io

#endif  // MGFLEX_IO_CASE_IO_HPP
