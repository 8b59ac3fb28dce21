#ifndef MGFLEX_SCHEDULING_MODEL_HPP
#define MGFLEX_SCHEDULING_MODEL_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mgflex/core_model.hpp"

namespace mgflex {

struct DispatchableUnit {
  std::string id;
  double p_min_MW = 0.0;
  double p_max_MW = 0.0;
  double marginal_cost = 0.0;  // currency/MWh
  double no_load_cost = 0.0;   // currency/h while committed
  double startup_cost = 0.0;   // currency per 0 -> 1 transition
  double ramp_up_MW = 0.0;     // per intra-hour step
  double ramp_down_MW = 0.0;
  int min_up_h = 1;
  int min_down_h = 1;
};

struct NondispatchableUnit {
  std::string id;
  Profile trace;  // forecast output, MW
};

struct Storage {
  std::string id;
  double capacity_MWh = 0.0;
  double e_min_MWh = 0.0;
  double charge_max_MW = 0.0;
  double discharge_max_MW = 0.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double initial_energy_MWh = 0.0;
  std::optional<double> terminal_min_MWh;  // defaults to the initial energy

  double terminal_min() const { return terminal_min_MWh.value_or(initial_energy_MWh); }
};

// Demand that must receive total_energy_MWh inside its window, drawing
// between p_min and p_max in every step of the window and nothing outside.
struct AdjustableLoad {
  std::string id;
  StepRange window;
  double total_energy_MWh = 0.0;
  double p_min_MW = 0.0;
  double p_max_MW = 0.0;
  std::optional<Profile> fixed_profile;
};

struct MicrogridModel {
  TimeGrid grid;
  std::vector<DispatchableUnit> units;
  std::vector<NondispatchableUnit> renewables;
  std::vector<Storage> storages;
  std::vector<AdjustableLoad> adjustable_loads;
  Profile fixed_load;
  double exchange_capacity_MW = 0.0;

  explicit MicrogridModel(TimeGrid g) : grid(g), fixed_load(Profile::zeros(g)) {}

  // Rejects parameter sets that no schedule can satisfy, before any solve.
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::model, msg); };
    auto schema = [](const std::string& msg) { throw Error(ErrorCode::schema, msg); };
    std::set<std::string> ids;
    auto unique = [&](const std::string& id) {
      if (!ids.insert(id).second) schema("duplicate device id '" + id + "'");
    };
    require_same_grid(grid, fixed_load.grid(), "fixed load");
    if (!(exchange_capacity_MW > 0.0)) schema("exchange capacity must be positive");
    for (const auto& u : units) {
      unique(u.id);
      if (!(u.p_min_MW >= 0.0 && u.p_min_MW <= u.p_max_MW)) {
        schema("unit '" + u.id + "' needs 0 <= p_min <= p_max");
      }
      if (u.marginal_cost < 0.0 || u.no_load_cost < 0.0 || u.startup_cost < 0.0) {
        schema("unit '" + u.id + "' has a negative cost");
      }
      if (!(u.ramp_up_MW > 0.0 && u.ramp_down_MW > 0.0)) {
        schema("unit '" + u.id + "' ramps must be positive");
      }
      if (u.min_up_h < 1 || u.min_down_h < 1) schema("unit '" + u.id + "' min up/down must be >= 1 h");
    }
    for (const auto& r : renewables) {
      unique(r.id);
      require_same_grid(grid, r.trace.grid(), "renewable '" + r.id + "'");
      for (double v : r.trace.values()) {
        if (v < 0.0) schema("renewable '" + r.id + "' trace is negative");
      }
    }
    for (const auto& s : storages) {
      unique(s.id);
      if (!(s.e_min_MWh >= 0.0 && s.e_min_MWh <= s.capacity_MWh)) {
        schema("storage '" + s.id + "' needs 0 <= e_min <= capacity");
      }
      if (s.initial_energy_MWh < s.e_min_MWh || s.initial_energy_MWh > s.capacity_MWh) {
        fail("storage '" + s.id + "' initial energy outside [e_min, capacity]");
      }
      if (s.terminal_min() > s.capacity_MWh) {
        fail("storage '" + s.id + "' terminal minimum exceeds capacity");
      }
      if (!(s.charge_max_MW > 0.0 && s.discharge_max_MW > 0.0)) {
        schema("storage '" + s.id + "' rates must be positive");
      }
      if (!(s.eta_charge > 0.0 && s.eta_charge <= 1.0 && s.eta_discharge > 0.0 &&
            s.eta_discharge <= 1.0)) {
        schema("storage '" + s.id + "' efficiencies must lie in (0, 1]");
      }
      double reachable = s.initial_energy_MWh +
                         s.eta_charge * s.charge_max_MW * grid.step_hours() * grid.size();
      if (reachable + 1e-9 < s.terminal_min()) {
        fail("storage '" + s.id + "' cannot reach its terminal minimum within the horizon");
      }
    }
    for (const auto& a : adjustable_loads) {
      unique(a.id);
      if (a.window.begin >= a.window.end || a.window.end > grid.size()) {
        schema("adjustable load '" + a.id + "' window lies outside the time grid");
      }
      if (!(a.p_min_MW >= 0.0 && a.p_min_MW <= a.p_max_MW)) {
        schema("adjustable load '" + a.id + "' needs 0 <= p_min <= p_max");
      }
      if (a.total_energy_MWh < 0.0) schema("adjustable load '" + a.id + "' energy is negative");
      if (a.fixed_profile) require_same_grid(grid, a.fixed_profile->grid(), "adjustable load '" + a.id + "'");
      double hours = static_cast<double>(a.window.end - a.window.begin) * grid.step_hours();
      if (a.total_energy_MWh > a.p_max_MW * hours + 1e-9) {
        fail("adjustable load '" + a.id + "' needs " + std::to_string(a.total_energy_MWh) +
             " MWh but its window delivers at most " + std::to_string(a.p_max_MW * hours) + " MWh");
      }
      if (a.total_energy_MWh < a.p_min_MW * hours - 1e-9) {
        fail("adjustable load '" + a.id + "' minimum draw exceeds its energy requirement");
      }
    }
  }
};

enum class Mode { price_based, flexibility_oriented };

inline const char* to_string(Mode m) {
  return m == Mode::price_based ? "price_based" : "flexibility_oriented";
}

}  // namespace mgflex

#endif  // MGFLEX_SCHEDULING_MODEL_HPP
