#ifndef MGFLEX_IO_FIXTURE_HPP
#define MGFLEX_IO_FIXTURE_HPP

// Synthetic default feeder: a microgrid with four dispatchable units, solar
// and wind traces, one battery and five adjustable loads, next to a group of
// rooftop-PV prosumers. All parameter values are repository data, generated
// from a seed; none are measured.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mgflex/io/feeder_case.hpp"

namespace mgflex {

namespace detail {

// Uniform doubles from the raw 64-bit engine output, so the sequence does
// not depend on the standard library's distribution implementations.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::array<double, 24> kFixedLoadMW = {
    4.2, 4.0, 3.9, 3.8, 3.9, 4.3, 5.0, 5.8, 6.3, 6.6, 6.8, 7.0,
    7.0, 6.9, 6.8, 6.9, 7.3, 7.9, 8.4, 8.2, 7.6, 6.7, 5.6, 4.8};

inline constexpr std::array<double, 24> kPricePerMWh = {
    22, 20, 19, 18, 19, 23, 30, 38, 42, 44, 45, 47,
    48, 47, 46, 48, 55, 66, 72, 68, 58, 45, 34, 27};

// Smooth hourly shape sampled at step midpoints by linear interpolation.
inline double interpolate(const std::array<double, 24>& hourly, double hour) {
  double pos = hour - 0.5;
  if (pos <= 0.0) return hourly.front();
  if (pos >= 23.0) return hourly.back();
  int lo = static_cast<int>(pos);
  double w = pos - lo;
  return hourly[lo] * (1.0 - w) + hourly[lo + 1] * w;
}

inline double solar_shape(double hour) {
  if (hour <= 6.0 || hour >= 19.0) return 0.0;
  return std::sin(std::numbers::pi * (hour - 6.0) / 13.0);
}

inline StepRange hours_window(const TimeGrid& g, int first_hour, int last_hour) {
  return {g.index(first_hour, 1), g.index(last_hour, g.steps_per_hour()) + 1};
}

}  // namespace detail

inline constexpr int kFixtureHours = 24;
inline constexpr std::uint64_t kFixtureSeed = 2016;

inline FeederCase default_fixture(int steps_per_hour = 6, std::uint64_t seed = kFixtureSeed) {
  using detail::FixtureRng;
  TimeGrid g(kFixtureHours, steps_per_hour);
  const std::size_t N = g.size();
  const double step_min = g.step_minutes();
  FixtureRng rng(seed);
  auto mid_hour = [&](std::size_t i) { return (static_cast<double>(i) + 0.5) * g.step_hours(); };

  MicrogridModel m(g);
  // Ramp capability is specified per minute and scaled to the step length.
  auto unit = [&](std::string id, double pmin, double pmax, double mc, double nl, double su,
                  double ramp_per_min, int up, int down) {
    double r = ramp_per_min * step_min;
    return DispatchableUnit{std::move(id), pmin, pmax, mc, nl, su, r, r, up, down};
  };
  m.units = {
      unit("chp", 1.0, 4.0, 28.0, 18.0, 40.0, 0.08, 4, 3),
      unit("gas_engine", 0.8, 3.5, 36.0, 12.0, 30.0, 0.10, 2, 2),
      unit("microturbine", 0.3, 2.0, 46.0, 6.0, 12.0, 0.15, 1, 1),
      unit("diesel", 0.2, 2.0, 62.0, 4.0, 8.0, 0.20, 1, 1),
  };

  std::vector<double> solar(N), wind(N), load(N), price(N);
  double w = 1.1;
  for (std::size_t i = 0; i < N; ++i) {
    double hr = mid_hour(i);
    solar[i] = 3.0 * detail::solar_shape(hr) * rng.uniform(0.75, 1.0);
    w = std::clamp(w + rng.uniform(-0.12, 0.12) * std::sqrt(step_min / 10.0), 0.3, 2.0);
    wind[i] = w;
    load[i] = detail::interpolate(detail::kFixedLoadMW, hr) + rng.uniform(-0.12, 0.12);
    price[i] = detail::kPricePerMWh[g.hour_of(i) - 1];
  }
  m.renewables = {{"solar", Profile(g, solar)}, {"wind", Profile(g, wind)}};
  m.fixed_load = Profile(g, load);

  Storage battery;
  battery.id = "battery";
  battery.capacity_MWh = 5.0;
  battery.e_min_MWh = 0.5;
  battery.charge_max_MW = 1.5;
  battery.discharge_max_MW = 1.5;
  battery.eta_charge = 0.95;
  battery.eta_discharge = 0.95;
  battery.initial_energy_MWh = 2.5;
  m.storages = {battery};

  m.adjustable_loads = {
      {"water_pumping", detail::hours_window(g, 1, 7), 2.4, 0.0, 0.8, std::nullopt},
      {"laundry", detail::hours_window(g, 9, 15), 1.2, 0.0, 0.5, std::nullopt},
      {"hvac_precool", detail::hours_window(g, 11, 16), 2.0, 0.1, 0.8, std::nullopt},
      {"ev_fleet", detail::hours_window(g, 19, 24), 3.0, 0.0, 1.2, std::nullopt},
      {"cold_storage", detail::hours_window(g, 1, 24), 4.8, 0.1, 0.4, std::nullopt},
  };
  m.exchange_capacity_MW = 8.0;

  std::vector<ProsumerParts> parts;
  for (int j = 0; j < 6; ++j) {
    double base = rng.uniform(0.3, 0.9);
    double pv_peak = rng.uniform(0.5, 1.5);
    std::vector<double> cons(N), gen(N);
    for (std::size_t i = 0; i < N; ++i) {
      double hr = mid_hour(i);
      double daily = detail::interpolate(detail::kFixedLoadMW, hr) / 7.0;
      cons[i] = base * daily * rng.uniform(0.85, 1.15);
      gen[i] = pv_peak * detail::solar_shape(hr) * rng.uniform(0.45, 1.0);
    }
    parts.push_back({"prosumer_" + std::to_string(j + 1), Profile(g, cons), Profile(g, gen)});
  }

  ScenarioSet scenarios(g, {{"grid_connected", {}, 0.9},
                            {"island_evening", {detail::hours_window(g, 18, 19)}, 0.1}});
  ProsumerSet prosumers = make_prosumer_set(g, parts);
  return FeederCase{std::move(m), std::move(parts), std::move(prosumers), Profile(g, price),
                    std::move(scenarios), "$"};
}

}  // namespace mgflex

#endif  // MGFLEX_IO_FIXTURE_HPP
