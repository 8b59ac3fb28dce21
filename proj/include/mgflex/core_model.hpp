#ifndef MGFLEX_CORE_MODEL_HPP
#define MGFLEX_CORE_MODEL_HPP

// Feeder net-load algebra: time grid, power profiles, prosumer aggregation,
// ramp-limit checks and the exchange envelope that turns feeder ramp limits
// into limits on the microgrid's own grid exchange.
//
// Indexing: hours t = 1..T and intra-hour steps k = 1..K are 1-based in the
// public API; profiles are stored flat with index (t-1)*K + (k-1).

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mgflex/error.hpp"

namespace mgflex {

inline constexpr double kRampTolerance = 1e-9;  // MW
inline constexpr double kInf = std::numeric_limits<double>::infinity();

class TimeGrid {
 public:
  TimeGrid(int hours, int steps_per_hour)
      : hours_(hours), steps_per_hour_(steps_per_hour) {
    if (hours < 1) {
      throw Error(ErrorCode::schema,
                  "time grid needs at least one hour, got " + std::to_string(hours));
    }
    if (steps_per_hour < 1 || steps_per_hour > 60 || 60 % steps_per_hour != 0) {
      throw Error(ErrorCode::schema,
                  "steps per hour must divide 60 and lie in [1, 60], got " +
                      std::to_string(steps_per_hour));
    }
  }

  int hours() const { return hours_; }
  int steps_per_hour() const { return steps_per_hour_; }
  int step_minutes() const { return 60 / steps_per_hour_; }
  double step_hours() const { return 1.0 / steps_per_hour_; }
  std::size_t size() const {
    return static_cast<std::size_t>(hours_) * static_cast<std::size_t>(steps_per_hour_);
  }

  std::size_t index(int t, int k) const {
    return static_cast<std::size_t>(t - 1) * steps_per_hour_ + static_cast<std::size_t>(k - 1);
  }
  int hour_of(std::size_t i) const { return static_cast<int>(i / steps_per_hour_) + 1; }
  int step_of(std::size_t i) const { return static_cast<int>(i % steps_per_hour_) + 1; }
  bool starts_hour(std::size_t i) const { return i % steps_per_hour_ == 0; }
  int minute_of(std::size_t i) const { return static_cast<int>(i) * step_minutes(); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  int hours_;
  int steps_per_hour_;
};

// Power series in MW, one value per (t, k).
class Profile {
 public:
  Profile(TimeGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw Error(ErrorCode::dimension,
                  "profile length " + std::to_string(values_.size()) +
                      " does not match time grid size " + std::to_string(grid_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::schema,
                    "profile value at index " + std::to_string(i) + " is not finite");
      }
    }
  }

  static Profile zeros(TimeGrid grid) { return Profile(grid, std::vector<double>(grid.size(), 0.0)); }
  static Profile constant(TimeGrid grid, double value) {
    return Profile(grid, std::vector<double>(grid.size(), value));
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(int t, int k) const { return values_[grid_.index(t, k)]; }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const std::string& what) {
  if (!(a == b)) {
    throw Error(ErrorCode::dimension,
                what + ": time grid mismatch (" + std::to_string(a.hours()) + "x" +
                    std::to_string(a.steps_per_hour()) + " vs " + std::to_string(b.hours()) +
                    "x" + std::to_string(b.steps_per_hour()) + ")");
  }
}

struct Prosumer {
  std::string id;
  Profile net_load;
};

// Distributed prosumers/consumers on the feeder, excluding the microgrid.
class ProsumerSet {
 public:
  explicit ProsumerSet(TimeGrid grid, std::vector<Prosumer> members = {})
      : grid_(grid), members_(std::move(members)) {
    std::set<std::string> seen;
    for (const auto& m : members_) {
      require_same_grid(grid_, m.net_load.grid(), "prosumer '" + m.id + "'");
      if (!seen.insert(m.id).second) {
        throw Error(ErrorCode::schema, "duplicate prosumer id '" + m.id + "'");
      }
    }
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Prosumer>& members() const { return members_; }

  Profile aggregate() const {
    std::vector<double> sum(grid_.size(), 0.0);
    for (const auto& m : members_) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += m.net_load[i];
    }
    return Profile(grid_, std::move(sum));
  }

 private:
  TimeGrid grid_;
  std::vector<Prosumer> members_;
};

// Operator ramp limits. An empty optional means the limit is not imposed.
struct FlexibilityLimits {
  std::optional<double> delta1;  // MW per intra-hour step
  std::optional<double> delta2;  // MW across an hour boundary

  static FlexibilityLimits unbounded() { return {}; }

  void validate() const {
    if (delta1 && !(*delta1 >= 0.0 && std::isfinite(*delta1))) {
      throw Error(ErrorCode::schema, "delta1 must be a finite value >= 0");
    }
    if (delta2 && !(*delta2 >= 0.0 && std::isfinite(*delta2))) {
      throw Error(ErrorCode::schema, "delta2 must be a finite value >= 0");
    }
  }
};

// Half-open range of flat step indices [begin, end).
struct StepRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

struct Scenario {
  std::string id;
  std::vector<StepRange> islanding_windows;
  double probability = 1.0;

  bool islanded(std::size_t i) const {
    for (const auto& w : islanding_windows) {
      if (w.contains(i)) return true;
    }
    return false;
  }
};

class ScenarioSet {
 public:
  ScenarioSet(TimeGrid grid, std::vector<Scenario> scenarios)
      : grid_(grid), scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) throw Error(ErrorCode::schema, "scenario set is empty");
    double total = 0.0;
    bool has_base = false;
    std::set<std::string> seen;
    for (const auto& s : scenarios_) {
      if (!seen.insert(s.id).second) {
        throw Error(ErrorCode::schema, "duplicate scenario id '" + s.id + "'");
      }
      if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
        throw Error(ErrorCode::schema, "scenario '" + s.id + "' probability outside [0, 1]");
      }
      total += s.probability;
      if (s.islanding_windows.empty()) has_base = true;
      for (const auto& w : s.islanding_windows) {
        if (w.begin >= w.end || w.end > grid_.size()) {
          throw Error(ErrorCode::schema,
                      "scenario '" + s.id + "' has an islanding window outside the time grid");
        }
      }
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::schema, "scenario probabilities sum to " + std::to_string(total));
    }
    if (!has_base) {
      throw Error(ErrorCode::schema, "scenario set lacks a grid-connected base scenario");
    }
  }

  static ScenarioSet grid_connected(TimeGrid grid) {
    return ScenarioSet(grid, {Scenario{"base", {}, 1.0}});
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  std::size_t size() const { return scenarios_.size(); }
  const Scenario& operator[](std::size_t s) const { return scenarios_[s]; }

  std::size_t base_index() const {
    for (std::size_t s = 0; s < scenarios_.size(); ++s) {
      if (scenarios_[s].islanding_windows.empty()) return s;
    }
    return 0;
  }

 private:
  TimeGrid grid_;
  std::vector<Scenario> scenarios_;
};

// Bounds on exchange(i) - exchange(i-1) for every flat step i >= 1 and every
// scenario. Infinite bounds mean the difference is not constrained there.
class ExchangeEnvelope {
 public:
  ExchangeEnvelope(TimeGrid grid, std::size_t scenario_count)
      : grid_(grid),
        lower_(scenario_count, std::vector<double>(grid.size(), -kInf)),
        upper_(scenario_count, std::vector<double>(grid.size(), kInf)) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t scenario_count() const { return lower_.size(); }

  // Step 0 (t = 1, k = 1) has no predecessor and is never bounded.
  double lower(std::size_t s, std::size_t i) const { return lower_[s][i]; }
  double upper(std::size_t s, std::size_t i) const { return upper_[s][i]; }
  bool bounded(std::size_t s, std::size_t i) const {
    return std::isfinite(lower_[s][i]) || std::isfinite(upper_[s][i]);
  }

  void set(std::size_t s, std::size_t i, double lo, double hi) {
    lower_[s][i] = lo;
    upper_[s][i] = hi;
  }

 private:
  TimeGrid grid_;
  std::vector<std::vector<double>> lower_;
  std::vector<std::vector<double>> upper_;
};

// Feeder net load seen by the utility: microgrid exchange plus every
// prosumer's net load.
inline Profile aggregate_feeder(const Profile& exchange, const ProsumerSet& prosumers) {
  require_same_grid(exchange.grid(), prosumers.grid(), "aggregate_feeder");
  std::vector<double> out = exchange.values();
  for (const auto& m : prosumers.members()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m.net_load[i];
  }
  return Profile(exchange.grid(), std::move(out));
}

struct IntraHourViolation {
  int hour;
  int step;
  double excess;  // MW above delta1
};

struct InterHourViolation {
  int hour;  // the hour whose first step follows the boundary
  double excess;
};

inline std::vector<IntraHourViolation> intra_hour_violations(const Profile& feeder,
                                                             const FlexibilityLimits& limits) {
  std::vector<IntraHourViolation> out;
  if (!limits.delta1) return out;
  const TimeGrid& g = feeder.grid();
  for (int t = 1; t <= g.hours(); ++t) {
    for (int k = 2; k <= g.steps_per_hour(); ++k) {
      double diff = std::abs(feeder.at(t, k) - feeder.at(t, k - 1));
      if (diff > *limits.delta1 + kRampTolerance) {
        out.push_back({t, k, diff - *limits.delta1});
      }
    }
  }
  return out;
}

inline std::vector<InterHourViolation> inter_hour_violations(const Profile& feeder,
                                                             const FlexibilityLimits& limits) {
  std::vector<InterHourViolation> out;
  if (!limits.delta2) return out;
  const TimeGrid& g = feeder.grid();
  const int last = g.steps_per_hour();
  for (int t = 2; t <= g.hours(); ++t) {
    double diff = std::abs(feeder.at(t, 1) - feeder.at(t - 1, last));
    if (diff > *limits.delta2 + kRampTolerance) {
      out.push_back({t, diff - *limits.delta2});
    }
  }
  return out;
}

// Substitutes the feeder aggregation into the feeder ramp limits, yielding
// time-varying limits on the exchange step differences:
//   -D - d(i) <= P(i) - P(i-1) <= D - d(i),  d(i) = sum_j Pc_j(i) - sum_j Pc_j(i-1)
// with D = delta1 inside an hour and delta2 across hour boundaries.
inline ExchangeEnvelope exchange_envelope(const ProsumerSet& prosumers,
                                          const FlexibilityLimits& limits,
                                          const ScenarioSet& scenarios) {
  limits.validate();
  const TimeGrid& g = prosumers.grid();
  require_same_grid(g, scenarios.grid(), "exchange_envelope");
  ExchangeEnvelope env(g, scenarios.size());
  const Profile total = prosumers.aggregate();
  for (std::size_t i = 1; i < g.size(); ++i) {
    const std::optional<double>& width = g.starts_hour(i) ? limits.delta2 : limits.delta1;
    if (!width) continue;
    const double d = total[i] - total[i - 1];
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      env.set(s, i, -*width - d, *width - d);
    }
  }
  return env;
}

struct EnvelopeViolation {
  std::size_t step;  // flat index of the later step
  double excess;
};

// Steps where exchange(i) - exchange(i-1) leaves the envelope of scenario s.
inline std::vector<EnvelopeViolation> envelope_violations(const ExchangeEnvelope& env,
                                                          const Profile& exchange,
                                                          std::size_t scenario = 0,
                                                          double tol = kRampTolerance) {
  require_same_grid(env.grid(), exchange.grid(), "envelope_violations");
  std::vector<EnvelopeViolation> out;
  for (std::size_t i = 1; i < exchange.size(); ++i) {
    const double diff = exchange[i] - exchange[i - 1];
    const double below = env.lower(scenario, i) - diff;
    const double above = diff - env.upper(scenario, i);
    if (below > tol) out.push_back({i, below});
    else if (above > tol) out.push_back({i, above});
  }
  return out;
}

}  // namespace mgflex

#endif  // MGFLEX_CORE_MODEL_HPP
