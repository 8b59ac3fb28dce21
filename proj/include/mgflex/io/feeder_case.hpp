#ifndef MGFLEX_IO_FEEDER_CASE_HPP
#define MGFLEX_IO_FEEDER_CASE_HPP

#include <string>
#include <vector>

#include "mgflex/core_model.hpp"
#include "mgflex/scheduling/model.hpp"

namespace mgflex {

// Prosumer consumption and local generation; net load is their difference.
struct ProsumerParts {
  std::string id;
  Profile consumption;
  Profile generation;

  Profile net() const {
    std::vector<double> v(consumption.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = consumption[i] - generation[i];
    return Profile(consumption.grid(), std::move(v));
  }
};

inline ProsumerSet make_prosumer_set(const TimeGrid& grid, const std::vector<ProsumerParts>& parts) {
  std::vector<Prosumer> members;
  for (const auto& p : parts) members.push_back({p.id, p.net()});
  return ProsumerSet(grid, std::move(members));
}

// Everything one scheduling study needs besides operator limits and
// solver settings.
struct FeederCase {
  MicrogridModel model;
  std::vector<ProsumerParts> prosumer_parts;
  ProsumerSet prosumers;
  Profile prices;
  ScenarioSet scenarios;
  std::string currency = "$";

  const TimeGrid& grid() const { return model.grid; }
};

}  // namespace mgflex

#endif  // MGFLEX_IO_FEEDER_CASE_HPP
