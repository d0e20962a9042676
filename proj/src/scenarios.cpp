#include "d2d/scenarios.hpp"

#include <stdexcept>

namespace d2d {

Scenario desk_scenario() {
  RadioParams p;
  p.num_channels = 3;
  const std::vector<Link> ued = {
      {{30.0, 5.0}, {40.0, 5.0}},
      {{40.0, -5.0}, {30.0, -5.0}},
      {{-30.0, 5.0}, {-40.0, 5.0}},
      {{-40.0, -5.0}, {-30.0, -5.0}},
  };
  return {"desk", p, topology_from_positions(p, {0.0, 0.0}, {{0.0, 40.0}}, ued)};
}

Scenario symmetric_pair_scenario() {
  RadioParams p;
  p.num_channels = 2;
  const std::vector<Link> ued = {
      {{-15.0, 0.0}, {-5.0, 0.0}},
      {{15.0, 0.0}, {5.0, 0.0}},
  };
  return {"symmetric-pair", p, topology_from_positions(p, {0.0, 0.0}, {}, ued)};
}

Scenario random_scenario(std::size_t num_uec, std::size_t num_ued, int num_channels, std::uint64_t seed) {
  RadioParams p;
  p.num_channels = num_channels;
  return {"random", p, generate_topology(p, num_uec, num_ued, seed)};
}

std::vector<std::string> scenario_names() { return {"desk", "symmetric-pair"}; }

Scenario named_scenario(const std::string& name) {
  if (name == "desk") return desk_scenario();
  if (name == "symmetric-pair") return symmetric_pair_scenario();
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace d2d
