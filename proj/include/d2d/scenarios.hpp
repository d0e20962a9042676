#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "d2d/radio.hpp"

namespace d2d {

/// Named network instances small enough for exhaustive analysis.
struct Scenario {
  std::string name;
  RadioParams params;
  Topology topology;
};

/// One cellular UE and four D2D pairs in two clusters on 3 channels, no
/// shadowing. The four pairs are split two per side of the BS, so the best
/// assignments keep each cluster on distinct channels.
Scenario desk_scenario();

/// Two mirror-image D2D pairs on 2 channels: the two separating profiles are
/// exactly co-optimal.
Scenario symmetric_pair_scenario();

/// generate_topology with the given counts and defaults elsewhere.
Scenario random_scenario(std::size_t num_uec, std::size_t num_ued, int num_channels, std::uint64_t seed);

std::vector<std::string> scenario_names();
/// "desk" or "symmetric-pair".
Scenario named_scenario(const std::string& name);

}  // namespace d2d
