#pragma once

#include <cstddef>
#include <vector>

namespace d2d {

/// Channel choice per UE. Passive players (cellular UEs) keep their dedicated
/// channel for the whole run; active players (D2D pairs) are the learners.
struct AssignmentProfile {
  std::vector<int> channel;
  std::vector<bool> passive;

  AssignmentProfile() = default;
  AssignmentProfile(std::vector<int> channels, std::vector<bool> passive_flags);

  std::size_t size() const { return channel.size(); }
  bool operator==(const AssignmentProfile&) const = default;
};

/// Throws std::invalid_argument if a channel is out of range, the flag vector
/// has the wrong length, or two passive players share a channel.
void validate_profile(const AssignmentProfile& profile, int num_channels);

/// D(c): indices of the UEs assigned to `channel`, increasing.
std::vector<std::size_t> cochannel_set(const AssignmentProfile& profile, int channel);

}  // namespace d2d
