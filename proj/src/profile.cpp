#include "d2d/profile.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "d2d/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace d2d {

AssignmentProfile::AssignmentProfile(std::vector<int> channels, std::vector<bool> passive_flags)
    : channel(std::move(channels)), passive(std::move(passive_flags)) {
  if (passive.size() != channel.size())
    throw std::invalid_argument("profile: passive flags must match channel count");
}

void validate_profile(const AssignmentProfile& profile, int num_channels) {
  if (profile.passive.size() != profile.channel.size())
    throw std::invalid_argument("profile: passive flags must match channel count");
  std::vector<bool> taken(static_cast<std::size_t>(std::max(num_channels, 0)), false);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const int c = profile.channel[i];
    if (c < 0 || c >= num_channels)
      throw std::invalid_argument("profile: UE " + std::to_string(i) + " on invalid channel " +
                                  std::to_string(c));
    if (profile.passive[i]) {
      if (taken[static_cast<std::size_t>(c)])
        throw std::invalid_argument("profile: two passive UEs share channel " + std::to_string(c));
      taken[static_cast<std::size_t>(c)] = true;
    }
  }
}

std::vector<std::size_t> cochannel_set(const AssignmentProfile& profile, int channel) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile.channel[i] == channel) members.push_back(i);
  return members;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace d2d
