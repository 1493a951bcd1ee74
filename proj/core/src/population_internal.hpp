#pragma once

// Generation building blocks shared by generate_population and the
// calibration search, which must see exactly the same per-agent noise.

#include <cstdint>
#include <vector>

#include "innodiff/population.hpp"

namespace innodiff::detail {

/// Profile index (into profiles.types) for each agent id.
std::vector<int> assign_types(int n, const ProfileSet& profiles, std::uint64_t seed);

/// One standard-normal draw per network slot in link order:
/// G*A facilitation, G priorities, G need valences, A action valences.
std::vector<double> draw_mind_noise(int agent_id, int needs, int actions, std::uint64_t seed);

CoherenceNetwork build_mind(const TypeProfile& profile, const std::vector<double>& noise,
                            int needs, int actions, const NetworkParams& params);

}  // namespace innodiff::detail
