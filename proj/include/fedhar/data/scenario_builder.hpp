#pragma once

#include <cstdint>
#include <map>

#include "fedhar/attack/scenario.hpp"
#include "fedhar/data/windowed.hpp"

namespace fedhar::data {

struct ScenarioSizes {
    std::size_t n_member = 200;     // N^m, member-pool windows from the target
    std::size_t n_nonmember = 200;  // N^n, nonmember-pool windows
    std::size_t mix_members = 200;  // per side of the balanced mix
};

// Samples the attacker's pools from the given per-client window pools:
// member_pool from client `target`, nonmember_pool from k-1 other clients
// (chosen uniformly), and a balanced mix that is window-disjoint from both
// pools. Throws DataError naming required vs available counts when a pool is
// too small.
attack::AttackScenario build_scenario(const std::map<int, WindowedDataset>& clients,
                                      int target, std::size_t k, const ScenarioSizes& sizes,
                                      std::uint64_t seed);

}  // namespace fedhar::data
