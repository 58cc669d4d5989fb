#pragma once

#include <cstdint>
#include <vector>

#include "fedhar/data/windowed.hpp"

namespace fedhar::attack {

struct AttackReport;

// Per-window membership bits of the mix pool. Deliberately opaque: the only
// reader is score_mix_predictions, so feature extraction and attack training
// cannot touch the ground truth.
class MixGroundTruth {
public:
    MixGroundTruth() = default;
    explicit MixGroundTruth(std::vector<std::uint8_t> is_member)
        : is_member_(std::move(is_member)) {}

    std::size_t size() const { return is_member_.size(); }
    std::size_t member_count() const;

    friend AttackReport score_mix_predictions(const MixGroundTruth& truth,
                                              const std::vector<int>& predicted);

private:
    std::vector<std::uint8_t> is_member_;
};

// The attacker's world: target client j, the labeled pools, and the mixed
// pool whose provenance is hidden behind MixGroundTruth.
struct AttackScenario {
    int target = 0;
    std::size_t k = 2;  // distinct source clients represented in mix
    std::vector<int> source_clients;  // the k-1 nonmember client ids

    data::WindowedDataset member_pool;     // provenance == target
    data::WindowedDataset nonmember_pool;  // provenance != target
    data::WindowedDataset mix;             // balanced, disjoint from the pools
    MixGroundTruth mix_truth;              // evaluation-only

    void validate() const;
};

// Confusion counts plus the two headline metrics on the mix pool.
struct AttackReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double recall = 0.0;
};

// The one place the ground truth is consulted.
AttackReport score_mix_predictions(const MixGroundTruth& truth,
                                   const std::vector<int>& predicted);

}  // namespace fedhar::attack
