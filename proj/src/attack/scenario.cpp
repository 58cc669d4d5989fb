#include "fedhar/attack/scenario.hpp"

#include "fedhar/errors.hpp"

namespace fedhar::attack {

std::size_t MixGroundTruth::member_count() const {
    std::size_t c = 0;
    for (auto b : is_member_) c += b;
    return c;
}

void AttackScenario::validate() const {
    member_pool.validate();
    nonmember_pool.validate();
    mix.validate();
    if (member_pool.empty() || nonmember_pool.empty()) {
        throw ConfigError("scenario: member and nonmember pools must be nonempty");
    }
    if (mix.size() != mix_truth.size()) {
        throw ShapeError("scenario: mix ground truth size mismatch");
    }
    for (int p : member_pool.provenance) {
        if (p != target) throw DataError("scenario: member pool window not from target");
    }
    for (int p : nonmember_pool.provenance) {
        if (p == target) throw DataError("scenario: nonmember pool window from target");
    }
    if (2 * mix_truth.member_count() != mix_truth.size()) {
        throw DataError("scenario: mix pool is not balanced");
    }
}

AttackReport score_mix_predictions(const MixGroundTruth& truth,
                                   const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) {
        throw ShapeError("score: prediction count does not match mix size");
    }
    AttackReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool member = truth.is_member_[i] != 0;
        const bool said_member = predicted[i] != 0;
        if (member && said_member) ++r.tp;
        else if (member && !said_member) ++r.fn;
        else if (!member && said_member) ++r.fp;
        else ++r.tn;
    }
    const std::size_t total = r.tp + r.fp + r.tn + r.fn;
    r.accuracy = total ? static_cast<double>(r.tp + r.tn) / static_cast<double>(total) : 0.0;
    r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                             : 0.0;
    return r;
}

}  // namespace fedhar::attack
