#include "fedhar/data/scenario_builder.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::data {

namespace {

void require_windows(const std::string& what, int client, std::size_t required,
                     std::size_t available) {
    if (available < required) {
        throw DataError("build_scenario: " + what + " needs " + std::to_string(required) +
                        " windows from client " + std::to_string(client) + ", only " +
                        std::to_string(available) + " available");
    }
}

}  // namespace

attack::AttackScenario build_scenario(const std::map<int, WindowedDataset>& clients,
                                      int target, std::size_t k, const ScenarioSizes& sizes,
                                      std::uint64_t seed) {
    if (k < 2) throw ConfigError("build_scenario: k must be >= 2");
    if (clients.size() < k) {
        throw ConfigError("build_scenario: k = " + std::to_string(k) + " but only " +
                          std::to_string(clients.size()) + " clients exist");
    }
    auto target_it = clients.find(target);
    if (target_it == clients.end()) {
        throw ConfigError("build_scenario: unknown target client " + std::to_string(target));
    }
    if (sizes.n_member == 0 || sizes.n_nonmember == 0 || sizes.mix_members == 0) {
        throw ConfigError("build_scenario: pool sizes must be positive");
    }

    attack::AttackScenario scenario;
    scenario.target = target;
    scenario.k = k;

    // Pick the k-1 nonmember source clients uniformly among the others.
    std::vector<int> others;
    for (const auto& [id, _] : clients) {
        if (id != target) others.push_back(id);
    }
    Rng pick_rng(derive_seed(seed, "source-clients"));
    pick_rng.shuffle(others);
    others.resize(k - 1);
    std::sort(others.begin(), others.end());
    scenario.source_clients = others;

    // Target side: member pool plus the member half of the mix, disjoint.
    {
        const WindowedDataset& ds = target_it->second;
        require_windows("member pool + mix", target, sizes.n_member + sizes.mix_members,
                        ds.size());
        std::vector<std::size_t> idx(ds.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed(seed, "member-sample", static_cast<std::uint64_t>(target)));
        rng.shuffle(idx);
        scenario.member_pool =
            ds.subset(std::span<const std::size_t>(idx.data(), sizes.n_member));
        scenario.mix = ds.subset(
            std::span<const std::size_t>(idx.data() + sizes.n_member, sizes.mix_members));
    }

    // Nonmember side: spread both quotas as evenly as possible over the k-1
    // source clients (earlier clients absorb the remainder).
    std::vector<const WindowedDataset*> nonmember_parts, mix_parts;
    std::vector<WindowedDataset> stash;
    stash.reserve(2 * others.size());
    const std::size_t n_src = others.size();
    for (std::size_t i = 0; i < n_src; ++i) {
        const std::size_t pool_quota =
            sizes.n_nonmember / n_src + (i < sizes.n_nonmember % n_src ? 1 : 0);
        const std::size_t mix_quota =
            sizes.mix_members / n_src + (i < sizes.mix_members % n_src ? 1 : 0);
        const WindowedDataset& ds = clients.at(others[i]);
        require_windows("nonmember pool + mix", others[i], pool_quota + mix_quota, ds.size());

        std::vector<std::size_t> idx(ds.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed(seed, "nonmember-sample", static_cast<std::uint64_t>(others[i])));
        rng.shuffle(idx);
        stash.push_back(ds.subset(std::span<const std::size_t>(idx.data(), pool_quota)));
        nonmember_parts.push_back(&stash.back());
        stash.push_back(
            ds.subset(std::span<const std::size_t>(idx.data() + pool_quota, mix_quota)));
        mix_parts.push_back(&stash.back());
    }
    scenario.nonmember_pool = WindowedDataset::concat(nonmember_parts);

    // Assemble the balanced mix: member half first, then the nonmember half,
    // then one deterministic shuffle applied to windows and truth bits alike.
    std::vector<const WindowedDataset*> mix_all{&scenario.mix};
    for (const auto* p : mix_parts) mix_all.push_back(p);
    WindowedDataset mix_ordered = WindowedDataset::concat(mix_all);
    std::vector<std::uint8_t> bits(mix_ordered.size(), 0);
    std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(sizes.mix_members), 1);

    std::vector<std::size_t> order(mix_ordered.size());
    std::iota(order.begin(), order.end(), 0);
    Rng mix_rng(derive_seed(seed, "mix-shuffle"));
    mix_rng.shuffle(order);

    WindowedDataset mix = mix_ordered.subset(order);
    std::vector<std::uint8_t> shuffled_bits(bits.size());
    for (std::size_t i = 0; i < order.size(); ++i) shuffled_bits[i] = bits[order[i]];

    // The attacker never knows where mix windows came from; scrub provenance
    // so the only membership record is the opaque ground truth.
    std::fill(mix.provenance.begin(), mix.provenance.end(), -1);

    scenario.mix = std::move(mix);
    scenario.mix_truth = attack::MixGroundTruth(std::move(shuffled_bits));
    scenario.validate();
    return scenario;
}

}  // namespace fedhar::data
