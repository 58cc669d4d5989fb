#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fedhar/data/windowed.hpp"

namespace fedhar::data {

// How one client deforms the shared per-class signal templates. Distinct
// signatures reproduce per-subject distribution shift; identical signatures
// give the iid control.
struct ClientSignature {
    double amplitude_scale = 1.0;
    double frequency_offset = 0.0;  // cycles per window
    double baseline_shift = 0.0;
    double noise_sigma = 0.25;

    bool operator==(const ClientSignature&) const = default;
};

struct SynthSpec {
    std::size_t n_clients = 5;
    std::size_t classes = 6;
    std::size_t channels = 3;
    std::size_t window_len = 64;
    std::size_t windows_per_class = 100;
    std::vector<ClientSignature> signatures;  // one per client
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Deterministic, evenly spread signatures — all distinct.
std::vector<ClientSignature> heterogeneous_signatures(std::size_t n_clients);
// One shared signature for every client.
std::vector<ClientSignature> iid_signatures(std::size_t n_clients);

// Each class is an oscillatory multi-channel template (class-specific
// frequency and amplitude, channel-specific phase) deformed by the client
// signature plus Gaussian noise. Deterministic in rng_seed.
std::map<int, WindowedDataset> generate_synthetic(const SynthSpec& spec);

}  // namespace fedhar::data
