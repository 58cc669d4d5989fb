#include "fedhar/data/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::data {

void SynthSpec::validate() const {
    if (n_clients == 0) throw ConfigError("synthetic: n_clients must be >= 1");
    if (classes < 2) throw ConfigError("synthetic: classes must be >= 2");
    if (channels == 0) throw ConfigError("synthetic: channels must be >= 1");
    if (window_len < 8) throw ConfigError("synthetic: window_len must be >= 8");
    if (windows_per_class == 0) throw ConfigError("synthetic: windows_per_class must be >= 1");
    if (signatures.size() != n_clients) {
        throw ConfigError("synthetic: expected one signature per client");
    }
    for (const auto& s : signatures) {
        if (s.noise_sigma < 0.0) throw ConfigError("synthetic: negative noise sigma");
    }
}

std::vector<ClientSignature> heterogeneous_signatures(std::size_t n_clients) {
    std::vector<ClientSignature> sigs(n_clients);
    const double denom = n_clients > 1 ? static_cast<double>(n_clients - 1) : 1.0;
    for (std::size_t i = 0; i < n_clients; ++i) {
        const double u = static_cast<double>(i) / denom;  // 0..1 across clients
        sigs[i].amplitude_scale = 0.55 + 1.1 * u;
        sigs[i].frequency_offset = -0.45 + 0.9 * u;
        sigs[i].baseline_shift = -0.7 + 1.4 * u;
        sigs[i].noise_sigma = 0.20 + 0.12 * u;
    }
    return sigs;
}

std::vector<ClientSignature> iid_signatures(std::size_t n_clients) {
    return std::vector<ClientSignature>(n_clients, ClientSignature{1.0, 0.0, 0.0, 0.25});
}

std::map<int, WindowedDataset> generate_synthetic(const SynthSpec& spec) {
    spec.validate();

    const std::size_t C = spec.channels;
    const std::size_t T = spec.window_len;
    const double two_pi = 2.0 * std::numbers::pi;

    std::map<int, WindowedDataset> corpus;
    for (std::size_t client = 0; client < spec.n_clients; ++client) {
        const ClientSignature& sig = spec.signatures[client];
        Rng rng(derive_seed(spec.rng_seed, "synthetic-client", client));

        const std::size_t n_windows = spec.classes * spec.windows_per_class;
        WindowedDataset ds;
        ds.windows = Tensor::zeros({n_windows, C, T});
        ds.labels.resize(n_windows);
        ds.provenance.assign(n_windows, static_cast<int>(client));

        std::size_t w = 0;
        for (std::size_t cls = 0; cls < spec.classes; ++cls) {
            // Class template: base frequency spaced well apart relative to
            // the per-client offsets, mild amplitude variation.
            const double class_freq = 2.0 + 2.5 * static_cast<double>(cls);
            const double class_amp = 1.0 + 0.15 * static_cast<double>(cls % 3);

            for (std::size_t rep = 0; rep < spec.windows_per_class; ++rep, ++w) {
                const double phase = rng.uniform(0.0, two_pi);
                const double freq = class_freq + sig.frequency_offset;
                for (std::size_t c = 0; c < C; ++c) {
                    const double channel_phase =
                        two_pi * static_cast<double>(c) / static_cast<double>(C);
                    double* x = ds.windows.data.data() + (w * C + c) * T;
                    for (std::size_t t = 0; t < T; ++t) {
                        const double arg =
                            two_pi * freq * static_cast<double>(t) / static_cast<double>(T) +
                            phase + channel_phase;
                        x[t] = sig.baseline_shift +
                               sig.amplitude_scale * class_amp * std::sin(arg) +
                               rng.normal(0.0, sig.noise_sigma);
                    }
                }
                ds.labels[w] = static_cast<int>(cls);
            }
        }
        corpus.emplace(static_cast<int>(client), std::move(ds));
    }
    return corpus;
}

}  // namespace fedhar::data
