#include "fedhar/data/windowed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::data {

void WindowedDataset::validate() const {
    if (windows.ndim() != 3) {
        throw ShapeError("dataset windows must be [N,C,T], got " +
                         shape_to_string(windows.shape));
    }
    if (windows.dim(0) != labels.size() || labels.size() != provenance.size()) {
        throw ShapeError("dataset windows/labels/provenance counts disagree");
    }
}

Tensor WindowedDataset::gather(std::span<const std::size_t> indices) const {
    const std::size_t C = channels();
    const std::size_t T = window_len();
    Tensor out = Tensor::zeros({indices.size(), C, T});
    const std::size_t stride = C * T;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= size()) throw DataError("gather: window index out of range");
        std::memcpy(out.data.data() + i * stride, windows.data.data() + indices[i] * stride,
                    stride * sizeof(double));
    }
    return out;
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> indices) const {
    WindowedDataset out;
    out.windows = gather(indices);
    out.labels.reserve(indices.size());
    out.provenance.reserve(indices.size());
    for (std::size_t i : indices) {
        out.labels.push_back(labels[i]);
        out.provenance.push_back(provenance[i]);
    }
    return out;
}

WindowedDataset WindowedDataset::concat(const std::vector<const WindowedDataset*>& parts) {
    if (parts.empty()) throw DataError("concat: no parts");
    const std::size_t C = parts[0]->channels();
    const std::size_t T = parts[0]->window_len();
    std::size_t total = 0;
    for (const auto* p : parts) {
        if (p->channels() != C || p->window_len() != T) {
            throw ShapeError("concat: mismatched window shapes");
        }
        total += p->size();
    }
    WindowedDataset out;
    out.windows = Tensor::zeros({total, C, T});
    out.labels.reserve(total);
    out.provenance.reserve(total);
    std::size_t off = 0;
    for (const auto* p : parts) {
        std::memcpy(out.windows.data.data() + off * C * T, p->windows.data.data(),
                    p->windows.size() * sizeof(double));
        off += p->size();
        out.labels.insert(out.labels.end(), p->labels.begin(), p->labels.end());
        out.provenance.insert(out.provenance.end(), p->provenance.begin(), p->provenance.end());
    }
    return out;
}

std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds,
                                                  double train_fraction,
                                                  std::uint64_t seed) {
    ds.validate();
    if (ds.empty()) throw DataError("split: empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split: train_fraction must be in (0,1)");
    }

    const std::size_t n = ds.size();
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[ds.labels[i]].push_back(i);

    bool stratify = true;
    for (const auto& [_, idx] : by_class) {
        if (idx.size() < 2) stratify = false;
    }

    Rng rng(seed);
    std::vector<std::size_t> train_idx, test_idx;

    if (!stratify) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    } else {
        // Largest-remainder apportionment keeps per-class train counts within
        // one window of proportional while the total stays exactly n_train.
        struct Alloc {
            int label;
            std::size_t take;
            double remainder;
        };
        std::vector<Alloc> allocs;
        std::size_t assigned = 0;
        for (const auto& [label, idx] : by_class) {
            double target = train_fraction * static_cast<double>(idx.size());
            auto take = static_cast<std::size_t>(std::floor(target));
            take = std::min(take, idx.size() - 1);  // keep at least one test window
            allocs.push_back({label, take, target - std::floor(target)});
            assigned += take;
        }
        std::stable_sort(allocs.begin(), allocs.end(), [](const Alloc& a, const Alloc& b) {
            return a.remainder > b.remainder;
        });
        bool progress = true;
        while (assigned < n_train && progress) {
            progress = false;
            for (auto& a : allocs) {
                if (assigned >= n_train) break;
                if (a.take + 1 < by_class[a.label].size()) {
                    ++a.take;
                    ++assigned;
                    progress = true;
                }
            }
        }
        for (const auto& a : allocs) {
            auto idx = by_class[a.label];
            rng.shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                (i < a.take ? train_idx : test_idx).push_back(idx[i]);
            }
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(test_idx.begin(), test_idx.end());
    }

    return {ds.subset(train_idx), ds.subset(test_idx)};
}

ChannelStats compute_channel_stats(const WindowedDataset& ds) {
    ds.validate();
    if (ds.empty()) throw DataError("compute_channel_stats: empty dataset");
    const std::size_t C = ds.channels();
    const std::size_t T = ds.window_len();
    const std::size_t N = ds.size();
    ChannelStats stats;
    stats.mean.assign(C, 0.0);
    stats.stddev.assign(C, 0.0);
    const double count = static_cast<double>(N * T);
    for (std::size_t c = 0; c < C; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double* x = ds.windows.data.data() + (i * C + c) * T;
            for (std::size_t t = 0; t < T; ++t) sum += x[t];
        }
        stats.mean[c] = sum / count;
        double sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double* x = ds.windows.data.data() + (i * C + c) * T;
            for (std::size_t t = 0; t < T; ++t) {
                double d = x[t] - stats.mean[c];
                sq += d * d;
            }
        }
        stats.stddev[c] = std::max(std::sqrt(sq / count), 1e-8);
    }
    return stats;
}

void apply_zscore(WindowedDataset& ds, const ChannelStats& stats) {
    ds.validate();
    const std::size_t C = ds.channels();
    const std::size_t T = ds.window_len();
    if (stats.mean.size() != C || stats.stddev.size() != C) {
        throw ShapeError("apply_zscore: stats channel count mismatch");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t c = 0; c < C; ++c) {
            double* x = ds.windows.data.data() + (i * C + c) * T;
            for (std::size_t t = 0; t < T; ++t) x[t] = (x[t] - stats.mean[c]) / stats.stddev[c];
        }
    }
}

namespace {

constexpr std::uint32_t kDatasetMagic = 0x46485744;  // "FHWD"
constexpr std::uint32_t kDatasetVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("unexpected end of dataset file");
    return v;
}

}  // namespace

void save_dataset_file(const WindowedDataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_pod(os, kDatasetMagic);
    write_pod(os, kDatasetVersion);
    write_pod<std::uint64_t>(os, ds.size());
    write_pod<std::uint64_t>(os, ds.channels());
    write_pod<std::uint64_t>(os, ds.window_len());
    os.write(reinterpret_cast<const char*>(ds.labels.data()),
             static_cast<std::streamsize>(ds.labels.size() * sizeof(int)));
    os.write(reinterpret_cast<const char*>(ds.provenance.data()),
             static_cast<std::streamsize>(ds.provenance.size() * sizeof(int)));
    os.write(reinterpret_cast<const char*>(ds.windows.data.data()),
             static_cast<std::streamsize>(ds.windows.size() * sizeof(double)));
    if (!os) throw IoError("failed to write " + path.string());
}

WindowedDataset load_dataset_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    if (read_pod<std::uint32_t>(is) != kDatasetMagic) {
        throw IoError(path.string() + " is not a dataset container (bad magic)");
    }
    if (read_pod<std::uint32_t>(is) != kDatasetVersion) {
        throw IoError(path.string() + ": unsupported container version");
    }
    auto n = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    auto c = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    auto t = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    WindowedDataset ds;
    ds.labels.resize(n);
    ds.provenance.resize(n);
    is.read(reinterpret_cast<char*>(ds.labels.data()),
            static_cast<std::streamsize>(n * sizeof(int)));
    is.read(reinterpret_cast<char*>(ds.provenance.data()),
            static_cast<std::streamsize>(n * sizeof(int)));
    std::vector<double> payload(n * c * t);
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!is) throw IoError("unexpected end of dataset file " + path.string());
    ds.windows = Tensor({n, c, t}, std::move(payload));
    ds.validate();
    return ds;
}

}  // namespace fedhar::data
