#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedhar/tensor.hpp"

namespace fedhar::data {

// Fixed-length multi-channel sensor windows with activity labels and
// per-window subject/client provenance. windows is [N, C, T].
struct WindowedDataset {
    Tensor windows;
    std::vector<int> labels;
    std::vector<int> provenance;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
    std::size_t channels() const { return windows.ndim() == 3 ? windows.dim(1) : 0; }
    std::size_t window_len() const { return windows.ndim() == 3 ? windows.dim(2) : 0; }

    // Throws unless windows is [N,C,T] with N == labels == provenance sizes.
    void validate() const;

    // Copies the selected windows into a [B,C,T] batch tensor.
    Tensor gather(std::span<const std::size_t> indices) const;
    WindowedDataset subset(std::span<const std::size_t> indices) const;

    static WindowedDataset concat(const std::vector<const WindowedDataset*>& parts);
};

// Deterministic window-level split; label-stratified whenever every class
// has at least two windows, plain shuffle otherwise. Train size is
// round(fraction * N), apportioned per class by largest remainder.
std::pair<WindowedDataset, WindowedDataset> split(const WindowedDataset& ds,
                                                  double train_fraction,
                                                  std::uint64_t seed);

// Per-channel normalization statistics. Sigma is clamped to >= 1e-8 so a
// constant channel z-scores to zeros.
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

ChannelStats compute_channel_stats(const WindowedDataset& ds);
void apply_zscore(WindowedDataset& ds, const ChannelStats& stats);

// Compact binary container (shape header + payload + labels/provenance).
// Round-trips bit-exactly.
void save_dataset_file(const WindowedDataset& ds, const std::filesystem::path& path);
WindowedDataset load_dataset_file(const std::filesystem::path& path);

}  // namespace fedhar::data
