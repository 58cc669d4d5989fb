#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedhar/tensor.hpp"

namespace fedhar {

// Ordered, named collection of parameter tensors. The unit of upload,
// aggregation and serialization. Two ModelParams are shape-compatible iff
// they have the same names in the same order with the same shapes.
class ModelParams {
public:
    using Entry = std::pair<std::string, Tensor>;

    ModelParams() = default;

    void add(std::string name, Tensor value);

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    Entry& entry(std::size_t i) { return entries_[i]; }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    std::size_t scalar_count() const;
    bool shape_compatible(const ModelParams& other) const;
    void require_compatible(const ModelParams& other, const char* what) const;

    // Concatenation of all tensors in entry order; used by oracles and
    // aggregation checks.
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);

    bool all_finite() const;

private:
    std::vector<Entry> entries_;
};

// Elementwise arithmetic over shape-compatible parameter sets.
ModelParams params_scale(const ModelParams& a, double s);
ModelParams params_add(const ModelParams& a, const ModelParams& b);
ModelParams params_sub(const ModelParams& a, const ModelParams& b);
// a + s * b
ModelParams params_axpy(const ModelParams& a, double s, const ModelParams& b);
double params_l2_distance(const ModelParams& a, const ModelParams& b);
double params_squared_norm(const ModelParams& a);
ModelParams params_mean(const std::vector<const ModelParams*>& uploads);

// Binary serialization: ordered (name, shape, payload) records, little-endian
// doubles. Round-trips bit-exactly.
void save_params(const ModelParams& params, std::ostream& os);
ModelParams load_params(std::istream& is);
void save_params_file(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params_file(const std::filesystem::path& path);

}  // namespace fedhar
