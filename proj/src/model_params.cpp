#include "fedhar/model_params.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "fedhar/errors.hpp"

namespace fedhar {

void ModelParams::add(std::string name, Tensor value) {
    for (const auto& [n, _] : entries_) {
        if (n == name) throw ConfigError("duplicate parameter name: " + name);
    }
    entries_.emplace_back(std::move(name), std::move(value));
}

Tensor& ModelParams::at(const std::string& name) {
    for (auto& [n, t] : entries_) {
        if (n == name) return t;
    }
    throw ConfigError("no parameter named " + name);
}

const Tensor& ModelParams::at(const std::string& name) const {
    for (const auto& [n, t] : entries_) {
        if (n == name) return t;
    }
    throw ConfigError("no parameter named " + name);
}

std::size_t ModelParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : entries_) n += t.size();
    return n;
}

bool ModelParams::shape_compatible(const ModelParams& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first != other.entries_[i].first) return false;
        if (entries_[i].second.shape != other.entries_[i].second.shape) return false;
    }
    return true;
}

void ModelParams::require_compatible(const ModelParams& other, const char* what) const {
    if (!shape_compatible(other)) {
        throw ShapeError(std::string(what) + ": parameter sets are not shape-compatible");
    }
}

std::vector<double> ModelParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(scalar_count());
    for (const auto& [_, t] : entries_) flat.insert(flat.end(), t.data.begin(), t.data.end());
    return flat;
}

void ModelParams::assign_flat(std::span<const double> flat) {
    if (flat.size() != scalar_count()) {
        throw ShapeError("assign_flat: expected " + std::to_string(scalar_count()) +
                         " values, got " + std::to_string(flat.size()));
    }
    std::size_t off = 0;
    for (auto& [_, t] : entries_) {
        std::memcpy(t.data.data(), flat.data() + off, t.size() * sizeof(double));
        off += t.size();
    }
}

bool ModelParams::all_finite() const {
    for (const auto& [_, t] : entries_) {
        if (!t.all_finite()) return false;
    }
    return true;
}

namespace {

template <typename Fn>
ModelParams zip(const ModelParams& a, const ModelParams& b, Fn&& fn, const char* what) {
    a.require_compatible(b, what);
    ModelParams out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& [name, ta] = a.entry(i);
        const auto& tb = b.entry(i).second;
        Tensor t = ta;
        for (std::size_t k = 0; k < t.size(); ++k) t.data[k] = fn(ta.data[k], tb.data[k]);
        out.add(name, std::move(t));
    }
    return out;
}

}  // namespace

ModelParams params_scale(const ModelParams& a, double s) {
    ModelParams out;
    for (const auto& [name, t] : a) {
        Tensor c = t;
        for (double& v : c.data) v *= s;
        out.add(name, std::move(c));
    }
    return out;
}

ModelParams params_add(const ModelParams& a, const ModelParams& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "params_add");
}

ModelParams params_sub(const ModelParams& a, const ModelParams& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "params_sub");
}

ModelParams params_axpy(const ModelParams& a, double s, const ModelParams& b) {
    return zip(a, b, [s](double x, double y) { return x + s * y; }, "params_axpy");
}

double params_l2_distance(const ModelParams& a, const ModelParams& b) {
    a.require_compatible(b, "params_l2_distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& ta = a.entry(i).second;
        const auto& tb = b.entry(i).second;
        for (std::size_t k = 0; k < ta.size(); ++k) {
            double d = ta.data[k] - tb.data[k];
            acc += d * d;
        }
    }
    return std::sqrt(acc);
}

double params_squared_norm(const ModelParams& a) {
    double acc = 0.0;
    for (const auto& [_, t] : a) {
        for (double v : t.data) acc += v * v;
    }
    return acc;
}

ModelParams params_mean(const std::vector<const ModelParams*>& uploads) {
    if (uploads.empty()) throw DataError("params_mean: no uploads");
    ModelParams acc = *uploads[0];
    for (std::size_t i = 1; i < uploads.size(); ++i) acc = params_add(acc, *uploads[i]);
    return params_scale(acc, 1.0 / static_cast<double>(uploads.size()));
}

namespace {

constexpr std::uint32_t kParamsMagic = 0x46484d50;  // "FHMP"
constexpr std::uint32_t kParamsVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError("unexpected end of parameter stream");
    return v;
}

}  // namespace

void save_params(const ModelParams& params, std::ostream& os) {
    write_pod(os, kParamsMagic);
    write_pod(os, kParamsVersion);
    write_pod<std::uint64_t>(os, params.size());
    for (const auto& [name, t] : params) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.ndim()));
        for (std::size_t d : t.shape) write_pod<std::uint64_t>(os, d);
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!os) throw IoError("failed to write parameter stream");
}

ModelParams load_params(std::istream& is) {
    if (read_pod<std::uint32_t>(is) != kParamsMagic) {
        throw IoError("not a parameter file (bad magic)");
    }
    if (read_pod<std::uint32_t>(is) != kParamsVersion) {
        throw IoError("unsupported parameter file version");
    }
    auto count = read_pod<std::uint64_t>(is);
    ModelParams out;
    for (std::uint64_t i = 0; i < count; ++i) {
        auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        auto ndim = read_pod<std::uint32_t>(is);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
        std::vector<double> data(shape_product(shape));
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!is) throw IoError("unexpected end of parameter stream");
        out.add(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    return out;
}

void save_params_file(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    save_params(params, os);
}

ModelParams load_params_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return load_params(is);
}

}  // namespace fedhar
