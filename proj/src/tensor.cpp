#include "fedhar/tensor.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

namespace fedhar {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> values)
    : shape(std::move(shp)), data(std::move(values)) {
    if (shape_product(shape) != data.size()) {
        throw ShapeError("tensor shape " + shape_to_string(shape) + " does not match " +
                         std::to_string(data.size()) + " elements");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shp) {
    std::size_t n = shape_product(shp);
    return Tensor(std::move(shp), std::vector<double>(n, 0.0));
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::validate(const char* what) const {
    for (std::size_t d : shape) {
        if (d == 0) throw ConfigError(std::string(what) + ": zero dimension in shape");
    }
    if (shape_product(shape) != data.size()) {
        throw ShapeError(std::string(what) + ": shape/data length mismatch");
    }
    if (!all_finite()) {
        throw DataError(std::string(what) + ": non-finite value");
    }
}

}  // namespace fedhar
