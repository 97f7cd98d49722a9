#pragma once

#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace autotuner {

// Dense row-major tensor; double in gradient checks, float in training.
template <typename T>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign(numel(shape), T(0));
    }

    static int64_t numel(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            if (d < 0) raise(ErrorKind::Shape, "negative tensor dimension");
            n *= d;
        }
        return n;
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(int i) const { return shape[i]; }
    int rank() const { return static_cast<int>(shape.size()); }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& at(int64_t i) { return data[i]; }
    T at(int64_t i) const { return data[i]; }
    T& at(int64_t i, int64_t j) { return data[i * shape[1] + j]; }
    T at(int64_t i, int64_t j) const { return data[i * shape[1] + j]; }
    T& at(int64_t i, int64_t j, int64_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    T at(int64_t i, int64_t j, int64_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    T& at(int64_t i, int64_t j, int64_t k, int64_t l) {
        return data[((i * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }
    T at(int64_t i, int64_t j, int64_t k, int64_t l) const {
        return data[((i * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
bool all_finite(const Tensor<T>& t) {
    for (T v : t.data)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

}  // namespace autotuner
