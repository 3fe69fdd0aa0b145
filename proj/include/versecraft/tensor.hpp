#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace versecraft {

class Rng;

using Vec = std::vector<double>;

/// Dense row-major array of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)),
          data_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>{}), fill) {}

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    const double& at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * shape_[1] + j) * shape_[2] + k]; }
    const double& at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    /// Row r of a 2-D tensor.
    std::span<double> row(std::size_t r) { return {data_.data() + r * shape_[1], shape_[1]}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * shape_[1], shape_[1]}; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// A trainable array with its accumulated gradient.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;

    Param() = default;
    Param(std::string n, std::vector<std::size_t> shape) : name(std::move(n)), value(shape), grad(shape) {}
};

using ParamList = std::vector<Param*>;

void zero_grad(const ParamList& params);

/// Glorot-uniform fill with limit sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Rounds every value to the nearest 32-bit float, so in-memory state matches
/// what a checkpoint stores.
void round_to_float(Tensor& t);
void round_to_float(const ParamList& params);

// Kernels over row-major (rows × cols) matrices stored in spans.

/// y += W x
void matvec_add(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
                std::span<double> y);
/// dx += Wᵀ dy
void matvec_t_add(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx);
/// dW += dy xᵀ
void outer_add(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x);

inline void add_to(std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

double dot(std::span<const double> a, std::span<const double> b);

double sigmoid(double x);

/// In-place numerically stable softmax.
void softmax_inplace(std::span<double> z);

/// log(sum(exp(z)))
double log_sum_exp(std::span<const double> z);

}  // namespace versecraft
