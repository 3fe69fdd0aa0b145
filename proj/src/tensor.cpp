#include "versecraft/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "versecraft/rng.hpp"

namespace versecraft {

void zero_grad(const ParamList& params) {
    for (Param* p : params) p->grad.fill(0.0);
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

void round_to_float(Tensor& t) {
    for (double& v : t.values()) v = static_cast<double>(static_cast<float>(v));
}

void round_to_float(const ParamList& params) {
    for (Param* p : params) round_to_float(p->value);
}

void matvec_add(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
                std::span<double> y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w.data() + r * cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] += acc;
    }
}

void matvec_t_add(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dx[c] += wr[c] * g;
    }
}

void outer_add(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        double* dr = dw.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dr[c] += g * x[c];
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void softmax_inplace(std::span<double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
}

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace versecraft
