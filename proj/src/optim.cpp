#include "versecraft/optim.hpp"

#include <cmath>

#include "versecraft/error.hpp"

namespace versecraft {

double softmax_cross_entropy(std::span<const double> logits, TokenId target, double scale,
                             std::span<double> d_logits) {
    const double lse = log_sum_exp(logits);
    const auto t = static_cast<std::size_t>(target);
    if (!d_logits.empty()) {
        for (std::size_t k = 0; k < logits.size(); ++k) d_logits[k] += scale * std::exp(logits[k] - lse);
        d_logits[t] -= scale;
    }
    return lse - logits[t];
}

namespace {

void check_loss_shapes(const Tensor& logits, const Grid<TokenId>& targets, const Grid<std::uint8_t>& mask) {
    if (logits.shape().size() != 3 || logits.dim(0) != targets.rows || logits.dim(1) != targets.cols ||
        mask.rows != targets.rows || mask.cols != targets.cols) {
        throw InvalidArgument("sequence_loss: logits must be B×T×V with B×T targets and mask");
    }
}

std::size_t mask_count(const Grid<std::uint8_t>& mask) {
    std::size_t n = 0;
    for (auto m : mask.data) n += m != 0;
    if (n == 0) throw InvalidArgument("sequence_loss: mask selects no positions");
    return n;
}

}  // namespace

double sequence_loss(const Tensor& logits, const Grid<TokenId>& targets, const Grid<std::uint8_t>& mask) {
    check_loss_shapes(logits, targets, mask);
    const std::size_t count = mask_count(mask);
    const std::size_t vocab = logits.dim(2);
    double total = 0.0;
    for (std::size_t b = 0; b < targets.rows; ++b) {
        for (std::size_t t = 0; t < targets.cols; ++t) {
            if (!mask(b, t)) continue;
            std::span<const double> z(&logits.at(b, t, 0), vocab);
            total += softmax_cross_entropy(z, targets(b, t));
        }
    }
    return total / static_cast<double>(count);
}

Tensor sequence_loss_grad(const Tensor& logits, const Grid<TokenId>& targets, const Grid<std::uint8_t>& mask) {
    check_loss_shapes(logits, targets, mask);
    const double scale = 1.0 / static_cast<double>(mask_count(mask));
    const std::size_t vocab = logits.dim(2);
    Tensor grad(logits.shape());
    for (std::size_t b = 0; b < targets.rows; ++b) {
        for (std::size_t t = 0; t < targets.cols; ++t) {
            if (!mask(b, t)) continue;
            std::span<const double> z(&logits.at(b, t, 0), vocab);
            softmax_cross_entropy(z, targets(b, t), scale, std::span<double>(&grad.at(b, t, 0), vocab));
        }
    }
    return grad;
}

double global_grad_norm(const ParamList& params) {
    double sq = 0.0;
    for (const Param* p : params) {
        for (double g : p->grad.values()) sq += g * g;
    }
    return std::sqrt(sq);
}

double clip_gradients(const ParamList& params, double max_norm) {
    if (!(max_norm > 0.0)) throw InvalidArgument("clip_gradients: max_norm must be positive");
    const double norm = global_grad_norm(params);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (Param* p : params) {
            for (double& g : p->grad.values()) g *= scale;
        }
    }
    return norm;
}

AdamState::AdamState(const ParamList& params, AdamConfig cfg) : config(cfg) {
    for (const Param* p : params) {
        m.emplace_back(p->value.shape());
        v.emplace_back(p->value.shape());
    }
}

void AdamState::round_to_float() {
    for (auto& t : m) versecraft::round_to_float(t);
    for (auto& t : v) versecraft::round_to_float(t);
}

void adam_step(AdamState& state, const ParamList& params) {
    if (state.m.size() != params.size()) throw InvalidArgument("adam_step: state does not match parameters");
    ++state.step;
    const auto& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Param& p = *params[k];
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        if (m.shape() != p.value.shape()) throw InvalidArgument("adam_step: moment shape mismatch for " + p.name);
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p.value[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

}  // namespace versecraft
