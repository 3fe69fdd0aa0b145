#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "versecraft/corpus.hpp"
#include "versecraft/tensor.hpp"

namespace versecraft {

// ---------------------------------------------------------------------------
// Masked sequence loss

/// Mean negative log-likelihood over unmasked positions. logits is B×T×V;
/// targets and mask are B×T. Throws if the mask is all zero.
double sequence_loss(const Tensor& logits, const Grid<TokenId>& targets, const Grid<std::uint8_t>& mask);

/// d sequence_loss / d logits (zero rows at masked positions).
Tensor sequence_loss_grad(const Tensor& logits, const Grid<TokenId>& targets, const Grid<std::uint8_t>& mask);

/// -log softmax(z)[target] and, optionally, its gradient scaled by `scale`.
double softmax_cross_entropy(std::span<const double> logits, TokenId target, double scale = 1.0,
                             std::span<double> d_logits = {});

// ---------------------------------------------------------------------------
// Gradient clipping and Adam

double global_grad_norm(const ParamList& params);

/// Scales all gradients by max_norm / norm when norm exceeds max_norm.
/// Returns the norm before clipping.
double clip_gradients(const ParamList& params, double max_norm);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(const ParamList& params, AdamConfig config);

    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    /// Rounds the moments to float precision (see round_to_float).
    void round_to_float();
};

/// One bias-corrected Adam update using each parameter's accumulated grad.
void adam_step(AdamState& state, const ParamList& params);

}  // namespace versecraft
