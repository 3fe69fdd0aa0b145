#pragma once

#include <span>
#include <string>
#include <vector>

#include "versecraft/tensor.hpp"

namespace versecraft {

/// Single LSTM cell. Gate blocks are stacked in the order input, forget,
/// output, candidate; each block has hidden_dim rows over [x ; h_prev].
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(std::string name, std::size_t input_dim, std::size_t hidden_dim);

    /// Glorot weights, zero biases except the forget gate (1.0).
    void init(Rng& rng);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden_dim() const { return hidden_dim_; }

    Param weight;  // (4H) × (input_dim + H)
    Param bias;    // 4H

    ParamList params() { return {&weight, &bias}; }

private:
    std::size_t input_dim_ = 0;
    std::size_t hidden_dim_ = 0;
};

struct LstmState {
    Vec h;
    Vec c;
};

/// Everything backward needs from one forward step.
struct LstmStepCache {
    Vec xh;  // [x ; h_prev]
    Vec i, f, o, g;
    Vec c_prev;
    Vec tanh_c;
};

/// i,f,o = sigmoid, g = tanh, c = f⊙c_prev + i⊙g, h = o⊙tanh(c).
LstmState lstm_step(const LstmCell& cell, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, LstmStepCache* cache = nullptr);

/// Backpropagates (dh, dc) at the step output. Weight gradients accumulate
/// into the cell; dx accumulates into `dx`; dh_prev / dc_prev are overwritten.
void lstm_step_backward(LstmCell& cell, const LstmStepCache& cache, std::span<const double> dh,
                        std::span<const double> dc, std::span<double> dx, Vec& dh_prev, Vec& dc_prev);

struct BiLstmCache {
    std::size_t valid = 0;
    std::vector<LstmStepCache> fw;  // fw[t] for t = 0..valid-1
    std::vector<LstmStepCache> bw;  // bw[t] is the step that consumed position t
};

/// Output t = [forward h_t ; backward h_t]. The backward direction runs over
/// the reversed valid prefix only; positions at or past valid_length are
/// zero vectors of width 2H.
std::vector<Vec> bilstm_encode(const LstmCell& fw, const LstmCell& bw, std::span<const Vec> inputs,
                               std::size_t valid_length, BiLstmCache* cache = nullptr);

/// d_outputs has one 2H gradient per valid position. Input gradients for
/// those positions are accumulated into d_inputs (resized as needed).
void bilstm_backward(LstmCell& fw, LstmCell& bw, const BiLstmCache& cache, std::span<const Vec> d_outputs,
                     std::vector<Vec>& d_inputs);

}  // namespace versecraft
