#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "versecraft/tensor.hpp"

namespace versecraft {

/// Additive attention: e_i = v · tanh(W_s q + W_h s_i).
struct AttentionParams {
    Param ws;  // A × query_dim
    Param wh;  // A × state_dim
    Param v;   // A

    AttentionParams() = default;
    AttentionParams(std::size_t attn_dim, std::size_t query_dim, std::size_t state_dim);

    void init(Rng& rng);
    std::size_t attn_dim() const { return v.value.size(); }
    ParamList params() { return {&ws, &wh, &v}; }
};

/// W_h s_i for every encoder state; reused across decoder steps.
struct AttentionKeys {
    std::vector<Vec> keys;
};

AttentionKeys attention_keys(const AttentionParams& p, std::span<const Vec> states);

struct AttentionCache {
    Vec query;
    std::vector<Vec> act;  // tanh(W_s q + key_i) per state (empty when masked)
    Vec weights;
};

struct Attended {
    Vec context;
    Vec weights;  // zero at masked positions
};

/// Softmax over unmasked states (mask entry 1 = attend). Throws when every
/// state is masked. An empty mask means all states are valid.
Attended attend(const AttentionParams& p, std::span<const double> query, std::span<const Vec> states,
                std::span<const std::uint8_t> mask = {}, AttentionCache* cache = nullptr,
                const AttentionKeys* keys = nullptr);

/// Accumulates gradients for W_s, v, the query, the states (weighted-sum
/// path), and the per-state keys. Call attention_keys_backward once after all
/// decoder steps to push d_keys into W_h and the states.
void attend_backward(AttentionParams& p, const AttentionCache& cache, std::span<const Vec> states,
                     std::span<const double> d_context, std::span<double> d_query, std::vector<Vec>& d_states,
                     std::vector<Vec>& d_keys);

void attention_keys_backward(AttentionParams& p, std::span<const Vec> states, std::span<const Vec> d_keys,
                             std::vector<Vec>& d_states);

}  // namespace versecraft
