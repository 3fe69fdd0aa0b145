#include "versecraft/attention.hpp"

#include <cmath>
#include <limits>

#include "versecraft/error.hpp"
#include "versecraft/rng.hpp"

namespace versecraft {

AttentionParams::AttentionParams(std::size_t attn_dim, std::size_t query_dim, std::size_t state_dim)
    : ws("attention.ws", {attn_dim, query_dim}), wh("attention.wh", {attn_dim, state_dim}), v("attention.v", {attn_dim}) {}

void AttentionParams::init(Rng& rng) {
    glorot_uniform(ws.value, ws.value.dim(1), ws.value.dim(0), rng);
    glorot_uniform(wh.value, wh.value.dim(1), wh.value.dim(0), rng);
    glorot_uniform(v.value, v.value.size(), 1, rng);
}

AttentionKeys attention_keys(const AttentionParams& p, std::span<const Vec> states) {
    const std::size_t a = p.attn_dim();
    const std::size_t sd = p.wh.value.dim(1);
    AttentionKeys k;
    k.keys.reserve(states.size());
    for (const auto& s : states) {
        if (s.size() != sd) throw InvalidArgument("attention: state width mismatch");
        Vec key(a, 0.0);
        matvec_add(p.wh.value.values(), a, sd, s, key);
        k.keys.push_back(std::move(key));
    }
    return k;
}

Attended attend(const AttentionParams& p, std::span<const double> query, std::span<const Vec> states,
                std::span<const std::uint8_t> mask, AttentionCache* cache, const AttentionKeys* keys) {
    const std::size_t a = p.attn_dim();
    const std::size_t qd = p.ws.value.dim(1);
    if (query.size() != qd) throw InvalidArgument("attend: query width mismatch");
    if (!mask.empty() && mask.size() != states.size()) throw InvalidArgument("attend: mask length mismatch");
    auto valid = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };

    bool any = false;
    for (std::size_t i = 0; i < states.size(); ++i) any = any || valid(i);
    if (!any) throw InvalidArgument("attend: every encoder state is masked");

    AttentionKeys local;
    if (!keys) {
        local = attention_keys(p, states);
        keys = &local;
    }

    Vec wq(a, 0.0);
    matvec_add(p.ws.value.values(), a, qd, query, wq);

    std::vector<Vec> act(states.size());
    Vec scores(states.size(), -std::numeric_limits<double>::infinity());
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!valid(i)) continue;
        act[i].resize(a);
        for (std::size_t k = 0; k < a; ++k) act[i][k] = std::tanh(wq[k] + keys->keys[i][k]);
        scores[i] = dot(p.v.value.values(), act[i]);
        max_score = std::max(max_score, scores[i]);
    }

    Attended out;
    out.weights.assign(states.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!valid(i)) continue;
        out.weights[i] = std::exp(scores[i] - max_score);
        total += out.weights[i];
    }
    const std::size_t sd = states.front().size();
    out.context.assign(sd, 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (!valid(i)) continue;
        out.weights[i] /= total;
        for (std::size_t k = 0; k < sd; ++k) out.context[k] += out.weights[i] * states[i][k];
    }

    if (cache) {
        cache->query.assign(query.begin(), query.end());
        cache->act = std::move(act);
        cache->weights = out.weights;
    }
    return out;
}

void attend_backward(AttentionParams& p, const AttentionCache& cache, std::span<const Vec> states,
                     std::span<const double> d_context, std::span<double> d_query, std::vector<Vec>& d_states,
                     std::vector<Vec>& d_keys) {
    const std::size_t a = p.attn_dim();
    const std::size_t qd = p.ws.value.dim(1);
    const std::size_t n = states.size();
    const std::size_t sd = states.front().size();
    if (d_states.size() < n) d_states.resize(n, Vec(sd, 0.0));
    if (d_keys.size() < n) d_keys.resize(n, Vec(a, 0.0));

    // Through the weighted sum.
    Vec d_weight(n, 0.0);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (cache.act[i].empty()) continue;
        d_weight[i] = dot(d_context, states[i]);
        mean += cache.weights[i] * d_weight[i];
        for (std::size_t k = 0; k < sd; ++k) d_states[i][k] += cache.weights[i] * d_context[k];
    }

    // Through softmax and the tanh scorer.
    Vec d_wq(a, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (cache.act[i].empty()) continue;
        const double d_score = cache.weights[i] * (d_weight[i] - mean);
        if (d_score == 0.0) continue;
        for (std::size_t k = 0; k < a; ++k) {
            const double t = cache.act[i][k];
            p.v.grad[k] += d_score * t;
            const double d_pre = d_score * p.v.value[k] * (1.0 - t * t);
            d_keys[i][k] += d_pre;
            d_wq[k] += d_pre;
        }
    }
    outer_add(p.ws.grad.values(), a, qd, d_wq, cache.query);
    matvec_t_add(p.ws.value.values(), a, qd, d_wq, d_query);
}

void attention_keys_backward(AttentionParams& p, std::span<const Vec> states, std::span<const Vec> d_keys,
                             std::vector<Vec>& d_states) {
    const std::size_t a = p.attn_dim();
    const std::size_t sd = p.wh.value.dim(1);
    if (d_states.size() < states.size()) d_states.resize(states.size(), Vec(sd, 0.0));
    for (std::size_t i = 0; i < states.size() && i < d_keys.size(); ++i) {
        outer_add(p.wh.grad.values(), a, sd, d_keys[i], states[i]);
        matvec_t_add(p.wh.value.values(), a, sd, d_keys[i], d_states[i]);
    }
}

}  // namespace versecraft
