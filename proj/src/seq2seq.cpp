#include "versecraft/seq2seq.hpp"

#include <array>
#include <cmath>

#include "versecraft/error.hpp"
#include "versecraft/optim.hpp"
#include "versecraft/rng.hpp"

namespace versecraft {

std::string_view to_string(DecoderMode mode) { return mode == DecoderMode::FixedC ? "fixed" : "attention"; }

DecoderMode parse_decoder_mode(std::string_view name) {
    if (name == "fixed" || name == "fixedc" || name == "FixedC") return DecoderMode::FixedC;
    if (name == "attention" || name == "Attention") return DecoderMode::Attention;
    throw InvalidArgument("unknown decoder mode '" + std::string(name) + "' (expected fixed|attention)");
}

namespace {

std::size_t attn_dim(const ModelDims& d) { return d.attention == 0 ? d.hidden : d.attention; }

ModelDims checked(ModelDims d) {
    if (d.vocab <= Vocab::kNumSpecials || d.embed == 0 || d.hidden == 0) {
        throw InvalidArgument("Seq2SeqModel: vocab must exceed the special tokens and dims must be positive");
    }
    return d;
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(ModelDims dims, DecoderMode mode)
    : embedding("embedding", {checked(dims).vocab, dims.embed}),
      keyword_fw("keyword_fw", dims.embed, dims.hidden),
      keyword_bw("keyword_bw", dims.embed, dims.hidden),
      context_fw("context_fw", dims.embed, dims.hidden),
      context_bw("context_bw", dims.embed, dims.hidden),
      decoder("decoder", dims.embed + 2 * dims.hidden, dims.hidden),
      init_w("decoder_init.weight", {dims.hidden, 4 * dims.hidden}),
      init_b("decoder_init.bias", {dims.hidden}),
      attention(attn_dim(dims), dims.hidden, 2 * dims.hidden),
      out_w("output.weight", {dims.vocab, dims.hidden}),
      out_b("output.bias", {dims.vocab}),
      dims_(dims),
      mode_(mode) {}

void Seq2SeqModel::init(std::uint64_t seed) {
    Rng rng(seed);
    glorot_uniform(embedding.value, dims_.vocab, dims_.embed, rng);
    keyword_fw.init(rng);
    keyword_bw.init(rng);
    context_fw.init(rng);
    context_bw.init(rng);
    decoder.init(rng);
    glorot_uniform(init_w.value, 4 * dims_.hidden, dims_.hidden, rng);
    init_b.value.fill(0.0);
    attention.init(rng);
    glorot_uniform(out_w.value, dims_.hidden, dims_.vocab, rng);
    out_b.value.fill(0.0);
}

ParamList Seq2SeqModel::params() {
    ParamList p{&embedding};
    for (LstmCell* c : {&keyword_fw, &keyword_bw, &context_fw, &context_bw, &decoder}) {
        p.push_back(&c->weight);
        p.push_back(&c->bias);
    }
    p.push_back(&init_w);
    p.push_back(&init_b);
    for (Param* a : attention.params()) p.push_back(a);
    p.push_back(&out_w);
    p.push_back(&out_b);
    return p;
}

std::vector<const Param*> Seq2SeqModel::params() const {
    auto mutable_list = const_cast<Seq2SeqModel*>(this)->params();
    return {mutable_list.begin(), mutable_list.end()};
}

// ---------------------------------------------------------------------------
// Encoder

namespace {

struct SummarySlot {
    std::size_t state;
    std::size_t offset;  // 0 = forward half, H = backward half
};

// Where the four final encoder states live among the state columns.
std::array<SummarySlot, 4> summary_slots(std::size_t keyword_cols, std::size_t keyword_len, std::size_t context_len,
                                         std::size_t hidden) {
    return {SummarySlot{keyword_len - 1, 0}, SummarySlot{0, hidden},
            SummarySlot{keyword_cols + context_len - 1, 0}, SummarySlot{keyword_cols, hidden}};
}

Vec gather_summary(std::span<const Vec> states, std::size_t keyword_cols, std::size_t keyword_len,
                   std::size_t context_len, std::size_t hidden) {
    Vec s;
    s.reserve(4 * hidden);
    for (const auto& slot : summary_slots(keyword_cols, keyword_len, context_len, hidden)) {
        const auto& st = states[slot.state];
        s.insert(s.end(), st.begin() + static_cast<std::ptrdiff_t>(slot.offset),
                 st.begin() + static_cast<std::ptrdiff_t>(slot.offset + hidden));
    }
    return s;
}

std::vector<Vec> embed_all(const Seq2SeqModel& m, std::span<const TokenId> ids) {
    std::vector<Vec> out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= m.dims().vocab) throw InvalidArgument("token id out of range");
        auto row = m.embed(id);
        out.emplace_back(row.begin(), row.end());
    }
    return out;
}

const std::vector<TokenId> kStartOnly{Vocab::kStart};

// Keyword states then context states, no padding.
std::vector<Vec> encode_compact(const Seq2SeqModel& m, std::span<const TokenId> keyword,
                                std::span<const TokenId> context, BiLstmCache* kw_cache, BiLstmCache* ctx_cache) {
    if (keyword.empty()) throw InvalidArgument("encode: keyword must be non-empty");
    if (context.empty()) context = kStartOnly;
    auto kw_in = embed_all(m, keyword);
    auto ctx_in = embed_all(m, context);
    auto states = bilstm_encode(m.keyword_fw, m.keyword_bw, kw_in, kw_in.size(), kw_cache);
    auto ctx_states = bilstm_encode(m.context_fw, m.context_bw, ctx_in, ctx_in.size(), ctx_cache);
    states.insert(states.end(), std::make_move_iterator(ctx_states.begin()),
                  std::make_move_iterator(ctx_states.end()));
    return states;
}

Vec initial_hidden(const Seq2SeqModel& m, const Vec& summary) {
    const std::size_t h = m.dims().hidden;
    Vec pre(m.init_b.value.values().begin(), m.init_b.value.values().end());
    matvec_add(m.init_w.value.values(), h, 4 * h, summary, pre);
    for (double& v : pre) v = std::tanh(v);
    return pre;
}

}  // namespace

Vec EncodedExample::final_summary() const {
    const std::size_t hidden = states.front().size() / 2;
    return gather_summary(states, keyword_cols, keyword_len, context_len, hidden);
}

EncodedExample encode_example(const Seq2SeqModel& model, std::span<const TokenId> keyword,
                              std::span<const TokenId> context, std::size_t keyword_cols,
                              std::size_t context_cols) {
    if (context.empty()) context = kStartOnly;
    keyword_cols = std::max(keyword_cols, keyword.size());
    context_cols = std::max(context_cols, context.size());
    auto compact = encode_compact(model, keyword, context, nullptr, nullptr);

    EncodedExample e;
    e.keyword_cols = keyword_cols;
    e.keyword_len = keyword.size();
    e.context_len = context.size();
    e.states.assign(keyword_cols + context_cols, Vec(model.state_dim(), 0.0));
    e.mask.assign(keyword_cols + context_cols, 0);
    for (std::size_t t = 0; t < keyword.size(); ++t) {
        e.states[t] = std::move(compact[t]);
        e.mask[t] = 1;
    }
    for (std::size_t t = 0; t < context.size(); ++t) {
        e.states[keyword_cols + t] = std::move(compact[keyword.size() + t]);
        e.mask[keyword_cols + t] = 1;
    }
    return e;
}

EncoderStates encode(const Seq2SeqModel& model, const Grid<TokenId>& keyword_ids, const Grid<TokenId>& context_ids,
                     std::span<const std::size_t> keyword_lengths, std::span<const std::size_t> context_lengths) {
    if (keyword_ids.rows != context_ids.rows || keyword_lengths.size() != keyword_ids.rows ||
        context_lengths.size() != context_ids.rows) {
        throw InvalidArgument("encode: batch shapes disagree");
    }
    EncoderStates out;
    for (std::size_t b = 0; b < keyword_ids.rows; ++b) {
        if (keyword_lengths[b] > keyword_ids.cols || context_lengths[b] > context_ids.cols) {
            throw InvalidArgument("encode: length exceeds padded width");
        }
        auto kw = keyword_ids.row(b).first(keyword_lengths[b]);
        auto ctx = context_ids.row(b).first(context_lengths[b]);
        out.rows.push_back(encode_example(model, kw, ctx, keyword_ids.cols, std::max<std::size_t>(context_ids.cols, 1)));
    }
    return out;
}

Vec fixed_context(std::span<const Vec> states, std::span<const std::uint8_t> mask) {
    if (states.empty()) throw InvalidArgument("fixed_context: no encoder states");
    if (!mask.empty() && mask.size() != states.size()) throw InvalidArgument("fixed_context: mask length mismatch");
    for (std::size_t i = states.size(); i-- > 0;) {
        if (mask.empty() || mask[i]) return states[i];
    }
    throw InvalidArgument("fixed_context: every state is masked");
}

// ---------------------------------------------------------------------------
// Decoder

namespace {

struct StepCache {
    TokenId input = 0;
    LstmStepCache lstm;
    AttentionCache attn;
    Vec h;
    Vec logits;
};

// Everything the decoder needs from the encoder for one example.
struct DecoderSource {
    std::span<const Vec> states;
    std::span<const std::uint8_t> mask;
    AttentionKeys keys;
    Vec fixed;
};

DecoderSource make_source(const Seq2SeqModel& m, std::span<const Vec> states, std::span<const std::uint8_t> mask) {
    DecoderSource src{states, mask, {}, {}};
    if (m.mode() == DecoderMode::Attention) {
        src.keys = attention_keys(m.attention, states);
    } else {
        src.fixed = fixed_context(states, mask);
    }
    return src;
}

// One decoder step; updates `state` in place and returns the logits.
Vec decoder_step(const Seq2SeqModel& m, const DecoderSource& src, TokenId input, LstmState& state,
                 StepCache* cache) {
    const std::size_t d = m.dims().embed;
    const std::size_t h = m.dims().hidden;
    const std::size_t v = m.dims().vocab;
    if (input < 0 || static_cast<std::size_t>(input) >= v) throw InvalidArgument("decoder input id out of range");

    Vec x(d + 2 * h);
    auto e = m.embed(input);
    std::copy(e.begin(), e.end(), x.begin());
    if (m.mode() == DecoderMode::Attention) {
        auto att = attend(m.attention, state.h, src.states, src.mask, cache ? &cache->attn : nullptr, &src.keys);
        std::copy(att.context.begin(), att.context.end(), x.begin() + static_cast<std::ptrdiff_t>(d));
    } else {
        std::copy(src.fixed.begin(), src.fixed.end(), x.begin() + static_cast<std::ptrdiff_t>(d));
    }
    state = lstm_step(m.decoder, x, state.h, state.c, cache ? &cache->lstm : nullptr);

    Vec logits(m.out_b.value.values().begin(), m.out_b.value.values().end());
    matvec_add(m.out_w.value.values(), v, h, state.h, logits);
    if (cache) {
        cache->input = input;
        cache->h = state.h;
        cache->logits = logits;
    }
    return logits;
}

}  // namespace

Tensor decode_train(const Seq2SeqModel& model, const EncoderStates& encoded, const Grid<TokenId>& decoder_in) {
    if (encoded.rows.size() != decoder_in.rows) throw InvalidArgument("decode_train: batch size mismatch");
    const std::size_t v = model.dims().vocab;
    const std::size_t h = model.dims().hidden;
    Tensor logits({decoder_in.rows, decoder_in.cols, v});
    for (std::size_t b = 0; b < decoder_in.rows; ++b) {
        const auto& enc = encoded.rows[b];
        auto src = make_source(model, enc.states, enc.mask);
        LstmState state{initial_hidden(model, enc.final_summary()), Vec(h, 0.0)};
        for (std::size_t t = 0; t < decoder_in.cols; ++t) {
            auto z = decoder_step(model, src, decoder_in(b, t), state, nullptr);
            std::copy(z.begin(), z.end(), &logits.at(b, t, 0));
        }
    }
    return logits;
}

std::vector<TokenId> decode_greedy(const Seq2SeqModel& model, const EncodedExample& encoded, std::size_t max_len) {
    if (max_len == 0) throw InvalidArgument("decode_greedy: max_len must be >= 1");
    const std::size_t h = model.dims().hidden;
    auto src = make_source(model, encoded.states, encoded.mask);
    LstmState state{initial_hidden(model, encoded.final_summary()), Vec(h, 0.0)};
    std::vector<TokenId> out;
    TokenId input = Vocab::kStart;
    while (out.size() < max_len) {
        auto z = decoder_step(model, src, input, state, nullptr);
        TokenId best = Vocab::kEnd;
        for (std::size_t k = Vocab::kEnd + 1; k < z.size(); ++k) {
            if (z[k] > z[static_cast<std::size_t>(best)]) best = static_cast<TokenId>(k);
        }
        if (best == Vocab::kEnd) break;
        out.push_back(best);
        input = best;
    }
    return out;
}

std::vector<double> teacher_forced_log_probs(const Seq2SeqModel& model, std::span<const TokenId> keyword,
                                             std::span<const TokenId> context, std::span<const TokenId> targets) {
    const std::size_t h = model.dims().hidden;
    auto states = encode_compact(model, keyword, context, nullptr, nullptr);
    const std::size_t ctx_len = context.empty() ? 1 : context.size();
    auto src = make_source(model, states, {});
    LstmState state{initial_hidden(model, gather_summary(states, keyword.size(), keyword.size(), ctx_len, h)),
                    Vec(h, 0.0)};
    std::vector<double> out;
    TokenId input = Vocab::kStart;
    for (TokenId target : targets) {
        auto z = decoder_step(model, src, input, state, nullptr);
        out.push_back(-softmax_cross_entropy(z, target));
        input = target;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss graph

struct LossGraph::Tape {
    std::vector<TokenId> keyword;
    std::vector<TokenId> context;
    std::vector<TokenId> targets;
    BiLstmCache keyword_cache;
    BiLstmCache context_cache;
    std::vector<Vec> states;
    Vec summary;
    Vec h0;
    std::vector<StepCache> steps;
};

LossGraph::LossGraph() = default;
LossGraph::~LossGraph() = default;
LossGraph::LossGraph(LossGraph&&) noexcept = default;
LossGraph& LossGraph::operator=(LossGraph&&) noexcept = default;

LossGraph record_loss(const Seq2SeqModel& model, const Batch& batch) {
    const std::size_t h = model.dims().hidden;
    LossGraph g;
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        LossGraph::Tape tape;
        auto kw = batch.keyword_ids.row(b).first(batch.keyword_lengths[b]);
        auto ctx = batch.context_ids.row(b).first(batch.context_lengths[b]);
        tape.keyword.assign(kw.begin(), kw.end());
        tape.context.assign(ctx.begin(), ctx.end());
        if (tape.context.empty()) tape.context = kStartOnly;
        tape.states = encode_compact(model, tape.keyword, tape.context, &tape.keyword_cache, &tape.context_cache);
        tape.summary = gather_summary(tape.states, tape.keyword.size(), tape.keyword.size(), tape.context.size(), h);
        tape.h0 = initial_hidden(model, tape.summary);

        auto src = make_source(model, tape.states, {});
        LstmState state{tape.h0, Vec(h, 0.0)};
        for (std::size_t t = 0; t < batch.decoder_lengths[b]; ++t) {
            if (!batch.loss_mask(b, t)) continue;
            StepCache sc;
            decoder_step(model, src, batch.decoder_in_ids(b, t), state, &sc);
            const TokenId target = batch.decoder_target_ids(b, t);
            total += softmax_cross_entropy(sc.logits, target);
            tape.targets.push_back(target);
            tape.steps.push_back(std::move(sc));
            ++g.count_;
        }
        g.tapes_.push_back(std::move(tape));
    }
    if (g.count_ == 0) throw InvalidArgument("record_loss: batch has no unmasked positions");
    g.loss_ = total / static_cast<double>(g.count_);
    return g;
}

double batch_loss(const Seq2SeqModel& model, const Batch& batch) { return record_loss(model, batch).loss(); }

void LossGraph::backward(Seq2SeqModel& m) const {
    const std::size_t d = m.dims().embed;
    const std::size_t h = m.dims().hidden;
    const std::size_t v = m.dims().vocab;
    const std::size_t sd = 2 * h;
    const double scale = 1.0 / static_cast<double>(count_);
    const bool attention_mode = m.mode() == DecoderMode::Attention;

    for (const Tape& tape : tapes_) {
        const std::size_t n_states = tape.states.size();
        std::vector<Vec> d_states(n_states, Vec(sd, 0.0));
        std::vector<Vec> d_keys(n_states, Vec(m.attention.attn_dim(), 0.0));
        Vec d_fixed(sd, 0.0);
        Vec dh_next(h, 0.0), dc_next(h, 0.0), dh_prev, dc_prev;

        for (std::size_t t = tape.steps.size(); t-- > 0;) {
            const StepCache& st = tape.steps[t];
            Vec dz(v, 0.0);
            softmax_cross_entropy(st.logits, tape.targets[t], scale, dz);
            outer_add(m.out_w.grad.values(), v, h, dz, st.h);
            add_to(m.out_b.grad.values(), dz);

            Vec dh = dh_next;
            matvec_t_add(m.out_w.value.values(), v, h, dz, dh);
            Vec dx(d + sd, 0.0);
            lstm_step_backward(m.decoder, st.lstm, dh, dc_next, dx, dh_prev, dc_prev);

            auto emb_grad = m.embedding.grad.row(static_cast<std::size_t>(st.input));
            for (std::size_t k = 0; k < d; ++k) emb_grad[k] += dx[k];
            std::span<const double> d_ctx(dx.data() + d, sd);
            if (attention_mode) {
                attend_backward(m.attention, st.attn, tape.states, d_ctx, dh_prev, d_states, d_keys);
            } else {
                add_to(d_fixed, d_ctx);
            }
            dh_next = dh_prev;
            dc_next = dc_prev;
        }

        // Decoder initial state h0 = tanh(W summary + b).
        Vec d_pre(h);
        for (std::size_t k = 0; k < h; ++k) d_pre[k] = dh_next[k] * (1.0 - tape.h0[k] * tape.h0[k]);
        outer_add(m.init_w.grad.values(), h, 4 * h, d_pre, tape.summary);
        add_to(m.init_b.grad.values(), d_pre);
        Vec d_summary(4 * h, 0.0);
        matvec_t_add(m.init_w.value.values(), h, 4 * h, d_pre, d_summary);
        const auto slots = summary_slots(tape.keyword.size(), tape.keyword.size(), tape.context.size(), h);
        for (std::size_t s = 0; s < slots.size(); ++s) {
            for (std::size_t k = 0; k < h; ++k) d_states[slots[s].state][slots[s].offset + k] += d_summary[s * h + k];
        }

        if (attention_mode) {
            attention_keys_backward(m.attention, tape.states, d_keys, d_states);
        } else {
            add_to(d_states.back(), d_fixed);
        }

        const std::size_t n_kw = tape.keyword.size();
        std::span<const Vec> d_kw(d_states.data(), n_kw);
        std::span<const Vec> d_ctx_states(d_states.data() + n_kw, tape.context.size());
        std::vector<Vec> d_kw_in, d_ctx_in;
        bilstm_backward(m.keyword_fw, m.keyword_bw, tape.keyword_cache, d_kw, d_kw_in);
        bilstm_backward(m.context_fw, m.context_bw, tape.context_cache, d_ctx_states, d_ctx_in);
        for (std::size_t t = 0; t < n_kw; ++t) {
            add_to(m.embedding.grad.row(static_cast<std::size_t>(tape.keyword[t])), d_kw_in[t]);
        }
        for (std::size_t t = 0; t < tape.context.size(); ++t) {
            add_to(m.embedding.grad.row(static_cast<std::size_t>(tape.context[t])), d_ctx_in[t]);
        }
    }
}

}  // namespace versecraft
