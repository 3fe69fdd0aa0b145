#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "versecraft/attention.hpp"
#include "versecraft/corpus.hpp"
#include "versecraft/lstm.hpp"
#include "versecraft/tensor.hpp"

namespace versecraft {

enum class DecoderMode { FixedC, Attention };

std::string_view to_string(DecoderMode mode);
DecoderMode parse_decoder_mode(std::string_view name);

struct ModelDims {
    std::size_t vocab = 0;
    std::size_t embed = 300;
    std::size_t hidden = 128;
    std::size_t attention = 0;  // 0 means "same as hidden"

    bool operator==(const ModelDims&) const = default;
};

/// Keyword BiLSTM and context BiLSTM over a shared embedding, feeding an LSTM
/// decoder that consumes [embedding ; context vector] at every step. The
/// context vector is either additive attention over all encoder states or the
/// fixed last encoder state C.
class Seq2SeqModel {
public:
    Seq2SeqModel(ModelDims dims, DecoderMode mode);

    /// Glorot initialization, forget biases at 1, seeded.
    void init(std::uint64_t seed);

    const ModelDims& dims() const { return dims_; }
    DecoderMode mode() const { return mode_; }
    std::size_t state_dim() const { return 2 * dims_.hidden; }

    Param embedding;  // V × D
    LstmCell keyword_fw, keyword_bw;
    LstmCell context_fw, context_bw;
    LstmCell decoder;  // input D + 2H
    Param init_w;      // H × 4H, decoder initial state from final encoder states
    Param init_b;      // H
    AttentionParams attention;
    Param out_w;  // V × H
    Param out_b;  // V

    /// All parameters in checkpoint manifest order.
    ParamList params();
    std::vector<const Param*> params() const;

    std::span<const double> embed(TokenId id) const { return embedding.value.row(static_cast<std::size_t>(id)); }

private:
    ModelDims dims_;
    DecoderMode mode_;
};

/// Encoder states for one example: keyword columns followed by context
/// columns, each 2H wide. PAD columns hold zero vectors and are masked.
struct EncodedExample {
    std::vector<Vec> states;
    std::vector<std::uint8_t> mask;
    std::size_t keyword_cols = 0;
    std::size_t keyword_len = 0;
    std::size_t context_len = 0;

    /// [kw fw final ; kw bw final ; ctx fw final ; ctx bw final], width 4H.
    Vec final_summary() const;
};

struct EncoderStates {
    std::vector<EncodedExample> rows;
};

/// Encodes valid keyword and context ids. An empty context is replaced by a
/// single START token.
EncodedExample encode_example(const Seq2SeqModel& model, std::span<const TokenId> keyword,
                              std::span<const TokenId> context, std::size_t keyword_cols = 0,
                              std::size_t context_cols = 0);

EncoderStates encode(const Seq2SeqModel& model, const Grid<TokenId>& keyword_ids, const Grid<TokenId>& context_ids,
                     std::span<const std::size_t> keyword_lengths, std::span<const std::size_t> context_lengths);

/// The last unmasked state (the fixed semantic vector C).
Vec fixed_context(std::span<const Vec> states, std::span<const std::uint8_t> mask = {});

/// Teacher-forced decoding: step t consumes decoder_in[t] whatever the model
/// predicted. Returns B×T×V logits with T = decoder_in.cols.
Tensor decode_train(const Seq2SeqModel& model, const EncoderStates& encoded, const Grid<TokenId>& decoder_in);

/// Greedy decoding from START; stops at END (not returned) or max_len.
/// PAD, UNK and START are never emitted; ties go to the lowest id.
std::vector<TokenId> decode_greedy(const Seq2SeqModel& model, const EncodedExample& encoded, std::size_t max_len);

/// log p(target_t | ...) for each position of `targets` (which should end
/// with END), teacher-forced from START.
std::vector<double> teacher_forced_log_probs(const Seq2SeqModel& model, std::span<const TokenId> keyword,
                                             std::span<const TokenId> context, std::span<const TokenId> targets);

/// Recorded forward pass of the masked sequence loss over a batch.
class LossGraph {
public:
    double loss() const { return loss_; }
    std::size_t token_count() const { return count_; }

    /// Accumulates exact gradients of loss() into every model parameter.
    void backward(Seq2SeqModel& model) const;

    struct Tape;
    LossGraph();
    ~LossGraph();
    LossGraph(LossGraph&&) noexcept;
    LossGraph& operator=(LossGraph&&) noexcept;

private:
    friend LossGraph record_loss(const Seq2SeqModel& model, const Batch& batch);
    std::vector<Tape> tapes_;
    double loss_ = 0.0;
    std::size_t count_ = 0;
};

/// Runs encode → teacher-forced decode → sequence_loss, keeping what
/// backward needs. Only valid (unpadded) positions are computed.
LossGraph record_loss(const Seq2SeqModel& model, const Batch& batch);

/// Same value as record_loss(...).loss() without recording.
double batch_loss(const Seq2SeqModel& model, const Batch& batch);

}  // namespace versecraft
