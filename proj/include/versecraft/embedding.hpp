#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "versecraft/corpus.hpp"
#include "versecraft/rng.hpp"
#include "versecraft/tensor.hpp"

namespace versecraft {

struct SkipGramConfig {
    std::size_t dim = 300;
    std::size_t window = 2;
    std::size_t negatives = 5;
    double learning_rate = 0.025;  // decays linearly to zero over training
    std::size_t epochs = 15;
    std::uint64_t seed = 42;
};

/// Input vectors (one row per vocab id) plus the training-only context
/// vectors. Rows are appended by ensure_word and never rewritten by it.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;

    /// Input rows uniform in [-0.5/D, 0.5/D], context rows zero.
    EmbeddingMatrix(Vocab vocab, std::size_t dim, std::uint64_t seed);

    const Vocab& vocab() const { return vocab_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vocab_.size(); }

    std::span<const double> row(TokenId id) const;
    std::span<double> row(TokenId id);
    std::span<const double> context_row(TokenId id) const;
    std::span<double> context_row(TokenId id);

    /// Existing row for a known word; otherwise appends the word with a fresh
    /// random row and returns that.
    std::span<const double> ensure_word(const Token& word);

    /// Mean of the rows of the known tokens in `tokens`; nullopt if none known.
    std::optional<Vec> mean_vector(const TokenSeq& tokens) const;

    /// The k most cosine-similar non-special tokens, excluding `word`.
    /// Ties go to the lower id. Throws if `word` is unknown.
    std::vector<std::pair<Token, double>> nearest(const Token& word, std::size_t k) const;

    /// Same ranking against an arbitrary query vector; ids in `exclude` are
    /// skipped.
    std::vector<std::pair<Token, double>> nearest_to_vector(std::span<const double> query, std::size_t k,
                                                            std::span<const TokenId> exclude = {}) const;

    /// "versecraft-embed v1 <V> <D>" then "token v1 … vD" per row.
    std::string serialize() const;
    static EmbeddingMatrix deserialize(std::string_view text, std::uint64_t seed = 42);
    void save(const std::filesystem::path& path) const;
    static EmbeddingMatrix load(const std::filesystem::path& path, std::uint64_t seed = 42);

    bool operator==(const EmbeddingMatrix& other) const {
        return vocab_ == other.vocab_ && dim_ == other.dim_ && input_ == other.input_;
    }

private:
    Vocab vocab_;
    std::size_t dim_ = 0;
    std::vector<double> input_;
    std::vector<double> context_;
    Rng rng_{0};
};

double cosine(std::span<const double> a, std::span<const double> b);

/// One positive (center, context) pair against sampled negatives.
struct SkipGramSample {
    TokenId center = 0;
    TokenId context = 0;
    std::vector<TokenId> negatives;
};

/// -log σ(u_o·v_c) - Σ log σ(-u_n·v_c).
double skipgram_loss(const EmbeddingMatrix& m, const SkipGramSample& s);

struct SkipGramGrad {
    Vec center;                                     // d/d v_c
    std::vector<std::pair<TokenId, Vec>> outputs;  // d/d u_o then d/d u_n, one entry per occurrence
};

SkipGramGrad skipgram_gradient(const EmbeddingMatrix& m, const SkipGramSample& s);

/// SGD step on one sample; returns the loss before the update.
double skipgram_step(EmbeddingMatrix& m, const SkipGramSample& s, double lr);

/// Draws ids from counts^0.75.
class UnigramSampler {
public:
    explicit UnigramSampler(const std::vector<double>& counts);
    TokenId sample(Rng& rng) const;

private:
    std::vector<double> cumulative_;
};

/// Trains over lines of token ids; context windows never cross a line.
/// `epoch_loss`, when given, receives the mean pre-update sample loss of
/// each epoch.
EmbeddingMatrix train_skipgram(const std::vector<std::vector<TokenId>>& lines, const Vocab& vocab,
                               const SkipGramConfig& config, std::vector<double>* epoch_loss = nullptr);

}  // namespace versecraft
