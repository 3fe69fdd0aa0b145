#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "versecraft/checkpoint.hpp"
#include "versecraft/corpus.hpp"
#include "versecraft/embedding.hpp"
#include "versecraft/keywords.hpp"
#include "versecraft/seq2seq.hpp"

namespace versecraft {

/// Keyword selection over lexicon units. Lexicon entries are ranked ahead
/// of single characters; otherwise the extractor's order is kept.
class KeywordPlanner {
public:
    KeywordPlanner(KeywordExtractor extractor, Lexicon lexicon);

    /// Candidate units of free text: CJK, latin and digit characters only,
    /// segmented with the lexicon.
    TokenSeq units(const TokenSeq& text) const;

    std::vector<TokenSeq> ranked(const TokenSeq& text) const;

    /// Keyword labelling one training line; empty when nothing qualifies.
    TokenSeq line_keyword(const TokenSeq& line) const;

    const KeywordExtractor& extractor() const { return extractor_; }
    const Lexicon& lexicon() const { return lexicon_; }

private:
    KeywordExtractor extractor_;
    Lexicon lexicon_;
};

/// TF-IDF over the corpus lines, each line segmented into lexicon units.
TfidfModel fit_line_tfidf(const std::vector<Poem>& poems, const Lexicon& lexicon);

struct PreparedCorpus {
    std::vector<Poem> poems;
    Vocab vocab;
    TfidfModel tfidf;
    std::vector<TrainingPair> pairs;
    std::size_t raw_poems = 0;
    std::size_t rejected_poems = 0;  // wrong or mixed form
    std::size_t lines = 0;
    std::size_t skipped_lines = 0;   // no keyword candidate

    /// Counts as "key=value" lines.
    std::string summary() const;
};

/// Form filtering, vocabulary, line TF-IDF and keyword-labelled pairs.
/// Throws InvalidArgument when no poem has the requested form.
PreparedCorpus prepare_corpus(const std::vector<RawPoem>& raw, PoemForm form, std::size_t min_count,
                              const Lexicon& lexicon, const StopWords& stop_words);

struct GenerationPlan {
    std::vector<TokenSeq> keywords;
    PoemForm form = PoemForm::Five;
    std::size_t n_lines = 0;
};

/// Extracted keywords, topped up with embedding neighbours of the chosen
/// keywords in round-robin order. Throws InvalidArgument when the text has
/// no candidates or the plan cannot be filled.
GenerationPlan plan_keywords(const TokenSeq& user_text, std::size_t n_lines, PoemForm form,
                             const KeywordPlanner& planner, const EmbeddingMatrix* embeddings);

struct GeneratedPoem {
    std::vector<TokenSeq> lines;
    std::size_t empty_lines = 0;
    std::size_t off_length_lines = 0;  // non-empty lines whose length differs from the form
};

/// Generates line i from keyword i and the preamble of lines 0..i-1.
GeneratedPoem generate_poem(const Seq2SeqModel& model, const Vocab& vocab, const GenerationPlan& plan);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double clip_norm = 5.0;
    std::uint64_t seed = 42;
    DecoderMode mode = DecoderMode::Attention;
    std::size_t checkpoint_interval = 0;  // epochs; 0 disables periodic checkpoints
    std::size_t embed_dim = 300;          // ignored when embeddings are supplied
    std::size_t hidden = 128;
    bool zero_output = false;             // output layer starts at zero (uniform logits)
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double perplexity = 0.0;
};

std::string format_loss_log(const std::vector<EpochStats>& log);

struct TrainResult {
    Seq2SeqModel model;
    TrainingState state;
    std::vector<EpochStats> log;
};

/// Called after every `checkpoint_interval` epochs with the current state.
using CheckpointFn = std::function<void(const Seq2SeqModel&, const TrainingState&)>;

/// Fresh model initialised from the seed, with embedding rows copied from
/// `embeddings` where tokens overlap.
Seq2SeqModel initial_model(const Vocab& vocab, const EmbeddingMatrix* embeddings, const TrainConfig& config);

TrainResult train_generator(const std::vector<TrainingPair>& pairs, const Vocab& vocab,
                            const EmbeddingMatrix* embeddings, const TrainConfig& config,
                            std::optional<LoadedGenerator> resume = std::nullopt, const CheckpointFn& on_checkpoint = {});

}  // namespace versecraft
