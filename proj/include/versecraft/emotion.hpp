#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "versecraft/corpus.hpp"
#include "versecraft/embedding.hpp"
#include "versecraft/lstm.hpp"
#include "versecraft/optim.hpp"
#include "versecraft/text.hpp"

namespace versecraft {

inline constexpr std::size_t kNumEmotions = 6;
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionLabels{"others",  "likes", "sadness",
                                                                           "disgust", "anger", "happiness"};

struct EmotionExample {
    TokenSeq text;
    int label = 0;

    bool operator==(const EmotionExample&) const = default;
};

/// Keeps CJK, latin and digit characters, drops stop words, one token per
/// character.
TokenSeq clean_text(std::string_view raw, const StopWords& stop_words);

struct EmotionData {
    std::vector<EmotionExample> examples;
    std::size_t skipped = 0;  // lines that cleaned to nothing
};

/// "label<TAB>text" per line; blank lines ignored. Bad labels or missing
/// tabs are FormatErrors naming the line.
EmotionData parse_emotion_tsv(std::string_view text, const StopWords& stop_words);
EmotionData read_emotion_tsv(const std::filesystem::path& path, const StopWords& stop_words);
std::string format_emotion_tsv(const std::vector<EmotionExample>& examples);

/// Nearest-rank 95th percentile of text lengths, clamped to [4, 64].
std::size_t fit_length(const std::vector<EmotionExample>& examples);

struct DatasetSplit {
    std::vector<EmotionExample> train;
    std::vector<EmotionExample> test;
};

/// Label-stratified 80/20 split: a fifth of the data goes to test, shared
/// out between labels by largest remainder.
DatasetSplit split_dataset(const std::vector<EmotionExample>& examples, std::uint64_t seed);

/// Embedding, unidirectional LSTM over the non-PAD prefix, fully connected
/// layer to six logits.
class EmotionModel {
public:
    EmotionModel(Vocab vocab, std::size_t embed_dim, std::size_t hidden, std::size_t length);

    void init(std::uint64_t seed, const EmbeddingMatrix* pretrained = nullptr);

    const Vocab& vocab() const { return vocab_; }
    std::size_t length() const { return length_; }
    std::size_t embed_dim() const { return embedding.value.dim(1); }
    std::size_t hidden() const { return lstm.hidden_dim(); }

    Param embedding;
    LstmCell lstm;
    Param fc_w;  // 6 × H
    Param fc_b;

    ParamList params();
    std::vector<const Param*> params() const;

    /// Ids truncated to length(); unknown characters become UNK.
    std::vector<TokenId> encode(const TokenSeq& text) const;

    Vec logits(std::span<const TokenId> ids) const;

private:
    Vocab vocab_;
    std::size_t length_;
};

/// Mean cross-entropy over examples; gradients accumulate into the model
/// when `backward` is set.
double emotion_loss(EmotionModel& model, const std::vector<EmotionExample>& batch, bool backward);

struct EmotionTrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 8;
    double learning_rate = 0.01;
    double clip_norm = 5.0;
    std::uint64_t seed = 42;
    std::size_t embed_dim = 300;  // ignored when pretrained vectors are supplied
    std::size_t hidden = 64;
    std::size_t length = 0;  // 0 means fit_length on the training set
};

struct EmotionTrainResult {
    EmotionModel model;
    std::vector<double> epoch_loss;
};

/// Vocabulary from the training texts, then Adam on the cross-entropy.
EmotionTrainResult train_emotion(const std::vector<EmotionExample>& train, const EmotionTrainConfig& config,
                                 const EmbeddingMatrix* pretrained = nullptr);

struct Classification {
    int label = 0;
    std::array<double, kNumEmotions> probs{};
};

Classification classify_tokens(const EmotionModel& model, const TokenSeq& tokens);
/// Throws InvalidArgument when the text is empty after cleaning.
Classification classify(const EmotionModel& model, std::string_view text, const StopWords& stop_words);

struct EmotionReport {
    double accuracy = 0.0;
    std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions> confusion{};  // [true][predicted]

    /// {"accuracy":…,"confusion":[[…],…]}
    std::string json() const;
};

EmotionReport evaluate(const EmotionModel& model, const std::vector<EmotionExample>& test);

/// Checkpoint at `path`, vocab file at `path` + ".vocab".
void save_emotion(const std::filesystem::path& path, const EmotionModel& model);
EmotionModel load_emotion(const std::filesystem::path& path);

}  // namespace versecraft
