#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "versecraft/text.hpp"

namespace versecraft {

using TokenId = std::int32_t;

enum class PoemForm { Five, Seven };
enum class FormClass { Five, Seven, Rejected };

/// Characters per line for a form.
constexpr std::size_t line_length(PoemForm form) { return form == PoemForm::Five ? 5 : 7; }

std::string_view to_string(PoemForm form);
PoemForm parse_form(std::string_view name);

/// A poem as read from the corpus, before form filtering.
struct RawPoem {
    std::string title;
    std::string author;
    std::vector<TokenSeq> lines;
};

/// A poem whose every line has exactly line_length(form) characters.
struct Poem {
    std::string title;
    std::string author;
    std::vector<TokenSeq> lines;
    PoemForm form = PoemForm::Five;
};

struct CorpusLoad {
    std::vector<RawPoem> poems;
    std::size_t skipped_records = 0;  // objects without a usable "paragraphs" array
};

/// Reads a chinese-poetry JSON file: an array of {title, author, paragraphs}.
/// Throws FormatError (with byte offset) on malformed JSON.
CorpusLoad load_corpus(const std::filesystem::path& path);
CorpusLoad parse_corpus(std::string_view json_text);

/// Splits one paragraph into punctuation-free lines; empty pieces dropped.
std::vector<TokenSeq> split_lines(std::string_view paragraph);

FormClass classify_form(const RawPoem& poem);

/// Keeps the poems of the requested form.
std::vector<Poem> select_form(const std::vector<RawPoem>& poems, PoemForm form);

class Vocab {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kUnk = 1;
    static constexpr TokenId kStart = 2;
    static constexpr TokenId kEnd = 3;
    static constexpr std::size_t kNumSpecials = 4;

    /// Vocabulary holding only the four special tokens.
    Vocab();

    /// Appends a token if absent; returns its id. Special literals are rejected.
    TokenId add(const Token& token);

    std::optional<TokenId> find(const Token& token) const;
    TokenId id_or_unk(const Token& token) const;
    const Token& token(TokenId id) const { return id2word_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return id2word_.size(); }
    const std::vector<Token>& tokens() const { return id2word_; }

    static bool is_special(TokenId id) { return id >= 0 && id < static_cast<TokenId>(kNumSpecials); }

    std::vector<TokenId> encode(const TokenSeq& tokens) const;
    TokenSeq decode(std::span<const TokenId> ids) const;

    /// Vocab file contents: one token per line, line number = id.
    std::string serialize() const;
    static Vocab deserialize(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

    /// FNV-1a 64 of the serialized form, as 16 hex digits.
    std::string hash() const;

    bool operator==(const Vocab& other) const { return id2word_ == other.id2word_; }

private:
    std::vector<Token> id2word_;
    std::unordered_map<Token, TokenId> word2id_;
};

/// Characters with count >= min_count, by descending count then code point.
Vocab build_vocab(const std::vector<Poem>& poems, std::size_t min_count);

struct TrainingPair {
    TokenSeq keyword;
    TokenSeq preceding;  // earlier lines joined by kLineSeparator; may be empty
    TokenSeq target;

    bool operator==(const TrainingPair&) const = default;
};

using KeywordFn = std::function<TokenSeq(const TokenSeq& line)>;

struct PairBuild {
    std::vector<TrainingPair> pairs;
    std::size_t skipped_lines = 0;  // lines whose keyword came back empty
};

PairBuild build_training_pairs(const Poem& poem, const KeywordFn& keyword_of_line);

/// One record per line: keyword|preceding|target.
std::string format_pair(const TrainingPair& pair);
TrainingPair parse_pair(std::string_view line, std::size_t line_number);
void write_pair_file(const std::vector<TrainingPair>& pairs, const std::filesystem::path& path);
std::vector<TrainingPair> read_pair_file(const std::filesystem::path& path);

/// Dense row-major matrix of small values.
template <class T>
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct Batch {
    Grid<TokenId> keyword_ids;
    Grid<TokenId> context_ids;
    Grid<TokenId> decoder_in_ids;      // START + target, PAD-filled
    Grid<TokenId> decoder_target_ids;  // target + END, PAD-filled
    Grid<std::uint8_t> loss_mask;      // 1 exactly where decoder_target_ids != PAD
    std::vector<std::size_t> keyword_lengths;
    std::vector<std::size_t> context_lengths;
    std::vector<std::size_t> decoder_lengths;  // target length + 1

    std::size_t size() const { return keyword_lengths.size(); }
};

/// Pads every field to its per-batch maximum. An empty preamble is encoded as
/// a single START token so the context encoder always has one step.
Batch pad_batch(std::span<const TrainingPair> pairs, const Vocab& vocab);

/// Returns a copy with `extra` PAD columns appended to every field.
Batch extend_padding(const Batch& batch, std::size_t extra);

}  // namespace versecraft
