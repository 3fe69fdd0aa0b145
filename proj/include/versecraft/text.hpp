#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace versecraft {

using Token = std::string;
using TokenSeq = std::vector<Token>;

/// Splits UTF-8 text into one string per code point. Invalid bytes become
/// U+FFFD so downstream code never has to handle broken sequences.
TokenSeq split_chars(std::string_view text);

/// Decodes UTF-8 into code points (invalid bytes map to U+FFFD).
std::vector<char32_t> decode_utf8(std::string_view text);
std::string encode_utf8(char32_t cp);

std::string join(const TokenSeq& tokens, std::string_view sep = {});

bool is_cjk(char32_t cp);
bool is_latin_or_digit(char32_t cp);

/// Line-splitting punctuation for poem paragraphs: ，。？！、；
bool is_line_break_punct(char32_t cp);

/// Separator token placed between joined preamble lines.
inline constexpr std::string_view kLineSeparator = "，";

class StopWords {
public:
    /// Built-in list of common Chinese function words.
    static StopWords builtin();
    static StopWords from_file(const std::filesystem::path& path);

    StopWords() = default;
    explicit StopWords(std::set<Token> words) : words_(std::move(words)) {}

    bool contains(const Token& t) const { return words_.count(t) != 0; }
    bool empty() const { return words_.empty(); }
    const std::set<Token>& words() const { return words_; }

private:
    std::set<Token> words_;
};

/// Multi-character keyword lexicon. Segmentation is greedy longest match;
/// characters not covered by an entry become single-character units.
class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(const std::vector<std::string>& entries);
    static Lexicon from_file(const std::filesystem::path& path);

    bool empty() const { return entries_.empty(); }
    bool contains(const std::string& unit) const { return entries_.count(unit) != 0; }
    const std::set<std::string>& entries() const { return entries_; }

    std::vector<std::string> segment(const TokenSeq& chars) const;

private:
    std::set<std::string> entries_;
    std::size_t max_len_ = 0;  // in characters
};

}  // namespace versecraft
