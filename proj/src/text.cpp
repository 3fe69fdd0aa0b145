#include "versecraft/text.hpp"

#include <fstream>

#include "versecraft/error.hpp"

namespace versecraft {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at text[i]; advances i.
char32_t decode_one(std::string_view text, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + static_cast<std::size_t>(extra) >= text.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += extra + 1;
    return cp;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) out.push_back(decode_one(text, i));
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

TokenSeq split_chars(std::string_view text) {
    TokenSeq out;
    for (char32_t cp : decode_utf8(text)) out.push_back(encode_utf8(cp));
    return out;
}

std::string join(const TokenSeq& tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0) out += sep;
        out += tokens[i];
    }
    return out;
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
           (cp >= 0x20000 && cp <= 0x2EBEF) ||  // extensions B-F
           (cp >= 0xF900 && cp <= 0xFAFF);      // compatibility ideographs
}

bool is_latin_or_digit(char32_t cp) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

bool is_line_break_punct(char32_t cp) {
    switch (cp) {
        case U'，':
        case U'。':
        case U'？':
        case U'！':
        case U'、':
        case U'；':
            return true;
        default:
            return false;
    }
}

StopWords StopWords::builtin() {
    static const char* const kWords[] = {"的", "了", "是", "在", "我", "有", "和", "就", "不", "人",
                                         "都", "一", "上", "也", "很", "到", "说", "要", "去", "你"};
    std::set<Token> words;
    for (const char* w : kWords) words.insert(w);
    return StopWords(std::move(words));
}

StopWords StopWords::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open stop-word file: " + path.string());
    std::set<Token> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return StopWords(std::move(words));
}

Lexicon::Lexicon(const std::vector<std::string>& entries) {
    for (const auto& e : entries) {
        const auto n = split_chars(e).size();
        if (n == 0) continue;
        entries_.insert(e);
        max_len_ = std::max(max_len_, n);
    }
}

Lexicon Lexicon::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open lexicon file: " + path.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) entries.push_back(line);
    }
    return Lexicon(entries);
}

std::vector<std::string> Lexicon::segment(const TokenSeq& chars) const {
    std::vector<std::string> units;
    std::size_t i = 0;
    while (i < chars.size()) {
        std::size_t take = 1;
        for (std::size_t len = std::min(max_len_, chars.size() - i); len >= 2; --len) {
            std::string candidate;
            for (std::size_t k = 0; k < len; ++k) candidate += chars[i + k];
            if (entries_.count(candidate)) {
                take = len;
                break;
            }
        }
        std::string unit;
        for (std::size_t k = 0; k < take; ++k) unit += chars[i + k];
        units.push_back(std::move(unit));
        i += take;
    }
    return units;
}

}  // namespace versecraft
