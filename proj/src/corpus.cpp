#include "versecraft/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "versecraft/error.hpp"

namespace versecraft {

namespace {

constexpr std::string_view kSpecialLiterals[] = {"<PAD>", "<UNK>", "<START>", "<END>"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace

std::string_view to_string(PoemForm form) { return form == PoemForm::Five ? "five" : "seven"; }

PoemForm parse_form(std::string_view name) {
    if (name == "five" || name == "5") return PoemForm::Five;
    if (name == "seven" || name == "7") return PoemForm::Seven;
    throw InvalidArgument("unknown poem form '" + std::string(name) + "' (expected five|seven)");
}

std::vector<TokenSeq> split_lines(std::string_view paragraph) {
    std::vector<TokenSeq> lines;
    TokenSeq current;
    for (char32_t cp : decode_utf8(paragraph)) {
        if (is_line_break_punct(cp)) {
            if (!current.empty()) lines.push_back(std::move(current));
            current.clear();
            continue;
        }
        // Whitespace and other stray punctuation never belong to a line.
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'　') continue;
        current.push_back(encode_utf8(cp));
    }
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
}

CorpusLoad parse_corpus(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("malformed corpus JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_array()) throw FormatError("corpus JSON must be an array of poem objects");

    CorpusLoad result;
    for (const auto& record : doc) {
        if (!record.is_object() || !record.contains("paragraphs") || !record["paragraphs"].is_array()) {
            ++result.skipped_records;
            continue;
        }
        RawPoem poem;
        if (record.contains("title") && record["title"].is_string()) poem.title = record["title"];
        if (record.contains("author") && record["author"].is_string()) poem.author = record["author"];
        for (const auto& para : record["paragraphs"]) {
            if (!para.is_string()) continue;
            for (auto& line : split_lines(para.get<std::string>())) poem.lines.push_back(std::move(line));
        }
        if (!poem.lines.empty()) result.poems.push_back(std::move(poem));
    }
    return result;
}

CorpusLoad load_corpus(const std::filesystem::path& path) {
    try {
        return parse_corpus(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

FormClass classify_form(const RawPoem& poem) {
    if (poem.lines.empty()) return FormClass::Rejected;
    const std::size_t n = poem.lines.front().size();
    for (const auto& line : poem.lines) {
        if (line.size() != n) return FormClass::Rejected;
    }
    if (n == 5) return FormClass::Five;
    if (n == 7) return FormClass::Seven;
    return FormClass::Rejected;
}

std::vector<Poem> select_form(const std::vector<RawPoem>& poems, PoemForm form) {
    const FormClass wanted = form == PoemForm::Five ? FormClass::Five : FormClass::Seven;
    std::vector<Poem> out;
    for (const auto& raw : poems) {
        if (classify_form(raw) != wanted) continue;
        out.push_back(Poem{raw.title, raw.author, raw.lines, form});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() {
    for (auto literal : kSpecialLiterals) {
        word2id_.emplace(std::string(literal), static_cast<TokenId>(id2word_.size()));
        id2word_.emplace_back(literal);
    }
}

TokenId Vocab::add(const Token& token) {
    if (auto it = word2id_.find(token); it != word2id_.end()) {
        if (is_special(it->second)) throw InvalidArgument("token collides with special literal: " + token);
        return it->second;
    }
    if (token.empty() || token.find('\n') != std::string::npos) {
        throw InvalidArgument("vocab tokens must be non-empty and newline-free");
    }
    const auto id = static_cast<TokenId>(id2word_.size());
    id2word_.push_back(token);
    word2id_.emplace(token, id);
    return id;
}

std::optional<TokenId> Vocab::find(const Token& token) const {
    if (auto it = word2id_.find(token); it != word2id_.end()) return it->second;
    return std::nullopt;
}

TokenId Vocab::id_or_unk(const Token& token) const {
    auto id = find(token);
    // Corpus text never legitimately spells a special literal.
    if (!id || is_special(*id)) return kUnk;
    return *id;
}

std::vector<TokenId> Vocab::encode(const TokenSeq& tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id_or_unk(t));
    return ids;
}

TokenSeq Vocab::decode(std::span<const TokenId> ids) const {
    TokenSeq out;
    out.reserve(ids.size());
    for (TokenId id : ids) out.push_back(token(id));
    return out;
}

std::string Vocab::serialize() const {
    std::string out;
    for (const auto& t : id2word_) {
        out += t;
        out += '\n';
    }
    return out;
}

Vocab Vocab::deserialize(std::string_view text) {
    Vocab v;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no < kNumSpecials) {
            if (line != kSpecialLiterals[line_no]) {
                throw FormatError("vocab line " + std::to_string(line_no + 1) + ": expected " +
                                  std::string(kSpecialLiterals[line_no]));
            }
        } else {
            if (line.empty()) throw FormatError("vocab line " + std::to_string(line_no + 1) + ": empty token");
            if (v.find(line)) throw FormatError("vocab line " + std::to_string(line_no + 1) + ": duplicate token");
            v.add(line);
        }
        ++line_no;
    }
    if (line_no < kNumSpecials) throw FormatError("vocab file is missing special tokens");
    return v;
}

void Vocab::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Vocab Vocab::load(const std::filesystem::path& path) {
    try {
        return deserialize(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string Vocab::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Vocab build_vocab(const std::vector<Poem>& poems, std::size_t min_count) {
    if (poems.empty()) throw InvalidArgument("build_vocab: empty poem list");
    if (min_count == 0) throw InvalidArgument("build_vocab: min_count must be positive");
    std::map<Token, std::size_t> counts;  // ordered by UTF-8 bytes == code point order
    for (const auto& poem : poems) {
        for (const auto& line : poem.lines) {
            for (const auto& ch : line) ++counts[ch];
        }
    }
    std::vector<std::pair<Token, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab vocab;
    for (const auto& [tok, n] : ranked) {
        if (n >= min_count) vocab.add(tok);
    }
    return vocab;
}

// ---------------------------------------------------------------------------
// Training pairs

PairBuild build_training_pairs(const Poem& poem, const KeywordFn& keyword_of_line) {
    PairBuild result;
    TokenSeq preceding;
    for (const auto& line : poem.lines) {
        TokenSeq keyword = keyword_of_line(line);
        if (keyword.empty()) {
            ++result.skipped_lines;
        } else {
            result.pairs.push_back(TrainingPair{std::move(keyword), preceding, line});
        }
        if (!preceding.empty()) preceding.emplace_back(kLineSeparator);
        preceding.insert(preceding.end(), line.begin(), line.end());
    }
    return result;
}

std::string format_pair(const TrainingPair& pair) {
    auto field = [](const TokenSeq& tokens) {
        std::string s = join(tokens);
        if (s.find('|') != std::string::npos || s.find('\n') != std::string::npos) {
            throw InvalidArgument("pair tokens must not contain '|' or newline");
        }
        return s;
    };
    return field(pair.keyword) + "|" + field(pair.preceding) + "|" + field(pair.target);
}

TrainingPair parse_pair(std::string_view line, std::size_t line_number) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t bar = line.find('|', start);
        fields.push_back(line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    if (fields.size() != 3) {
        throw FormatError("pair file line " + std::to_string(line_number) + ": expected 3 fields, got " +
                          std::to_string(fields.size()));
    }
    TrainingPair pair{split_chars(fields[0]), split_chars(fields[1]), split_chars(fields[2])};
    if (pair.keyword.empty() || pair.target.empty()) {
        throw FormatError("pair file line " + std::to_string(line_number) + ": empty keyword or target");
    }
    return pair;
}

void write_pair_file(const std::vector<TrainingPair>& pairs, const std::filesystem::path& path) {
    std::string out;
    for (const auto& p : pairs) {
        out += format_pair(p);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<TrainingPair> read_pair_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<TrainingPair> pairs;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        pairs.push_back(parse_pair(line, line_no));
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Batching

Batch pad_batch(std::span<const TrainingPair> pairs, const Vocab& vocab) {
    if (pairs.empty()) throw InvalidArgument("pad_batch: empty pair list");
    const std::size_t n = pairs.size();
    Batch b;
    std::vector<std::vector<TokenId>> kw(n), ctx(n), tgt(n);
    std::size_t lk = 0, lc = 0, lt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        kw[i] = vocab.encode(pairs[i].keyword);
        ctx[i] = pairs[i].preceding.empty() ? std::vector<TokenId>{Vocab::kStart} : vocab.encode(pairs[i].preceding);
        tgt[i] = vocab.encode(pairs[i].target);
        if (kw[i].empty() || tgt[i].empty()) throw InvalidArgument("pad_batch: empty keyword or target");
        lk = std::max(lk, kw[i].size());
        lc = std::max(lc, ctx[i].size());
        lt = std::max(lt, tgt[i].size());
    }
    b.keyword_ids = Grid<TokenId>(n, lk, Vocab::kPad);
    b.context_ids = Grid<TokenId>(n, lc, Vocab::kPad);
    b.decoder_in_ids = Grid<TokenId>(n, lt + 1, Vocab::kPad);
    b.decoder_target_ids = Grid<TokenId>(n, lt + 1, Vocab::kPad);
    b.loss_mask = Grid<std::uint8_t>(n, lt + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(kw[i].begin(), kw[i].end(), &b.keyword_ids(i, 0));
        std::copy(ctx[i].begin(), ctx[i].end(), &b.context_ids(i, 0));
        b.decoder_in_ids(i, 0) = Vocab::kStart;
        for (std::size_t t = 0; t < tgt[i].size(); ++t) {
            b.decoder_in_ids(i, t + 1) = tgt[i][t];
            b.decoder_target_ids(i, t) = tgt[i][t];
            b.loss_mask(i, t) = 1;
        }
        b.decoder_target_ids(i, tgt[i].size()) = Vocab::kEnd;
        b.loss_mask(i, tgt[i].size()) = 1;
        b.keyword_lengths.push_back(kw[i].size());
        b.context_lengths.push_back(ctx[i].size());
        b.decoder_lengths.push_back(tgt[i].size() + 1);
    }
    return b;
}

namespace {

template <class T>
Grid<T> widen(const Grid<T>& g, std::size_t extra, T fill) {
    Grid<T> out(g.rows, g.cols + extra, fill);
    for (std::size_t r = 0; r < g.rows; ++r) {
        std::copy(g.row(r).begin(), g.row(r).end(), &out(r, 0));
    }
    return out;
}

}  // namespace

Batch extend_padding(const Batch& batch, std::size_t extra) {
    Batch out = batch;
    out.keyword_ids = widen(batch.keyword_ids, extra, Vocab::kPad);
    out.context_ids = widen(batch.context_ids, extra, Vocab::kPad);
    out.decoder_in_ids = widen(batch.decoder_in_ids, extra, Vocab::kPad);
    out.decoder_target_ids = widen(batch.decoder_target_ids, extra, Vocab::kPad);
    out.loss_mask = widen(batch.loss_mask, extra, std::uint8_t{0});
    return out;
}

}  // namespace versecraft
