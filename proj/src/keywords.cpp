#include "versecraft/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "versecraft/error.hpp"
#include "versecraft/numfmt.hpp"

namespace versecraft {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool is_special_literal(const Token& t) {
    return t == "<PAD>" || t == "<UNK>" || t == "<START>" || t == "<END>";
}

// Distinct tokens in first-occurrence order.
std::vector<Token> distinct_in_order(const TokenSeq& doc) {
    std::vector<Token> out;
    std::set<Token> seen;
    for (const auto& t : doc) {
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

// Stable sort by descending score; equal scores keep the input order.
std::vector<Token> rank_by(const std::vector<Token>& candidates, const std::vector<double>& scores) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<Token> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back(candidates[i]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TF-IDF

TfidfModel::TfidfModel(std::size_t corpus_size, std::map<Token, std::size_t> doc_freq)
    : corpus_size_(corpus_size), doc_freq_(std::move(doc_freq)) {
    if (corpus_size_ == 0) throw InvalidArgument("TfidfModel: corpus size must be positive");
    for (const auto& [tok, b] : doc_freq_) {
        if (b < 1 || b > corpus_size_) throw InvalidArgument("TfidfModel: doc frequency out of range for " + tok);
    }
}

std::size_t TfidfModel::doc_freq(const Token& word) const {
    auto it = doc_freq_.find(word);
    return it == doc_freq_.end() ? 0 : it->second;
}

double TfidfModel::idf(const Token& word) const {
    std::size_t b = doc_freq(word);
    if (b == 0) b = 1;
    return std::log2(static_cast<double>(corpus_size_) / static_cast<double>(b));
}

std::string TfidfModel::serialize() const {
    std::string out = "C=" + std::to_string(corpus_size_) + "\n";
    for (const auto& [tok, b] : doc_freq_) {
        out += tok;
        out += '\t';
        out += std::to_string(b);
        out += '\n';
    }
    return out;
}

TfidfModel TfidfModel::deserialize(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("C=", 0) != 0) throw FormatError("tfidf model: missing C= header");
    const auto c = parse_int<std::size_t>(std::string_view(line).substr(2));
    std::map<Token, std::size_t> df;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError("tfidf model line " + std::to_string(line_no) + ": expected token<TAB>count");
        }
        df[line.substr(0, tab)] = parse_int<std::size_t>(std::string_view(line).substr(tab + 1));
    }
    try {
        return TfidfModel(c, std::move(df));
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("tfidf model: ") + e.what());
    }
}

void TfidfModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << serialize();
}

TfidfModel TfidfModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

TfidfModel fit_tfidf(const std::vector<TokenSeq>& documents) {
    if (documents.empty()) throw InvalidArgument("fit_tfidf: no documents");
    std::map<Token, std::size_t> df;
    for (const auto& doc : documents) {
        for (const auto& t : std::set<Token>(doc.begin(), doc.end())) ++df[t];
    }
    return TfidfModel(documents.size(), std::move(df));
}

double tfidf(const TfidfModel& model, const TokenSeq& doc, const Token& word) {
    if (doc.empty()) throw InvalidArgument("tfidf: empty document");
    const auto a = static_cast<double>(std::count(doc.begin(), doc.end(), word));
    const double tf = a / static_cast<double>(doc.size());
    return tf * model.idf(word);
}

std::vector<Token> extract_tfidf(const TfidfModel& model, const TokenSeq& doc, std::size_t k) {
    if (k == 0) throw InvalidArgument("extract_tfidf: k must be >= 1");
    if (doc.empty()) return {};
    auto candidates = distinct_in_order(doc);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& t : candidates) scores.push_back(tfidf(model, doc, t));
    auto ranked = rank_by(candidates, scores);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

// ---------------------------------------------------------------------------
// TextRank

double CoocGraph::out_weight(std::size_t i) const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += weight(i, k);
    return s;
}

std::size_t CoocGraph::index_of(const Token& t) const {
    auto it = std::find(nodes.begin(), nodes.end(), t);
    return it == nodes.end() ? npos : static_cast<std::size_t>(it - nodes.begin());
}

void CoocGraph::add_node(const Token& t) {
    const std::size_t n = nodes.size();
    std::vector<double> grown((n + 1) * (n + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) grown[i * (n + 1) + j] = weights[i * n + j];
    }
    nodes.push_back(t);
    weights = std::move(grown);
}

CoocGraph make_graph(std::vector<Token> nodes, std::vector<double> weights) {
    const std::size_t n = nodes.size();
    if (weights.size() != n * n) throw InvalidArgument("make_graph: weight matrix must be n×n");
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i * n + i] != 0.0) throw InvalidArgument("make_graph: self-edges are not allowed");
        for (std::size_t j = 0; j < n; ++j) {
            if (weights[i * n + j] != weights[j * n + i] || weights[i * n + j] < 0.0) {
                throw InvalidArgument("make_graph: weights must be symmetric and non-negative");
            }
        }
    }
    return CoocGraph{std::move(nodes), std::move(weights)};
}

CoocGraph build_cooc_graph(const TokenSeq& doc, std::size_t window, const TokenFilter& excluded) {
    if (window == 0) throw InvalidArgument("build_cooc_graph: window must be >= 1");
    CoocGraph g;
    std::vector<std::size_t> node_at(doc.size(), npos);
    for (std::size_t p = 0; p < doc.size(); ++p) {
        if (excluded && excluded(doc[p])) continue;
        std::size_t idx = g.index_of(doc[p]);
        if (idx == npos) {
            g.add_node(doc[p]);
            idx = g.size() - 1;
        }
        node_at[p] = idx;
    }
    for (std::size_t p = 0; p < doc.size(); ++p) {
        if (node_at[p] == npos) continue;
        for (std::size_t q = p + 1; q < doc.size() && q - p <= window; ++q) {
            if (node_at[q] == npos || node_at[q] == node_at[p]) continue;
            g.weight(node_at[p], node_at[q]) += 1.0;
            g.weight(node_at[q], node_at[p]) += 1.0;
        }
    }
    return g;
}

double RankScores::score(const Token& t) const {
    auto it = std::find(nodes.begin(), nodes.end(), t);
    if (it == nodes.end()) throw InvalidArgument("RankScores: unknown token " + t);
    return scores[static_cast<std::size_t>(it - nodes.begin())];
}

RankScores textrank_scores(const CoocGraph& graph, double damping, double tol, std::size_t max_iter) {
    if (graph.size() == 0) throw InvalidArgument("textrank_scores: empty graph");
    if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("textrank_scores: damping must be in (0,1)");
    if (!(tol > 0.0) || max_iter == 0) throw InvalidArgument("textrank_scores: tol and max_iter must be positive");

    const std::size_t n = graph.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = graph.out_weight(j);

    RankScores result;
    result.nodes = graph.nodes;
    std::vector<double> ws(n, 1.0), next(n);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double vote = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = graph.weight(j, i);
                if (w == 0.0 || out[j] == 0.0) continue;
                vote += w / out[j] * ws[j];
            }
            next[i] = (1.0 - damping) + damping * vote;
            max_change = std::max(max_change, std::abs(next[i] - ws[i]));
        }
        ws.swap(next);
        result.iterations = iter + 1;
        if (max_change < tol) {
            result.converged = true;
            break;
        }
    }
    result.scores = std::move(ws);
    return result;
}

std::vector<Token> extract_textrank(const TokenSeq& doc, const TextRankConfig& config, std::size_t k) {
    if (k == 0) throw InvalidArgument("extract_textrank: k must be >= 1");
    if (doc.empty()) return {};
    const auto graph = build_cooc_graph(doc, config.window);
    const auto ranks = textrank_scores(graph, config.damping, config.tol, config.max_iter);
    auto ranked = rank_by(ranks.nodes, ranks.scores);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

// ---------------------------------------------------------------------------
// Combined extraction

KeywordExtractor::KeywordExtractor(TfidfModel model, StopWords stop_words, TextRankConfig config)
    : model_(std::move(model)), stop_words_(std::move(stop_words)), config_(config) {}

bool KeywordExtractor::is_excluded(const Token& t) const {
    return is_special_literal(t) || stop_words_.contains(t);
}

std::vector<Token> KeywordExtractor::rank_all(const TokenSeq& doc) const {
    TokenSeq kept;
    for (const auto& t : doc) {
        if (!is_excluded(t)) kept.push_back(t);
    }
    if (kept.empty()) return {};

    std::vector<Token> ranked;
    const auto graph = build_cooc_graph(doc, config_.window, [this](const Token& t) { return is_excluded(t); });
    const auto ranks = textrank_scores(graph, config_.damping, config_.tol, config_.max_iter);
    // Only tokens that received votes are ranked by TextRank; isolated ones
    // carry no graph evidence and fall through to TF-IDF.
    std::vector<Token> connected;
    std::vector<double> connected_scores;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        if (graph.out_weight(i) > 0.0) {
            connected.push_back(ranks.nodes[i]);
            connected_scores.push_back(ranks.scores[i]);
        }
    }
    ranked = rank_by(connected, connected_scores);

    std::set<Token> chosen(ranked.begin(), ranked.end());
    for (const auto& t : extract_tfidf(model_, kept, kept.size())) {
        if (chosen.insert(t).second) ranked.push_back(t);
    }
    return ranked;
}

std::vector<Token> KeywordExtractor::extract(const TokenSeq& doc, std::size_t k) const {
    if (k == 0) throw InvalidArgument("extract_keywords: k must be >= 1");
    auto ranked = rank_all(doc);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

}  // namespace versecraft
