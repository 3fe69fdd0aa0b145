#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "versecraft/text.hpp"

namespace versecraft {

/// Document frequencies over a corpus of C documents.
class TfidfModel {
public:
    TfidfModel() = default;
    TfidfModel(std::size_t corpus_size, std::map<Token, std::size_t> doc_freq);

    std::size_t corpus_size() const { return corpus_size_; }
    /// Number of documents containing `word`; 0 when unseen.
    std::size_t doc_freq(const Token& word) const;
    const std::map<Token, std::size_t>& doc_freqs() const { return doc_freq_; }

    /// log2(C / B); unseen words use B = 1.
    double idf(const Token& word) const;

    /// "C=<int>" header, then "token<TAB>B" lines in token order.
    std::string serialize() const;
    static TfidfModel deserialize(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static TfidfModel load(const std::filesystem::path& path);

    bool operator==(const TfidfModel&) const = default;

private:
    std::size_t corpus_size_ = 0;
    std::map<Token, std::size_t> doc_freq_;
};

TfidfModel fit_tfidf(const std::vector<TokenSeq>& documents);

/// TF (a/b) times IDF (log2 C/B) of `word` in `doc`.
double tfidf(const TfidfModel& model, const TokenSeq& doc, const Token& word);

/// Distinct tokens of `doc` by descending TF-IDF; ties keep first occurrence.
std::vector<Token> extract_tfidf(const TfidfModel& model, const TokenSeq& doc, std::size_t k);

/// Undirected co-occurrence graph. Nodes are kept in first-occurrence order;
/// weights is a dense symmetric n×n matrix with a zero diagonal.
struct CoocGraph {
    std::vector<Token> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    double weight(std::size_t i, std::size_t j) const { return weights[i * nodes.size() + j]; }
    double& weight(std::size_t i, std::size_t j) { return weights[i * nodes.size() + j]; }
    double out_weight(std::size_t i) const;
    std::size_t index_of(const Token& t) const;  // npos if absent
    void add_node(const Token& t);
};

/// Builds a graph from explicit nodes and a weight matrix (used by tests and sweeps).
CoocGraph make_graph(std::vector<Token> nodes, std::vector<double> weights);

using TokenFilter = std::function<bool(const Token&)>;

/// Positions within `window` of each other add 1 to the edge between two
/// distinct tokens. Tokens rejected by `excluded` are not nodes but still
/// occupy their position in the window.
CoocGraph build_cooc_graph(const TokenSeq& doc, std::size_t window, const TokenFilter& excluded = {});

struct RankScores {
    std::vector<Token> nodes;
    std::vector<double> scores;
    std::size_t iterations = 0;
    bool converged = false;

    double score(const Token& t) const;
};

/// Synchronous TextRank iteration from WS = 1 until the largest change is
/// below `tol` or `max_iter` sweeps have run.
RankScores textrank_scores(const CoocGraph& graph, double damping, double tol, std::size_t max_iter);

struct TextRankConfig {
    std::size_t window = 2;
    double damping = 0.85;
    double tol = 1e-6;
    std::size_t max_iter = 100;
};

std::vector<Token> extract_textrank(const TokenSeq& doc, const TextRankConfig& config, std::size_t k);

/// Combined extractor: TextRank ranking over graph-connected tokens first,
/// then TF-IDF fill for anything TextRank could not rank. Stop words and
/// special-token literals are excluded throughout.
class KeywordExtractor {
public:
    KeywordExtractor(TfidfModel model, StopWords stop_words, TextRankConfig config = {});

    std::vector<Token> extract(const TokenSeq& doc, std::size_t k) const;

    /// Ranks every candidate of `doc` (same order `extract` uses).
    std::vector<Token> rank_all(const TokenSeq& doc) const;

    bool is_excluded(const Token& t) const;
    const TfidfModel& model() const { return model_; }
    const StopWords& stop_words() const { return stop_words_; }

private:
    TfidfModel model_;
    StopWords stop_words_;
    TextRankConfig config_;
};

}  // namespace versecraft
