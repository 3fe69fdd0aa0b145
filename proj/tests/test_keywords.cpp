#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "versecraft/error.hpp"
#include "versecraft/keywords.hpp"

using namespace versecraft;
using namespace versecraft::testing;

namespace {

// Independent oracle: the TextRank fixed point solves the linear system
// (I - d M) s = (1 - d) 1, where M[i][j] = w_ji / out(j) for out(j) > 0.
std::vector<double> textrank_oracle(std::size_t n, const std::vector<double>& w, double d) {
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) out[j] += w[j * n + k];
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0;
        a[i][n] = 1.0 - d;
        for (std::size_t j = 0; j < n; ++j) {
            if (out[j] > 0.0) a[i][j] -= d * w[j * n + i] / out[j];
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = a[i][n] / a[i][i];
    return s;
}

std::vector<Token> node_names(std::size_t n) {
    std::vector<Token> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    return names;
}

constexpr double kTightTol = 1e-13;
constexpr std::size_t kManyIters = 100000;

void check_against_oracle(std::size_t n, const std::vector<double>& w) {
    auto g = make_graph(node_names(n), w);
    auto r = textrank_scores(g, 0.85, kTightTol, kManyIters);
    auto o = textrank_oracle(n, w, 0.85);
    CHECK(r.converged);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(r.scores[i] - o[i]) < 1e-8);
}

}  // namespace

TEST_SUITE("tfidf") {
    TEST_CASE("fitting counts documents") {
        auto m = fit_tfidf({{"a", "b"}, {"a"}});
        CHECK(m.corpus_size() == 2);
        CHECK(m.doc_freq("a") == 2);
        CHECK(m.doc_freq("b") == 1);
        CHECK(m.doc_freq("z") == 0);
        auto one = fit_tfidf({{"a", "a"}});
        CHECK(one.corpus_size() == 1);
        CHECK(one.doc_freq("a") == 1);
        CHECK_THROWS_AS(fit_tfidf({}), InvalidArgument);
    }

    TEST_CASE("hand arithmetic") {
        TfidfModel m(8, {{"w", 2}, {"all", 8}});
        TokenSeq doc{"w", "w", "w", "x", "x", "x", "x", "x", "x", "all"};
        CHECK(tfidf(m, doc, "w") == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(tfidf(m, doc, "all") == 0.0);
        CHECK(tfidf(m, doc, "absent") == 0.0);
        // Unseen in corpus: B = 1.
        CHECK(tfidf(m, doc, "x") == doctest::Approx(0.6 * 3.0).epsilon(1e-15));
    }

    TEST_CASE("model validation and persistence") {
        CHECK_THROWS_AS(TfidfModel(2, {{"a", 3}}), InvalidArgument);
        CHECK_THROWS_AS(TfidfModel(2, {{"a", 0}}), InvalidArgument);
        auto m = fit_tfidf({{"床", "前"}, {"床"}, {"光"}});
        CHECK(m.serialize().rfind("C=3\n", 0) == 0);
        CHECK(TfidfModel::deserialize(m.serialize()) == m);
        CHECK_THROWS_AS(TfidfModel::deserialize("C=x\n"), FormatError);
        CHECK_THROWS_AS(TfidfModel::deserialize("C=2\na\t5\n"), FormatError);
    }

    TEST_CASE("non-negativity and the zero condition") {
        Rng rng(60);
        const std::vector<Token> alpha{"a", "b", "c", "d", "e"};
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<TokenSeq> docs(1 + rng.below(5));
            for (auto& d : docs) {
                const std::size_t n = 1 + rng.below(6);
                for (std::size_t i = 0; i < n; ++i) d.push_back(alpha[rng.below(alpha.size())]);
            }
            auto m = fit_tfidf(docs);
            const auto& doc = docs[rng.below(docs.size())];
            for (const auto& w : alpha) {
                const double s = tfidf(m, doc, w);
                CHECK(s >= 0.0);
                const bool absent = std::count(doc.begin(), doc.end(), w) == 0;
                const bool everywhere = m.doc_freq(w) == m.corpus_size();
                CHECK((s == 0.0) == (absent || everywhere));
            }
        }
    }

    TEST_CASE("extraction order") {
        TfidfModel m(4, {{"a", 4}, {"b", 1}});
        CHECK(extract_tfidf(m, {"a", "b"}, 1) == std::vector<Token>{"b"});
        CHECK(extract_tfidf(m, {"a", "b", "a"}, 5) == std::vector<Token>{"b", "a"});
        TfidfModel flat(2, {{"x", 2}, {"y", 2}, {"z", 2}});
        CHECK(extract_tfidf(flat, {"z", "x", "y", "x"}, 3) == std::vector<Token>{"z", "x", "y"});
        CHECK(extract_tfidf(flat, {}, 3).empty());
    }
}

TEST_SUITE("textrank") {
    TEST_CASE("co-occurrence graph") {
        auto g = build_cooc_graph({"a", "b", "a"}, 1);
        REQUIRE(g.size() == 2);
        CHECK(g.weight(0, 1) == 2.0);
        CHECK(g.weight(1, 0) == 2.0);
        CHECK(g.weight(0, 0) == 0.0);
        auto single = build_cooc_graph({"a"}, 3);
        CHECK(single.size() == 1);
        CHECK(single.out_weight(0) == 0.0);
        auto complete = build_cooc_graph({"a", "b", "c", "d"}, 10);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(complete.weight(i, j) == (i == j ? 0.0 : 1.0));
        // Excluded tokens keep their slot in the window.
        auto gap = build_cooc_graph({"a", "的", "的", "b"}, 2, [](const Token& t) { return t == "的"; });
        CHECK(gap.size() == 2);
        CHECK(gap.weight(0, 1) == 0.0);
    }

    TEST_CASE("graph validation") {
        CHECK_THROWS_AS(make_graph({"a", "b"}, {0, 1, 2, 0}), InvalidArgument);
        CHECK_THROWS_AS(make_graph({"a", "b"}, {1, 0, 0, 0}), InvalidArgument);
        CHECK_THROWS_AS(make_graph({"a", "b"}, {0, -1, -1, 0}), InvalidArgument);
    }

    TEST_CASE("hand-checkable fixed points") {
        auto pair = textrank_scores(make_graph({"a", "b"}, {0, 1, 1, 0}), 0.85, 1e-6, 100);
        CHECK(pair.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pair.scores[1] == doctest::Approx(1.0).epsilon(1e-12));
        auto iso = textrank_scores(make_graph({"a"}, {0}), 0.85, 1e-6, 100);
        CHECK(iso.scores[0] == doctest::Approx(0.15).epsilon(1e-15));
        CHECK_THROWS_AS(textrank_scores(CoocGraph{}, 0.85, 1e-6, 100), InvalidArgument);
    }

    TEST_CASE("path graph matches the oracle") {
        std::vector<double> w{0, 1, 0, 1, 0, 1, 0, 1, 0};
        check_against_oracle(3, w);
        auto o = textrank_oracle(3, w, 0.85);
        // By hand: s_a = 0.15 + 0.85 * s_b / 2 and s_b = 0.15 + 0.85 * 2 * s_a.
        const double sb = (0.15 + 0.85 * 2 * 0.15) / (1 - 0.85 * 0.85);
        CHECK(o[1] == doctest::Approx(sb).epsilon(1e-12));
    }

    TEST_CASE("default tolerance lands close to the fixed point") {
        std::vector<double> w{0, 1, 0, 1, 0, 1, 0, 1, 0};
        auto r = textrank_scores(make_graph(node_names(3), w), 0.85, 1e-6, 100);
        CHECK(r.converged);
        CHECK(r.iterations < 100);
        auto o = textrank_oracle(3, w, 0.85);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.scores[i] - o[i]) < 1e-4);
    }

    TEST_CASE("max_iter cap clears the converged flag") {
        std::vector<double> w{0, 1, 0, 1, 0, 1, 0, 1, 0};
        auto r = textrank_scores(make_graph(node_names(3), w), 0.85, 1e-12, 3);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 3);
    }

    TEST_CASE("exhaustive sweep over small graphs") {
        std::size_t graphs = 0;
        for (std::size_t n = 2; n <= 4; ++n) {
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
            std::size_t combos = 1;
            for (std::size_t e = 0; e < edges.size(); ++e) combos *= 4;
            for (std::size_t code = 0; code < combos; ++code) {
                std::vector<double> w(n * n, 0.0);
                std::size_t c = code;
                for (auto [i, j] : edges) {
                    w[i * n + j] = w[j * n + i] = static_cast<double>(c % 4);
                    c /= 4;
                }
                check_against_oracle(n, w);
                ++graphs;
            }
        }
        CHECK(graphs == 4 + 64 + 4096);
    }

    TEST_CASE("random sweep over five- and six-node graphs") {
        Rng rng(61);
        for (std::size_t n : {5u, 6u}) {
            for (int trial = 0; trial < 300; ++trial) {
                std::vector<double> w(n * n, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j) w[i * n + j] = w[j * n + i] = static_cast<double>(rng.below(4));
                check_against_oracle(n, w);
            }
        }
    }

    TEST_CASE("converged scores satisfy the update equation and the lower bound") {
        Rng rng(62);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + rng.below(5);
            std::vector<double> w(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) w[i * n + j] = w[j * n + i] = static_cast<double>(rng.below(5));
            auto g = make_graph(node_names(n), w);
            const double tol = 1e-6;
            auto r = textrank_scores(g, 0.85, tol, 100);
            REQUIRE(r.converged);
            for (std::size_t i = 0; i < n; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (g.out_weight(j) > 0.0) sum += g.weight(j, i) / g.out_weight(j) * r.scores[j];
                }
                CHECK(std::abs(r.scores[i] - (0.15 + 0.85 * sum)) < tol);
                CHECK(r.scores[i] >= 0.15);
                CHECK(std::isfinite(r.scores[i]));
            }
        }
    }

    TEST_CASE("scaling weights leaves scores unchanged") {
        Rng rng(63);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 3 + rng.below(3);
            std::vector<double> w(n * n, 0.0), scaled(n * n, 0.0);
            const double k = rng.uniform(0.1, 20.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    w[i * n + j] = w[j * n + i] = static_cast<double>(rng.below(4));
                    scaled[i * n + j] = scaled[j * n + i] = k * w[i * n + j];
                }
            auto a = textrank_scores(make_graph(node_names(n), w), 0.85, kTightTol, kManyIters);
            auto b = textrank_scores(make_graph(node_names(n), scaled), 0.85, kTightTol, kManyIters);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a.scores[i] - b.scores[i]) < 1e-10);
        }
    }

    TEST_CASE("extraction") {
        TextRankConfig cfg;
        cfg.window = 1;
        // Star: the hub sits between every pair of leaves.
        TokenSeq star{"b", "h", "c", "h", "d", "h", "e"};
        CHECK(extract_textrank(star, cfg, 1) == std::vector<Token>{"h"});
        auto so = textrank_oracle(5, make_graph({"b", "h", "c", "d", "e"},
                                                {0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0})
                                         .weights,
                                  0.85);
        CHECK(so[1] > so[0]);

        cfg.window = 10;
        CHECK(extract_textrank({"p", "q", "r"}, cfg, 3) == std::vector<Token>{"p", "q", "r"});
        CHECK(extract_textrank({}, cfg, 3).empty());

        // Two cliques joined by nothing: a 3-clique and a 2-clique.
        cfg.window = 2;
        TokenSeq cliques{"x", "y", "z", "x", "y", "z", "的", "的", "u", "v", "u", "v"};
        auto top = extract_textrank(cliques, cfg, 1);
        REQUIRE(top.size() == 1);
        CHECK((top[0] == "x" || top[0] == "y" || top[0] == "z"));
    }
}

TEST_SUITE("keyword extractor") {
    TEST_CASE("TextRank supplies enough keywords") {
        KeywordExtractor ex(fit_tfidf({{"a"}, {"b"}, {"c"}}), StopWords::builtin());
        TokenSeq doc{"a", "b", "c", "b"};
        auto got = ex.extract(doc, 2);
        CHECK(got == extract_textrank(doc, TextRankConfig{}, 2));
    }

    TEST_CASE("saturates at the number of distinct tokens") {
        KeywordExtractor ex(fit_tfidf({{"a", "b"}}), StopWords::builtin());
        CHECK(ex.extract({"a", "b", "a"}, 3).size() == 2);
        CHECK_THROWS_AS(ex.extract({"a"}, 0), InvalidArgument);
    }

    TEST_CASE("edgeless graph falls back to TF-IDF order") {
        KeywordExtractor ex(TfidfModel(4, {{"a", 4}, {"b", 1}}), StopWords::builtin());
        CHECK(ex.extract({"a", "的", "的", "b"}, 2) == std::vector<Token>{"b", "a"});
    }

    TEST_CASE("fill path appends TF-IDF's best unranked token") {
        KeywordExtractor ex(TfidfModel(4, {{"a", 4}, {"b", 4}, {"c", 2}, {"d", 1}}), StopWords::builtin());
        // a and b connected; c and d isolated by stop words.
        TokenSeq doc{"a", "b", "的", "的", "c", "的", "的", "d"};
        auto got = ex.extract(doc, 3);
        REQUIRE(got.size() == 3);
        CHECK(got[0] == "a");
        CHECK(got[1] == "b");
        CHECK(got[2] == "d");
    }

    TEST_CASE("stop words and special literals are never returned") {
        KeywordExtractor ex(fit_tfidf({{"月"}}), StopWords::builtin());
        auto got = ex.extract({"的", "<END>", "月", "是", "<PAD>"}, 5);
        CHECK(got == std::vector<Token>{"月"});
        CHECK(ex.extract({"的", "了"}, 2).empty());
    }
}
