#include "versecraft/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "versecraft/error.hpp"
#include "versecraft/numfmt.hpp"

namespace versecraft {

namespace {

constexpr std::string_view kMagic = "versecraft-embed v1";

void check_id(TokenId id, std::size_t size) {
    if (id < 0 || static_cast<std::size_t>(id) >= size) throw InvalidArgument("embedding: id out of range");
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Vocab vocab, std::size_t dim, std::uint64_t seed)
    : vocab_(std::move(vocab)), dim_(dim), rng_(derive_seed(seed, 0)) {
    if (dim == 0) throw InvalidArgument("embedding: dimension must be positive");
    const double bound = 0.5 / static_cast<double>(dim_);
    input_.resize(vocab_.size() * dim_);
    for (double& v : input_) v = rng_.uniform(-bound, bound);
    context_.assign(vocab_.size() * dim_, 0.0);
}

std::span<const double> EmbeddingMatrix::row(TokenId id) const {
    check_id(id, size());
    return {input_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<double> EmbeddingMatrix::row(TokenId id) {
    check_id(id, size());
    return {input_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<const double> EmbeddingMatrix::context_row(TokenId id) const {
    check_id(id, size());
    return {context_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<double> EmbeddingMatrix::context_row(TokenId id) {
    check_id(id, size());
    return {context_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::span<const double> EmbeddingMatrix::ensure_word(const Token& word) {
    if (auto id = vocab_.find(word)) return row(*id);
    const TokenId id = vocab_.add(word);
    const double bound = 0.5 / static_cast<double>(dim_);
    for (std::size_t k = 0; k < dim_; ++k) input_.push_back(rng_.uniform(-bound, bound));
    context_.resize(context_.size() + dim_, 0.0);
    return row(id);
}

std::optional<Vec> EmbeddingMatrix::mean_vector(const TokenSeq& tokens) const {
    Vec mean(dim_, 0.0);
    std::size_t n = 0;
    for (const auto& t : tokens) {
        auto id = vocab_.find(t);
        if (!id || Vocab::is_special(*id)) continue;
        auto r = row(*id);
        for (std::size_t k = 0; k < dim_; ++k) mean[k] += r[k];
        ++n;
    }
    if (n == 0) return std::nullopt;
    for (double& v : mean) v /= static_cast<double>(n);
    return mean;
}

std::vector<std::pair<Token, double>> EmbeddingMatrix::nearest(const Token& word, std::size_t k) const {
    auto id = vocab_.find(word);
    if (!id) throw InvalidArgument("nearest: unknown word '" + word + "'");
    const TokenId self[] = {*id};
    return nearest_to_vector(row(*id), k, self);
}

std::vector<std::pair<Token, double>> EmbeddingMatrix::nearest_to_vector(std::span<const double> query,
                                                                         std::size_t k,
                                                                         std::span<const TokenId> exclude) const {
    if (k == 0) throw InvalidArgument("nearest: k must be >= 1");
    if (query.size() != dim_) throw InvalidArgument("nearest: query dimension mismatch");
    std::vector<std::pair<double, TokenId>> scored;
    for (std::size_t i = Vocab::kNumSpecials; i < size(); ++i) {
        const auto id = static_cast<TokenId>(i);
        if (std::find(exclude.begin(), exclude.end(), id) != exclude.end()) continue;
        scored.emplace_back(cosine(query, row(id)), id);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (scored.size() > k) scored.resize(k);
    std::vector<std::pair<Token, double>> out;
    for (auto [score, id] : scored) out.emplace_back(vocab_.token(id), score);
    return out;
}

std::string EmbeddingMatrix::serialize() const {
    std::string out;
    out += kMagic;
    out += " " + std::to_string(size()) + " " + std::to_string(dim_) + "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out += vocab_.token(static_cast<TokenId>(i));
        for (std::size_t k = 0; k < dim_; ++k) {
            out += ' ';
            out += format_double(input_[i * dim_ + k]);
        }
        out += '\n';
    }
    return out;
}

EmbeddingMatrix EmbeddingMatrix::deserialize(std::string_view text, std::uint64_t seed) {
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        const std::size_t end = text.find('\n', pos);
        const std::size_t stop = end == std::string_view::npos ? text.size() : end;
        line = text.substr(pos, stop - pos);
        pos = stop + 1;
        return true;
    };
    std::string_view line;
    if (!next_line(line)) throw FormatError("embedding file: empty");
    auto header = split_spaces(line);
    if (header.size() != 4 || std::string(header[0]) + " " + std::string(header[1]) != kMagic) {
        throw FormatError("embedding file: bad header");
    }
    const auto rows = parse_int<std::size_t>(header[2]);
    const auto dim = parse_int<std::size_t>(header[3]);
    if (dim == 0 || rows < Vocab::kNumSpecials) throw FormatError("embedding file: bad dimensions");

    Vocab vocab;
    std::vector<double> values;
    values.reserve(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!next_line(line)) throw FormatError("embedding file: expected " + std::to_string(rows) + " rows");
        auto fields = split_spaces(line);
        if (fields.size() != dim + 1) {
            throw FormatError("embedding file: row " + std::to_string(i + 1) + " has wrong width");
        }
        const Token token(fields[0]);
        if (i < Vocab::kNumSpecials) {
            if (token != vocab.token(static_cast<TokenId>(i))) throw FormatError("embedding file: bad special row");
        } else if (vocab.find(token)) {
            throw FormatError("embedding file: duplicate token '" + token + "'");
        } else {
            vocab.add(token);
        }
        for (std::size_t k = 0; k < dim; ++k) values.push_back(parse_double(fields[k + 1]));
    }
    if (next_line(line) && !line.empty()) throw FormatError("embedding file: trailing data");

    EmbeddingMatrix m(std::move(vocab), dim, seed);
    m.input_ = std::move(values);
    return m;
}

void EmbeddingMatrix::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << serialize();
}

EmbeddingMatrix EmbeddingMatrix::load(const std::filesystem::path& path, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str(), seed);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double skipgram_loss(const EmbeddingMatrix& m, const SkipGramSample& s) {
    const auto vc = m.row(s.center);
    double loss = -std::log(sigmoid(dot(m.context_row(s.context), vc)));
    for (TokenId n : s.negatives) loss -= std::log(sigmoid(-dot(m.context_row(n), vc)));
    return loss;
}

SkipGramGrad skipgram_gradient(const EmbeddingMatrix& m, const SkipGramSample& s) {
    const auto vc = m.row(s.center);
    const std::size_t d = m.dim();
    SkipGramGrad g;
    g.center.assign(d, 0.0);
    auto add_term = [&](TokenId id, double coeff) {
        const auto u = m.context_row(id);
        Vec du(d);
        for (std::size_t k = 0; k < d; ++k) {
            g.center[k] += coeff * u[k];
            du[k] = coeff * vc[k];
        }
        g.outputs.emplace_back(id, std::move(du));
    };
    add_term(s.context, sigmoid(dot(m.context_row(s.context), vc)) - 1.0);
    for (TokenId n : s.negatives) add_term(n, sigmoid(dot(m.context_row(n), vc)));
    return g;
}

double skipgram_step(EmbeddingMatrix& m, const SkipGramSample& s, double lr) {
    const double loss = skipgram_loss(m, s);
    const auto g = skipgram_gradient(m, s);
    for (const auto& [id, du] : g.outputs) {
        auto u = m.context_row(id);
        for (std::size_t k = 0; k < m.dim(); ++k) u[k] -= lr * du[k];
    }
    auto vc = m.row(s.center);
    for (std::size_t k = 0; k < m.dim(); ++k) vc[k] -= lr * g.center[k];
    return loss;
}

UnigramSampler::UnigramSampler(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) {
        total += c > 0.0 ? std::pow(c, 0.75) : 0.0;
        cumulative_.push_back(total);
    }
    if (total <= 0.0) throw InvalidArgument("unigram sampler: no mass");
    for (double& c : cumulative_) c /= total;
}

TokenId UnigramSampler::sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<TokenId>(it - cumulative_.begin());
}

EmbeddingMatrix train_skipgram(const std::vector<std::vector<TokenId>>& lines, const Vocab& vocab,
                               const SkipGramConfig& config, std::vector<double>* epoch_loss) {
    if (config.window == 0 || config.negatives == 0) throw InvalidArgument("skip-gram: window and negatives must be >= 1");
    if (config.dim == 0) throw InvalidArgument("skip-gram: dimension must be positive");

    std::vector<std::vector<TokenId>> stream;
    std::vector<double> counts(vocab.size(), 0.0);
    std::size_t total = 0;
    for (const auto& line : lines) {
        std::vector<TokenId> kept;
        for (TokenId id : line) {
            if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) throw InvalidArgument("skip-gram: id out of range");
            if (Vocab::is_special(id)) continue;
            kept.push_back(id);
            counts[static_cast<std::size_t>(id)] += 1.0;
        }
        total += kept.size();
        if (!kept.empty()) stream.push_back(std::move(kept));
    }
    if (total == 0) throw InvalidArgument("skip-gram: empty token stream");

    EmbeddingMatrix m(vocab, config.dim, config.seed);
    const UnigramSampler sampler(counts);
    Rng rng(derive_seed(config.seed, 1));
    const double planned = static_cast<double>(total * config.epochs);
    std::size_t processed = 0;

    SkipGramSample sample;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t samples = 0;
        for (const auto& line : stream) {
            const std::size_t n = line.size();
            for (std::size_t t = 0; t < n; ++t) {
                const double lr = config.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(processed) / planned);
                ++processed;
                const std::size_t lo = t >= config.window ? t - config.window : 0;
                const std::size_t hi = std::min(n - 1, t + config.window);
                for (std::size_t o = lo; o <= hi; ++o) {
                    if (o == t) continue;
                    sample.center = line[t];
                    sample.context = line[o];
                    sample.negatives.clear();
                    for (std::size_t k = 0; k < config.negatives; ++k) {
                        const TokenId neg = sampler.sample(rng);
                        if (neg != sample.context) sample.negatives.push_back(neg);
                    }
                    loss_sum += skipgram_step(m, sample, lr);
                    ++samples;
                }
            }
        }
        if (epoch_loss) epoch_loss->push_back(samples ? loss_sum / static_cast<double>(samples) : 0.0);
    }
    return m;
}

}  // namespace versecraft
