#include "versecraft/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "versecraft/error.hpp"
#include "versecraft/numfmt.hpp"
#include "versecraft/optim.hpp"

namespace versecraft {

KeywordPlanner::KeywordPlanner(KeywordExtractor extractor, Lexicon lexicon)
    : extractor_(std::move(extractor)), lexicon_(std::move(lexicon)) {}

TokenSeq KeywordPlanner::units(const TokenSeq& text) const {
    TokenSeq kept;
    for (const auto& t : text) {
        const auto cps = decode_utf8(t);
        if (cps.size() == 1 && (is_cjk(cps[0]) || is_latin_or_digit(cps[0]))) kept.push_back(t);
    }
    return lexicon_.segment(kept);
}

std::vector<TokenSeq> KeywordPlanner::ranked(const TokenSeq& text) const {
    auto order = extractor_.rank_all(units(text));
    std::stable_partition(order.begin(), order.end(), [this](const Token& u) { return lexicon_.contains(u); });
    std::vector<TokenSeq> out;
    for (const auto& u : order) out.push_back(split_chars(u));
    return out;
}

TokenSeq KeywordPlanner::line_keyword(const TokenSeq& line) const {
    auto r = ranked(line);
    return r.empty() ? TokenSeq{} : r.front();
}

TfidfModel fit_line_tfidf(const std::vector<Poem>& poems, const Lexicon& lexicon) {
    std::vector<TokenSeq> docs;
    for (const auto& p : poems) {
        for (const auto& line : p.lines) docs.push_back(lexicon.segment(line));
    }
    return fit_tfidf(docs);
}

std::string PreparedCorpus::summary() const {
    return "raw_poems=" + std::to_string(raw_poems) + "\nrejected_poems=" + std::to_string(rejected_poems) +
           "\npoems=" + std::to_string(poems.size()) + "\nlines=" + std::to_string(lines) +
           "\npairs=" + std::to_string(pairs.size()) + "\nskipped_lines=" + std::to_string(skipped_lines) +
           "\nvocab_size=" + std::to_string(vocab.size()) + "\nvocab_hash=" + vocab.hash() + "\n";
}

PreparedCorpus prepare_corpus(const std::vector<RawPoem>& raw, PoemForm form, std::size_t min_count,
                              const Lexicon& lexicon, const StopWords& stop_words) {
    PreparedCorpus out;
    out.raw_poems = raw.size();
    out.poems = select_form(raw, form);
    out.rejected_poems = raw.size() - out.poems.size();
    if (out.poems.empty()) {
        throw InvalidArgument("prepare: no " + std::string(to_string(form)) + "-character poems among " +
                              std::to_string(raw.size()) + " poems");
    }
    out.vocab = build_vocab(out.poems, min_count);
    out.tfidf = fit_line_tfidf(out.poems, lexicon);
    const KeywordPlanner planner(KeywordExtractor(out.tfidf, stop_words), lexicon);
    for (const auto& poem : out.poems) {
        auto built = build_training_pairs(poem, [&](const TokenSeq& line) { return planner.line_keyword(line); });
        out.lines += poem.lines.size();
        out.skipped_lines += built.skipped_lines;
        out.pairs.insert(out.pairs.end(), built.pairs.begin(), built.pairs.end());
    }
    return out;
}

GenerationPlan plan_keywords(const TokenSeq& user_text, std::size_t n_lines, PoemForm form,
                             const KeywordPlanner& planner, const EmbeddingMatrix* embeddings) {
    if (n_lines == 0) throw InvalidArgument("plan_keywords: n_lines must be >= 1");
    GenerationPlan plan;
    plan.form = form;
    plan.n_lines = n_lines;
    plan.keywords = planner.ranked(user_text);
    if (plan.keywords.empty()) throw InvalidArgument("plan_keywords: no keyword candidates in the input text");
    if (plan.keywords.size() >= n_lines) {
        plan.keywords.resize(n_lines);
        return plan;
    }

    auto in_plan = [&](const TokenSeq& kw) {
        return std::find(plan.keywords.begin(), plan.keywords.end(), kw) != plan.keywords.end();
    };
    const std::size_t sources = plan.keywords.size();
    std::vector<std::size_t> cursor(sources, 0);  // neighbours already consumed per source
    std::vector<bool> exhausted(sources, embeddings == nullptr);
    std::size_t turn = 0;
    while (plan.keywords.size() < n_lines) {
        if (std::all_of(exhausted.begin(), exhausted.end(), [](bool b) { return b; })) {
            throw InvalidArgument("plan_keywords: cannot find enough synonyms to fill " + std::to_string(n_lines) +
                                  " lines");
        }
        const std::size_t s = turn++ % sources;
        if (exhausted[s]) continue;
        const TokenSeq& source = plan.keywords[s];
        auto query = embeddings->mean_vector(source);
        if (!query) {
            exhausted[s] = true;
            continue;
        }
        std::vector<TokenId> exclude;
        for (const auto& ch : source) {
            if (auto id = embeddings->vocab().find(ch)) exclude.push_back(*id);
        }
        const auto neighbours = embeddings->nearest_to_vector(*query, embeddings->size(), exclude);
        bool added = false;
        while (cursor[s] < neighbours.size()) {
            TokenSeq candidate{neighbours[cursor[s]++].first};
            if (planner.extractor().is_excluded(candidate.front()) || in_plan(candidate)) continue;
            plan.keywords.push_back(std::move(candidate));
            added = true;
            break;
        }
        if (!added) exhausted[s] = true;
    }
    return plan;
}

GeneratedPoem generate_poem(const Seq2SeqModel& model, const Vocab& vocab, const GenerationPlan& plan) {
    if (plan.keywords.size() != plan.n_lines) throw InvalidArgument("generate_poem: plan has the wrong keyword count");
    GeneratedPoem poem;
    TokenSeq preamble;
    const std::size_t len = line_length(plan.form);
    for (std::size_t i = 0; i < plan.n_lines; ++i) {
        if (plan.keywords[i].empty()) throw InvalidArgument("generate_poem: empty keyword");
        const auto kw = vocab.encode(plan.keywords[i]);
        const auto ctx = vocab.encode(preamble);
        const auto encoded = encode_example(model, kw, ctx);
        const auto ids = decode_greedy(model, encoded, len + 2);
        TokenSeq line = vocab.decode(ids);
        if (line.empty()) {
            ++poem.empty_lines;
        } else if (line.size() != len) {
            ++poem.off_length_lines;
        }
        if (i > 0) preamble.push_back(Token(kLineSeparator));
        preamble.insert(preamble.end(), line.begin(), line.end());
        poem.lines.push_back(std::move(line));
    }
    return poem;
}

std::string format_loss_log(const std::vector<EpochStats>& log) {
    std::string out;
    for (const auto& e : log) {
        out += std::to_string(e.epoch) + '\t' + format_double(e.mean_loss) + '\t' + format_double(e.perplexity) + '\n';
    }
    return out;
}

Seq2SeqModel initial_model(const Vocab& vocab, const EmbeddingMatrix* embeddings, const TrainConfig& config) {
    ModelDims dims{vocab.size(), embeddings ? embeddings->dim() : config.embed_dim, config.hidden, 0};
    Seq2SeqModel model(dims, config.mode);
    model.init(derive_seed(config.seed, 2));
    if (embeddings) {
        for (std::size_t i = Vocab::kNumSpecials; i < vocab.size(); ++i) {
            const auto id = static_cast<TokenId>(i);
            if (auto src = embeddings->vocab().find(vocab.token(id))) {
                auto from = embeddings->row(*src);
                auto to = model.embedding.value.row(i);
                std::copy(from.begin(), from.end(), to.begin());
            }
        }
    }
    if (config.zero_output) {
        model.out_w.value.fill(0.0);
        model.out_b.value.fill(0.0);
    }
    round_to_float(model.params());
    return model;
}

TrainResult train_generator(const std::vector<TrainingPair>& pairs, const Vocab& vocab,
                            const EmbeddingMatrix* embeddings, const TrainConfig& config,
                            std::optional<LoadedGenerator> resume, const CheckpointFn& on_checkpoint) {
    if (pairs.empty()) throw InvalidArgument("train_generator: no training pairs");
    if (config.batch_size == 0) throw InvalidArgument("train_generator: batch size must be >= 1");
    if (!(config.clip_norm > 0.0)) throw InvalidArgument("train_generator: clip norm must be positive");

    std::optional<Seq2SeqModel> model;
    TrainingState state;
    if (resume) {
        if (!resume->state) throw InvalidArgument("train_generator: checkpoint has no optimizer state to resume");
        if (resume->model.dims().vocab != vocab.size()) throw HashMismatchError("train_generator: vocab size mismatch");
        model.emplace(std::move(resume->model));
        state = std::move(*resume->state);
    } else {
        model.emplace(initial_model(vocab, embeddings, config));
        state.adam = AdamState(model->params(), AdamConfig{});
    }
    state.adam.config.learning_rate = config.learning_rate;
    const auto params = model->params();

    std::vector<EpochStats> log;
    std::vector<std::size_t> order(pairs.size());
    std::vector<TrainingPair> chunk;
    for (std::size_t epoch = state.epochs_completed; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(config.seed, 1000 + epoch));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t tokens = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            chunk.clear();
            for (std::size_t i = start; i < end; ++i) chunk.push_back(pairs[order[i]]);
            const Batch batch = pad_batch(chunk, vocab);

            zero_grad(params);
            const LossGraph graph = record_loss(*model, batch);
            graph.backward(*model);
            clip_gradients(params, config.clip_norm);
            adam_step(state.adam, params);
            round_to_float(params);
            state.adam.round_to_float();

            loss_sum += graph.loss() * static_cast<double>(graph.token_count());
            tokens += graph.token_count();
        }
        state.epochs_completed = epoch + 1;
        const double mean = loss_sum / static_cast<double>(tokens);
        log.push_back({epoch + 1, mean, std::exp(mean)});
        if (on_checkpoint && config.checkpoint_interval > 0 && (epoch + 1) % config.checkpoint_interval == 0) {
            on_checkpoint(*model, state);
        }
    }
    return TrainResult{std::move(*model), std::move(state), std::move(log)};
}

}  // namespace versecraft
