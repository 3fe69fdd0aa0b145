#include "versecraft/emotion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "versecraft/checkpoint.hpp"
#include "versecraft/error.hpp"
#include "versecraft/numfmt.hpp"

namespace versecraft {

TokenSeq clean_text(std::string_view raw, const StopWords& stop_words) {
    TokenSeq out;
    for (char32_t cp : decode_utf8(raw)) {
        if (!is_cjk(cp) && !is_latin_or_digit(cp)) continue;
        Token t = encode_utf8(cp);
        if (!stop_words.contains(t)) out.push_back(std::move(t));
    }
    return out;
}

EmotionData parse_emotion_tsv(std::string_view text, const StopWords& stop_words) {
    EmotionData data;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) throw FormatError("emotion data line " + std::to_string(line_no) + ": missing tab");
        int label = 0;
        try {
            label = parse_int<int>(line.substr(0, tab));
        } catch (const FormatError&) {
            throw FormatError("emotion data line " + std::to_string(line_no) + ": bad label");
        }
        if (label < 0 || label >= static_cast<int>(kNumEmotions)) {
            throw FormatError("emotion data line " + std::to_string(line_no) + ": label must be 0..5");
        }
        auto tokens = clean_text(line.substr(tab + 1), stop_words);
        if (tokens.empty()) {
            ++data.skipped;
            continue;
        }
        data.examples.push_back({std::move(tokens), label});
    }
    return data;
}

EmotionData read_emotion_tsv(const std::filesystem::path& path, const StopWords& stop_words) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_emotion_tsv(ss.str(), stop_words);
}

std::string format_emotion_tsv(const std::vector<EmotionExample>& examples) {
    std::string out;
    for (const auto& e : examples) out += std::to_string(e.label) + '\t' + join(e.text) + '\n';
    return out;
}

std::size_t fit_length(const std::vector<EmotionExample>& examples) {
    if (examples.empty()) throw InvalidArgument("fit_length: empty dataset");
    std::vector<std::size_t> lengths;
    for (const auto& e : examples) lengths.push_back(e.text.size());
    std::sort(lengths.begin(), lengths.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(lengths.size())));
    return std::clamp<std::size_t>(lengths[std::max<std::size_t>(rank, 1) - 1], 4, 64);
}

DatasetSplit split_dataset(const std::vector<EmotionExample>& examples, std::uint64_t seed) {
    if (examples.size() < 5) throw InvalidArgument("split_dataset: need at least 5 examples");
    std::array<std::vector<std::size_t>, kNumEmotions> by_label;
    for (std::size_t i = 0; i < examples.size(); ++i) by_label[static_cast<std::size_t>(examples[i].label)].push_back(i);

    const std::size_t test_total = examples.size() / 5;
    std::array<std::size_t, kNumEmotions> quota{};
    std::array<double, kNumEmotions> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
        const double exact = static_cast<double>(by_label[c].size()) * static_cast<double>(test_total) /
                             static_cast<double>(examples.size());
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::array<std::size_t, kNumEmotions> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < test_total; ++i, ++assigned) ++quota[order[i % kNumEmotions]];

    Rng rng(seed);
    DatasetSplit split;
    for (std::size_t c = 0; c < kNumEmotions; ++c) {
        auto idx = by_label[c];
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) (i < quota[c] ? split.test : split.train).push_back(examples[idx[i]]);
    }
    rng.shuffle(split.train);
    rng.shuffle(split.test);
    return split;
}

EmotionModel::EmotionModel(Vocab vocab, std::size_t embed_dim, std::size_t hidden, std::size_t length)
    : embedding("embedding", {vocab.size(), embed_dim}),
      lstm("lstm", embed_dim, hidden),
      fc_w("fc.weight", {kNumEmotions, hidden}),
      fc_b("fc.bias", {kNumEmotions}),
      vocab_(std::move(vocab)),
      length_(length) {
    if (embed_dim == 0 || hidden == 0 || length == 0) throw InvalidArgument("emotion model: dimensions must be positive");
}

void EmotionModel::init(std::uint64_t seed, const EmbeddingMatrix* pretrained) {
    Rng rng(seed);
    glorot_uniform(embedding.value, vocab_.size(), embed_dim(), rng);
    lstm.init(rng);
    glorot_uniform(fc_w.value, hidden(), kNumEmotions, rng);
    fc_b.value.fill(0.0);
    if (pretrained) {
        if (pretrained->dim() != embed_dim()) throw InvalidArgument("emotion model: pretrained dimension mismatch");
        for (std::size_t i = Vocab::kNumSpecials; i < vocab_.size(); ++i) {
            if (auto src = pretrained->vocab().find(vocab_.token(static_cast<TokenId>(i)))) {
                auto from = pretrained->row(*src);
                std::copy(from.begin(), from.end(), embedding.value.row(i).begin());
            }
        }
    }
    round_to_float(params());
}

ParamList EmotionModel::params() { return {&embedding, &lstm.weight, &lstm.bias, &fc_w, &fc_b}; }

std::vector<const Param*> EmotionModel::params() const { return {&embedding, &lstm.weight, &lstm.bias, &fc_w, &fc_b}; }

std::vector<TokenId> EmotionModel::encode(const TokenSeq& text) const {
    auto ids = vocab_.encode(text);
    if (ids.size() > length_) ids.resize(length_);
    return ids;
}

namespace {

struct Forward {
    std::vector<LstmStepCache> steps;
    std::vector<TokenId> inputs;  // ids consumed, one per cache
    Vec h;
    Vec logits;
};

Forward run_forward(const EmotionModel& m, std::span<const TokenId> ids, bool keep) {
    const std::size_t H = m.hidden();
    Forward f;
    LstmState s{Vec(H, 0.0), Vec(H, 0.0)};
    bool any = false;
    for (TokenId id : ids) {
        if (id == Vocab::kPad) continue;  // PAD steps leave the state alone
        if (id < 0 || static_cast<std::size_t>(id) >= m.vocab().size()) throw InvalidArgument("emotion: id out of range");
        LstmStepCache cache;
        s = lstm_step(m.lstm, m.embedding.value.row(static_cast<std::size_t>(id)), s.h, s.c, keep ? &cache : nullptr);
        if (keep) {
            f.steps.push_back(std::move(cache));
            f.inputs.push_back(id);
        }
        any = true;
    }
    if (!any) throw InvalidArgument("emotion: empty input sequence");
    f.h = std::move(s.h);
    f.logits.assign(m.fc_b.value.values().begin(), m.fc_b.value.values().end());
    matvec_add(m.fc_w.value.values(), kNumEmotions, H, f.h, f.logits);
    return f;
}

}  // namespace

Vec EmotionModel::logits(std::span<const TokenId> ids) const { return run_forward(*this, ids, false).logits; }

double emotion_loss(EmotionModel& model, const std::vector<EmotionExample>& batch, bool backward) {
    if (batch.empty()) throw InvalidArgument("emotion_loss: empty batch");
    const double scale = 1.0 / static_cast<double>(batch.size());
    const std::size_t H = model.hidden();
    const std::size_t D = model.embed_dim();
    double total = 0.0;
    for (const auto& ex : batch) {
        const auto ids = model.encode(ex.text);
        auto f = run_forward(model, ids, backward);
        if (!backward) {
            total += softmax_cross_entropy(f.logits, ex.label);
            continue;
        }
        Vec dlogits(kNumEmotions, 0.0);
        total += softmax_cross_entropy(f.logits, ex.label, scale, dlogits);
        outer_add(model.fc_w.grad.values(), kNumEmotions, H, dlogits, f.h);
        add_to(model.fc_b.grad.values(), dlogits);
        Vec dh(H, 0.0), dc(H, 0.0);
        matvec_t_add(model.fc_w.value.values(), kNumEmotions, H, dlogits, dh);
        Vec dh_prev, dc_prev;
        for (std::size_t t = f.steps.size(); t-- > 0;) {
            auto dx = model.embedding.grad.row(static_cast<std::size_t>(f.inputs[t]));
            Vec dx_local(D, 0.0);
            lstm_step_backward(model.lstm, f.steps[t], dh, dc, dx_local, dh_prev, dc_prev);
            add_to(dx, dx_local);
            dh.swap(dh_prev);
            dc.swap(dc_prev);
        }
    }
    return total * scale;
}

EmotionTrainResult train_emotion(const std::vector<EmotionExample>& train, const EmotionTrainConfig& config,
                                 const EmbeddingMatrix* pretrained) {
    if (train.empty()) throw InvalidArgument("train_emotion: empty training set");
    if (config.batch_size == 0) throw InvalidArgument("train_emotion: batch size must be >= 1");
    std::vector<Poem> docs;
    for (const auto& e : train) docs.push_back(Poem{{}, {}, {e.text}, PoemForm::Five});
    Vocab vocab = build_vocab(docs, 1);
    const std::size_t length = config.length ? config.length : fit_length(train);
    const std::size_t dim = pretrained ? pretrained->dim() : config.embed_dim;

    EmotionTrainResult result{EmotionModel(std::move(vocab), dim, config.hidden, length), {}};
    EmotionModel& model = result.model;
    model.init(derive_seed(config.seed, 3), pretrained);
    const auto params = model.params();
    AdamState adam(params, AdamConfig{config.learning_rate});

    std::vector<std::size_t> order(train.size());
    std::vector<EmotionExample> batch;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seed, 2000 + epoch));
        rng.shuffle(order);
        double sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
                batch.push_back(train[order[i]]);
            }
            zero_grad(params);
            sum += emotion_loss(model, batch, true) * static_cast<double>(batch.size());
            clip_gradients(params, config.clip_norm);
            adam_step(adam, params);
            round_to_float(params);
            adam.round_to_float();
        }
        result.epoch_loss.push_back(sum / static_cast<double>(train.size()));
    }
    return result;
}

Classification classify_tokens(const EmotionModel& model, const TokenSeq& tokens) {
    if (tokens.empty()) throw InvalidArgument("classify: empty text");
    Vec z = model.logits(model.encode(tokens));
    softmax_inplace(z);
    Classification c;
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
        c.probs[k] = z[k];
        if (z[k] > z[static_cast<std::size_t>(c.label)]) c.label = static_cast<int>(k);
    }
    return c;
}

Classification classify(const EmotionModel& model, std::string_view text, const StopWords& stop_words) {
    const auto tokens = clean_text(text, stop_words);
    if (tokens.empty()) throw InvalidArgument("classify: text is empty after cleaning");
    return classify_tokens(model, tokens);
}

std::string EmotionReport::json() const {
    nlohmann::ordered_json j;
    j["accuracy"] = accuracy;
    j["confusion"] = confusion;
    return j.dump();
}

EmotionReport evaluate(const EmotionModel& model, const std::vector<EmotionExample>& test) {
    if (test.empty()) throw InvalidArgument("evaluate: empty test set");
    EmotionReport r;
    std::size_t correct = 0;
    for (const auto& e : test) {
        const int predicted = classify_tokens(model, e.text).label;
        ++r.confusion[static_cast<std::size_t>(e.label)][static_cast<std::size_t>(predicted)];
        correct += predicted == e.label;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    return r;
}

void save_emotion(const std::filesystem::path& path, const EmotionModel& model) {
    Checkpoint ckpt;
    ckpt.header["kind"] = "emotion";
    ckpt.header["dims"] = {{"vocab", model.vocab().size()},
                           {"embed", model.embed_dim()},
                           {"hidden", model.hidden()},
                           {"length", model.length()},
                           {"classes", kNumEmotions}};
    ckpt.header["vocab_hash"] = model.vocab().hash();
    append_params(ckpt, model.params());
    save_checkpoint(ckpt, path);
    model.vocab().save(path.string() + ".vocab");
}

EmotionModel load_emotion(const std::filesystem::path& path) {
    const Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.header.value("kind", "") != "emotion") throw FormatError("checkpoint: not an emotion model");
    Vocab vocab = Vocab::load(path.string() + ".vocab");
    verify_vocab_hash(ckpt, vocab);
    std::size_t embed = 0, hidden = 0, length = 0;
    try {
        const auto& d = ckpt.header.at("dims");
        if (d.at("vocab").get<std::size_t>() != vocab.size() || d.at("classes").get<std::size_t>() != kNumEmotions) {
            throw FormatError("checkpoint: emotion model dimensions do not match");
        }
        embed = d.at("embed").get<std::size_t>();
        hidden = d.at("hidden").get<std::size_t>();
        length = d.at("length").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad header: ") + e.what());
    }
    EmotionModel model(std::move(vocab), embed, hidden, length);
    restore_params(ckpt, model.params());
    return model;
}

}  // namespace versecraft
