#include "versecraft/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "versecraft/emotion.hpp"
#include "versecraft/error.hpp"
#include "versecraft/eval.hpp"
#include "versecraft/generator.hpp"
#include "versecraft/numfmt.hpp"

namespace versecraft {

namespace fs = std::filesystem;

namespace {

// File names inside a prepared data directory.
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kPairsFile = "pairs.txt";
constexpr const char* kTfidfFile = "tfidf.txt";
constexpr const char* kLinesFile = "lines.txt";
constexpr const char* kLexiconFile = "lexicon.txt";
constexpr const char* kStopWordsFile = "stopwords.txt";
constexpr const char* kSummaryFile = "summary.txt";

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
    if (!out) throw FormatError("write failed: " + path.string());
}

fs::path data_file(const fs::path& dir, const char* name) {
    fs::path p = dir / name;
    if (!fs::exists(p)) throw FormatError("missing " + p.string() + " (run prepare first)");
    return p;
}

std::vector<std::string> text_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::string set_lines(const std::set<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += s + '\n';
    return out;
}

struct DataDir {
    Vocab vocab;
    TfidfModel tfidf;
    Lexicon lexicon;
    StopWords stop_words;

    KeywordPlanner planner() const { return KeywordPlanner(KeywordExtractor(tfidf, stop_words), lexicon); }
};

DataDir load_data(const fs::path& dir) {
    DataDir d;
    d.vocab = Vocab::load(data_file(dir, kVocabFile));
    d.tfidf = TfidfModel::load(data_file(dir, kTfidfFile));
    d.lexicon = Lexicon::from_file(data_file(dir, kLexiconFile));
    d.stop_words = StopWords::from_file(data_file(dir, kStopWordsFile));
    return d;
}

EmbeddingMatrix load_matching_embeddings(const fs::path& path, const Vocab& vocab, std::uint64_t seed) {
    auto emb = EmbeddingMatrix::load(path, seed);
    if (!(emb.vocab() == vocab)) {
        throw HashMismatchError("embedding vocabulary (hash " + emb.vocab().hash() + ") differs from the data vocabulary (hash " +
                                vocab.hash() + ")");
    }
    return emb;
}

StopWords stop_words_from(const std::string& path) { return path.empty() ? StopWords::builtin() : StopWords::from_file(path); }

std::vector<fs::path> corpus_files(const fs::path& path) {
    if (fs::is_regular_file(path)) return {path};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError("no .json corpus files in " + path.string());
    return files;
}

std::vector<TokenSeq> split_keywords(const std::string& list) {
    std::vector<TokenSeq> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(split_chars(cur));
        cur.clear();
    };
    for (char32_t cp : decode_utf8(list)) {
        if (cp == U',' || cp == U'，' || cp == U' ') {
            flush();
        } else {
            cur += encode_utf8(cp);
        }
    }
    flush();
    return out;
}

std::string probs_text(const Classification& c) {
    std::string out;
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
        if (k) out += ' ';
        out += std::string(kEmotionLabels[k]) + '=' + format_double(c.probs[k]);
    }
    return out;
}

nlohmann::ordered_json classification_json(const Classification& c) {
    nlohmann::ordered_json j;
    j["label"] = c.label;
    j["name"] = kEmotionLabels[static_cast<std::size_t>(c.label)];
    j["probs"] = c.probs;
    return j;
}

std::string epoch_log(const std::vector<double>& losses) {
    std::string out;
    for (std::size_t i = 0; i < losses.size(); ++i) out += std::to_string(i + 1) + '\t' + format_double(losses[i]) + '\n';
    return out;
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

// key=value lines; '#' starts a comment line.
std::map<std::string, std::string> read_config(const fs::path& path) {
    std::map<std::string, std::string> out;
    std::size_t n = 0;
    for (const auto& raw : text_lines(read_text(path))) {
        ++n;
        std::string line = raw;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("config " + path.string() + ": line " + std::to_string(n) + " has no '='");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

// Appends config entries as flags for options the command line left unset.
// Keys that belong only to other subcommands are ignored.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
    const auto path = config_path(args);
    if (!path) return args;
    if (!fs::exists(*path)) throw InvalidArgument("config file not found: " + *path);
    CLI::App* sub = nullptr;
    for (const auto& a : args) {
        if (auto* s = app.get_subcommand_no_throw(a)) {
            sub = s;
            break;
        }
    }
    std::vector<std::string> out = args;
    for (const auto& [key, value] : read_config(*path)) {
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
        if (!opt) opt = app.get_option_no_throw(flag);
        if (!opt) {
            const auto subs = app.get_subcommands({});
            const bool known = std::any_of(subs.begin(), subs.end(),
                                           [&](const CLI::App* s) { return s->get_option_no_throw(flag) != nullptr; });
            if (!known) throw InvalidArgument("config " + *path + ": unknown key '" + key + "'");
            continue;
        }
        if (given(args, flag)) continue;
        if (opt->get_expected_min() == 0) {
            if (truthy(value)) out.push_back(flag);
        } else {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

struct Options {
    std::uint64_t seed = 42;
    std::string config;

    // prepare
    std::string corpus, out_dir, lexicon, stopwords;
    std::string form = "five";
    std::size_t min_count = 1;

    // shared
    std::string data, out, embed, ckpt, pairs, model;
    bool json = false;

    SkipGramConfig skipgram;
    TrainConfig gen;
    std::string mode = "attention";
    std::string resume;

    std::string text, keywords, emotion_model;
    std::size_t lines = 4;

    EmotionTrainConfig emo;
    std::string train_tsv, eval_tsv;
    bool no_split = false;
};

int cmd_prepare(const Options& o, std::ostream& out) {
    std::vector<RawPoem> raw;
    std::size_t skipped_records = 0;
    const auto files = corpus_files(o.corpus);
    for (const auto& f : files) {
        auto load = load_corpus(f);
        skipped_records += load.skipped_records;
        raw.insert(raw.end(), std::make_move_iterator(load.poems.begin()), std::make_move_iterator(load.poems.end()));
    }
    const Lexicon lexicon = o.lexicon.empty() ? Lexicon{} : Lexicon::from_file(o.lexicon);
    const StopWords stop = stop_words_from(o.stopwords);
    const PoemForm form = parse_form(o.form);
    PreparedCorpus prep;
    try {
        prep = prepare_corpus(raw, form, o.min_count, lexicon, stop);
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }

    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    prep.vocab.save(dir / kVocabFile);
    write_pair_file(prep.pairs, dir / kPairsFile);
    prep.tfidf.save(dir / kTfidfFile);
    std::string lines;
    for (const auto& p : prep.poems) {
        for (const auto& l : p.lines) lines += join(l) + '\n';
    }
    write_text(dir / kLinesFile, lines);
    write_text(dir / kLexiconFile, set_lines(lexicon.entries()));
    write_text(dir / kStopWordsFile, set_lines(stop.words()));
    const std::string summary = "files=" + std::to_string(files.size()) + "\nform=" + std::string(to_string(form)) +
                                "\nskipped_records=" + std::to_string(skipped_records) + '\n' + prep.summary();
    write_text(dir / kSummaryFile, summary);
    out << summary;
    return 0;
}

int cmd_train_embed(const Options& o, std::ostream& out) {
    const fs::path dir(o.data);
    const Vocab vocab = Vocab::load(data_file(dir, kVocabFile));
    std::vector<std::vector<TokenId>> lines;
    for (const auto& l : text_lines(read_text(data_file(dir, kLinesFile)))) lines.push_back(vocab.encode(split_chars(l)));
    SkipGramConfig cfg = o.skipgram;
    cfg.seed = o.seed;
    std::vector<double> losses;
    const auto emb = train_skipgram(lines, vocab, cfg, &losses);
    emb.save(o.out);
    write_text(o.out + ".log", epoch_log(losses));
    out << "wrote " << o.out << " V=" << emb.size() << " D=" << emb.dim();
    if (!losses.empty()) out << " final_loss=" << format_double(losses.back());
    out << '\n';
    return 0;
}

int cmd_train_gen(const Options& o, std::ostream& out) {
    const fs::path dir(o.data);
    const Vocab vocab = Vocab::load(data_file(dir, kVocabFile));
    const auto pairs = read_pair_file(o.pairs.empty() ? data_file(dir, kPairsFile) : fs::path(o.pairs));
    std::optional<EmbeddingMatrix> emb;
    if (!o.embed.empty()) emb = load_matching_embeddings(o.embed, vocab, o.seed);
    TrainConfig cfg = o.gen;
    cfg.seed = o.seed;
    cfg.mode = parse_decoder_mode(o.mode);
    std::optional<LoadedGenerator> resume;
    if (!o.resume.empty()) resume = load_generator(o.resume, vocab);

    const fs::path target(o.out);
    auto result = train_generator(pairs, vocab, emb ? &*emb : nullptr, cfg, std::move(resume),
                                  [&](const Seq2SeqModel& m, const TrainingState& s) { save_generator(target, m, vocab, &s); });
    save_generator(target, result.model, vocab, &result.state);
    write_text(o.out + ".log", format_loss_log(result.log));
    out << "wrote " << o.out << " epochs=" << result.state.epochs_completed;
    if (!result.log.empty()) {
        out << " loss=" << format_double(result.log.back().mean_loss) << " pp=" << format_double(result.log.back().perplexity);
    }
    out << '\n';
    return 0;
}

int cmd_generate(const Options& o, std::ostream& out, const CLI::App& sub) {
    const DataDir data = load_data(o.data);
    const auto model = load_generator(o.ckpt, data.vocab).model;
    const PoemForm form = parse_form(o.form);
    GenerationPlan plan;
    if (!o.keywords.empty()) {
        plan.keywords = split_keywords(o.keywords);
        if (plan.keywords.empty()) throw InvalidArgument("--keywords has no entries");
        if (sub.count("--lines") && o.lines != plan.keywords.size()) {
            throw InvalidArgument("--lines " + std::to_string(o.lines) + " disagrees with " +
                                  std::to_string(plan.keywords.size()) + " keywords");
        }
        plan.form = form;
        plan.n_lines = plan.keywords.size();
    } else {
        if (o.text.empty()) throw InvalidArgument("generate needs --text or --keywords");
        std::optional<EmbeddingMatrix> emb;
        if (!o.embed.empty()) emb = load_matching_embeddings(o.embed, data.vocab, o.seed);
        plan = plan_keywords(split_chars(o.text), o.lines, form, data.planner(), emb ? &*emb : nullptr);
    }
    const auto poem = generate_poem(model, data.vocab, plan);

    std::optional<Classification> mood;
    if (!o.emotion_model.empty()) {
        const auto emo = load_emotion(o.emotion_model);
        TokenSeq all;
        for (const auto& l : poem.lines) all.insert(all.end(), l.begin(), l.end());
        if (!all.empty()) mood = classify_tokens(emo, all);
    }

    if (o.json) {
        nlohmann::ordered_json j;
        j["keywords"] = nlohmann::ordered_json::array();
        for (const auto& k : plan.keywords) j["keywords"].push_back(join(k));
        j["lines"] = nlohmann::ordered_json::array();
        for (const auto& l : poem.lines) j["lines"].push_back(join(l));
        if (mood) j["emotion"] = classification_json(*mood);
        out << j.dump() << '\n';
        return 0;
    }
    out << "keywords:";
    for (const auto& k : plan.keywords) out << ' ' << join(k);
    out << '\n';
    for (const auto& l : poem.lines) out << join(l) << '\n';
    if (mood) out << "emotion: " << kEmotionLabels[static_cast<std::size_t>(mood->label)] << ' ' << probs_text(*mood) << '\n';
    return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
    const fs::path dir(o.data);
    const Vocab vocab = Vocab::load(data_file(dir, kVocabFile));
    const auto model = load_generator(o.ckpt, vocab).model;
    const auto pairs = read_pair_file(o.pairs.empty() ? data_file(dir, kPairsFile) : fs::path(o.pairs));
    const auto report = perplexity(model, vocab, pairs);
    out << (o.json ? report.json() : report.text()) << '\n';
    return 0;
}

int cmd_train_emotion(const Options& o, std::ostream& out) {
    const auto data = read_emotion_tsv(o.train_tsv, stop_words_from(o.stopwords));
    if (data.examples.empty()) throw FormatError("no usable examples in " + o.train_tsv);
    DatasetSplit split;
    if (o.no_split) {
        split.train = data.examples;
    } else {
        split = split_dataset(data.examples, o.seed);
    }
    EmotionTrainConfig cfg = o.emo;
    cfg.seed = o.seed;
    std::optional<EmbeddingMatrix> emb;
    if (!o.embed.empty()) emb = EmbeddingMatrix::load(o.embed, o.seed);
    const auto result = train_emotion(split.train, cfg, emb ? &*emb : nullptr);
    save_emotion(o.out, result.model);
    write_text(o.out + ".log", epoch_log(result.epoch_loss));
    const auto train_report = evaluate(result.model, split.train);
    out << "wrote " << o.out << " train=" << split.train.size() << " test=" << split.test.size()
        << " skipped=" << data.skipped << " train_accuracy=" << format_double(train_report.accuracy);
    if (!split.test.empty()) {
        const auto test_report = evaluate(result.model, split.test);
        write_text(o.out + ".eval.json", test_report.json() + '\n');
        out << " test_accuracy=" << format_double(test_report.accuracy);
    }
    out << '\n';
    return 0;
}

int cmd_emotion(const Options& o, std::ostream& out) {
    const auto model = load_emotion(o.model);
    const StopWords stop = stop_words_from(o.stopwords);
    if (!o.eval_tsv.empty()) {
        const auto data = read_emotion_tsv(o.eval_tsv, stop);
        const auto report = evaluate(model, data.examples);
        if (o.json) {
            out << report.json() << '\n';
            return 0;
        }
        out << "accuracy=" << format_double(report.accuracy) << " n=" << data.examples.size() << '\n';
        for (std::size_t t = 0; t < kNumEmotions; ++t) {
            out << kEmotionLabels[t];
            for (std::size_t p = 0; p < kNumEmotions; ++p) out << '\t' << report.confusion[t][p];
            out << '\n';
        }
        return 0;
    }
    if (o.text.empty()) throw InvalidArgument("emotion needs --text or --eval");
    const auto c = classify(model, o.text, stop);
    if (o.json) {
        out << classification_json(c).dump() << '\n';
    } else {
        out << kEmotionLabels[static_cast<std::size_t>(c.label)] << ' ' << c.label << '\n' << probs_text(c) << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Keyword-planned classical Chinese poetry generation", "versecraft"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", o.seed, "Global random seed")->capture_default_str();
    app.add_option("--config", o.config, "Flat key=value file; flags on the command line take precedence");

    auto* prepare = app.add_subcommand("prepare", "Build vocab, TF-IDF model and training pairs from a corpus");
    prepare->add_option("--corpus", o.corpus, "chinese-poetry JSON file or directory of them")->required()->check(CLI::ExistingPath);
    prepare->add_option("--out", o.out_dir, "Output directory")->required();
    prepare->add_option("--form", o.form, "five|seven")->capture_default_str();
    prepare->add_option("--min-count", o.min_count, "Minimum character count for the vocab")->capture_default_str();
    prepare->add_option("--lexicon", o.lexicon, "Keyword lexicon, one entry per line")->check(CLI::ExistingFile);
    prepare->add_option("--stopwords", o.stopwords, "Stop words, one per line (default: built-in list)")->check(CLI::ExistingFile);

    auto* embed = app.add_subcommand("train-embed", "Train skip-gram character vectors");
    embed->add_option("--data", o.data, "Prepared data directory")->required()->check(CLI::ExistingDirectory);
    embed->add_option("--out", o.out, "Embedding file to write")->required();
    embed->add_option("--dim", o.skipgram.dim)->capture_default_str();
    embed->add_option("--window", o.skipgram.window)->capture_default_str();
    embed->add_option("--negatives", o.skipgram.negatives)->capture_default_str();
    embed->add_option("--lr", o.skipgram.learning_rate)->capture_default_str();
    embed->add_option("--epochs", o.skipgram.epochs)->capture_default_str();

    auto* gen = app.add_subcommand("train-gen", "Train the keyword/context encoder-decoder");
    gen->add_option("--data", o.data, "Prepared data directory")->required()->check(CLI::ExistingDirectory);
    gen->add_option("--out", o.out, "Checkpoint to write")->required();
    gen->add_option("--pairs", o.pairs, "Pair file (default: <data>/pairs.txt)")->check(CLI::ExistingFile);
    gen->add_option("--embed", o.embed, "Pretrained embedding file")->check(CLI::ExistingFile);
    gen->add_option("--epochs", o.gen.epochs)->capture_default_str();
    gen->add_option("--batch", o.gen.batch_size)->capture_default_str();
    gen->add_option("--lr", o.gen.learning_rate)->capture_default_str();
    gen->add_option("--clip", o.gen.clip_norm)->capture_default_str();
    gen->add_option("--embed-dim", o.gen.embed_dim, "Ignored with --embed")->capture_default_str();
    gen->add_option("--hidden", o.gen.hidden)->capture_default_str();
    gen->add_option("--mode", o.mode, "attention|fixed")->capture_default_str();
    gen->add_option("--checkpoint-every", o.gen.checkpoint_interval, "Epochs between checkpoints (0: end only)")
        ->capture_default_str();
    gen->add_option("--resume", o.resume, "Continue from a checkpoint with optimizer state")->check(CLI::ExistingFile);
    gen->add_flag("--zero-output", o.gen.zero_output, "Start the output layer at zero");

    auto* generate = app.add_subcommand("generate", "Generate a poem from user text or explicit keywords");
    generate->add_option("--data", o.data, "Prepared data directory")->required()->check(CLI::ExistingDirectory);
    generate->add_option("--ckpt", o.ckpt, "Generator checkpoint")->required()->check(CLI::ExistingFile);
    generate->add_option("--text", o.text, "User text to plan keywords from");
    generate->add_option("--keywords", o.keywords, "Comma-separated keywords, one per line (skips planning)");
    generate->add_option("--lines", o.lines)->capture_default_str();
    generate->add_option("--form", o.form, "five|seven")->capture_default_str();
    generate->add_option("--embed", o.embed, "Embedding file for keyword expansion")->check(CLI::ExistingFile);
    generate->add_option("--emotion-model", o.emotion_model, "Report the emotion of the generated poem")
        ->check(CLI::ExistingFile);
    generate->add_flag("--json", o.json);

    auto* eval = app.add_subcommand("eval", "Perplexity of a checkpoint over a pair file");
    eval->add_option("--data", o.data, "Prepared data directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--ckpt", o.ckpt, "Generator checkpoint")->required()->check(CLI::ExistingFile);
    eval->add_option("--pairs", o.pairs, "Pair file (default: <data>/pairs.txt)")->check(CLI::ExistingFile);
    eval->add_flag("--json", o.json);

    auto* temo = app.add_subcommand("train-emotion", "Train the six-class emotion classifier");
    temo->add_option("--train", o.train_tsv, "label<TAB>text file")->required()->check(CLI::ExistingFile);
    temo->add_option("--out", o.out, "Model file to write (vocab goes to <out>.vocab)")->required();
    temo->add_option("--embed", o.embed, "Pretrained embedding file")->check(CLI::ExistingFile);
    temo->add_option("--stopwords", o.stopwords)->check(CLI::ExistingFile);
    temo->add_option("--epochs", o.emo.epochs)->capture_default_str();
    temo->add_option("--batch", o.emo.batch_size)->capture_default_str();
    temo->add_option("--lr", o.emo.learning_rate)->capture_default_str();
    temo->add_option("--clip", o.emo.clip_norm)->capture_default_str();
    temo->add_option("--embed-dim", o.emo.embed_dim, "Ignored with --embed")->capture_default_str();
    temo->add_option("--hidden", o.emo.hidden)->capture_default_str();
    temo->add_option("--length", o.emo.length, "Sequence length (0: 95th percentile)")->capture_default_str();
    temo->add_flag("--no-split", o.no_split, "Train on every example instead of an 80/20 split");

    auto* emo = app.add_subcommand("emotion", "Classify text or evaluate on a labelled file");
    emo->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
    auto* text_opt = emo->add_option("--text", o.text);
    emo->add_option("--eval", o.eval_tsv)->check(CLI::ExistingFile)->excludes(text_opt);
    emo->add_option("--stopwords", o.stopwords)->check(CLI::ExistingFile);
    emo->add_flag("--json", o.json);

    try {
        auto argv = apply_config(app, args);
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(o, out);
        if (embed->parsed()) return cmd_train_embed(o, out);
        if (gen->parsed()) return cmd_train_gen(o, out);
        if (generate->parsed()) return cmd_generate(o, out, *generate);
        if (eval->parsed()) return cmd_eval(o, out);
        if (temo->parsed()) return cmd_train_emotion(o, out);
        if (emo->parsed()) return cmd_emotion(o, out);
    } catch (const HashMismatchError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace versecraft
