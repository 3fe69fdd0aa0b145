#include "versecraft/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "versecraft/error.hpp"

namespace versecraft {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using ojson = nlohmann::ordered_json;

const Tensor& Checkpoint::block(const std::string& name) const {
    for (const auto& [n, t] : blocks) {
        if (n == name) return t;
    }
    throw FormatError("checkpoint: missing block '" + name + "'");
}

bool Checkpoint::has_block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.first == name) return true;
    }
    return false;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
    ojson header = ojson::object();
    header["format"] = kCheckpointFormat;
    for (const auto& [key, value] : ckpt.header.items()) {
        if (key != "format" && key != "parameters") header[key] = value;
    }
    ojson manifest = ojson::object();
    std::size_t offset = 0;
    for (const auto& [name, t] : ckpt.blocks) {
        if (manifest.contains(name)) throw InvalidArgument("checkpoint: duplicate block '" + name + "'");
        manifest[name] = {{"shape", t.shape()}, {"offset", offset}};
        offset += t.size() * sizeof(float);
    }
    header["parameters"] = std::move(manifest);

    std::string out = header.dump();
    out += '\n';
    const std::size_t data_start = out.size();
    out.resize(data_start + offset);
    char* p = out.data() + data_start;
    for (const auto& block : ckpt.blocks) {
        for (double v : block.second.values()) {
            const float f = static_cast<float>(v);
            std::memcpy(p, &f, sizeof f);
            p += sizeof f;
        }
    }
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    const std::size_t nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw FormatError("checkpoint: missing header line");
    ojson header;
    try {
        header = ojson::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad header: ") + e.what());
    }
    if (!header.is_object() || header.value("format", "") != kCheckpointFormat) {
        throw FormatError("checkpoint: not a versecraft-ckpt v1 file");
    }
    if (!header.contains("parameters") || !header["parameters"].is_object()) {
        throw FormatError("checkpoint: missing parameter manifest");
    }
    const std::string_view data = bytes.substr(nl + 1);

    Checkpoint ckpt;
    std::size_t expected_offset = 0;
    try {
        for (const auto& [name, entry] : header["parameters"].items()) {
            auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            const auto offset = entry.at("offset").get<std::size_t>();
            if (offset != expected_offset) throw FormatError("checkpoint: block '" + name + "' at unexpected offset");
            Tensor t(shape);
            const std::size_t nbytes = t.size() * sizeof(float);
            if (offset + nbytes > data.size()) throw FormatError("checkpoint: block '" + name + "' truncated");
            const char* p = data.data() + offset;
            for (std::size_t i = 0; i < t.size(); ++i) {
                float f;
                std::memcpy(&f, p + i * sizeof f, sizeof f);
                t[i] = static_cast<double>(f);
            }
            ckpt.blocks.emplace_back(name, std::move(t));
            expected_offset += nbytes;
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad manifest: ") + e.what());
    }
    if (expected_offset != data.size()) throw FormatError("checkpoint: trailing bytes after parameter blocks");

    for (const auto& [key, value] : header.items()) {
        if (key != "format" && key != "parameters") ckpt.header[key] = value;
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const std::string bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return decode_checkpoint(ss.str());
}

void verify_vocab_hash(const Checkpoint& ckpt, const Vocab& vocab) {
    const std::string stored = ckpt.header.value("vocab_hash", "");
    if (stored != vocab.hash()) {
        throw HashMismatchError("vocab hash mismatch: artifact was built for " + stored + ", vocab file is " +
                                vocab.hash());
    }
}

void append_params(Checkpoint& ckpt, const std::vector<const Param*>& params, const std::string& prefix) {
    for (const Param* p : params) ckpt.blocks.emplace_back(prefix + p->name, p->value);
}

void restore_params(const Checkpoint& ckpt, const ParamList& params, const std::string& prefix) {
    for (Param* p : params) {
        const Tensor& t = ckpt.block(prefix + p->name);
        if (t.shape() != p->value.shape()) throw FormatError("checkpoint: shape mismatch for '" + p->name + "'");
        p->value = t;
    }
}

Checkpoint make_generator_checkpoint(const Seq2SeqModel& model, const Vocab& vocab, const TrainingState* state) {
    Checkpoint ckpt;
    const auto& d = model.dims();
    ckpt.header["kind"] = "seq2seq";
    ckpt.header["mode"] = std::string(to_string(model.mode()));
    ckpt.header["dims"] = {{"vocab", d.vocab}, {"embed", d.embed}, {"hidden", d.hidden}, {"attention", d.attention}};
    ckpt.header["vocab_hash"] = vocab.hash();
    const auto params = model.params();
    append_params(ckpt, params);
    if (state) {
        const auto& a = state->adam;
        ckpt.header["training"] = {{"epochs_completed", state->epochs_completed},
                                   {"adam_step", a.step},
                                   {"learning_rate", a.config.learning_rate},
                                   {"beta1", a.config.beta1},
                                   {"beta2", a.config.beta2},
                                   {"epsilon", a.config.epsilon}};
        if (a.m.size() != params.size() || a.v.size() != params.size()) {
            throw InvalidArgument("checkpoint: optimizer state does not match the model");
        }
        for (std::size_t i = 0; i < params.size(); ++i) ckpt.blocks.emplace_back("adam.m." + params[i]->name, a.m[i]);
        for (std::size_t i = 0; i < params.size(); ++i) ckpt.blocks.emplace_back("adam.v." + params[i]->name, a.v[i]);
    }
    return ckpt;
}

LoadedGenerator read_generator_checkpoint(const Checkpoint& ckpt, const Vocab& vocab) {
    if (ckpt.header.value("kind", "") != "seq2seq") throw FormatError("checkpoint: not a generator checkpoint");
    verify_vocab_hash(ckpt, vocab);
    ModelDims dims;
    DecoderMode mode;
    try {
        const auto& d = ckpt.header.at("dims");
        dims.vocab = d.at("vocab").get<std::size_t>();
        dims.embed = d.at("embed").get<std::size_t>();
        dims.hidden = d.at("hidden").get<std::size_t>();
        dims.attention = d.at("attention").get<std::size_t>();
        mode = parse_decoder_mode(ckpt.header.at("mode").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad header: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    if (dims.vocab != vocab.size()) throw HashMismatchError("checkpoint: vocab size differs from the vocab file");

    LoadedGenerator out{Seq2SeqModel(dims, mode), std::nullopt};
    auto params = out.model.params();
    restore_params(ckpt, params);

    if (ckpt.header.contains("training")) {
        const auto& tr = ckpt.header["training"];
        TrainingState st;
        try {
            st.epochs_completed = tr.at("epochs_completed").get<std::size_t>();
            AdamConfig cfg{tr.at("learning_rate").get<double>(), tr.at("beta1").get<double>(),
                           tr.at("beta2").get<double>(), tr.at("epsilon").get<double>()};
            st.adam = AdamState(params, cfg);
            st.adam.step = tr.at("adam_step").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("checkpoint: bad training state: ") + e.what());
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            st.adam.m[i] = ckpt.block("adam.m." + params[i]->name);
            st.adam.v[i] = ckpt.block("adam.v." + params[i]->name);
            if (st.adam.m[i].shape() != params[i]->value.shape() || st.adam.v[i].shape() != params[i]->value.shape()) {
                throw FormatError("checkpoint: optimizer moment shape mismatch for '" + params[i]->name + "'");
            }
        }
        out.state = std::move(st);
    }
    return out;
}

void save_generator(const std::filesystem::path& path, const Seq2SeqModel& model, const Vocab& vocab,
                    const TrainingState* state) {
    save_checkpoint(make_generator_checkpoint(model, vocab, state), path);
}

LoadedGenerator load_generator(const std::filesystem::path& path, const Vocab& vocab) {
    return read_generator_checkpoint(load_checkpoint(path), vocab);
}

}  // namespace versecraft
