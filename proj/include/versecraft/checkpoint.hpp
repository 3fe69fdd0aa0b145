#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "versecraft/corpus.hpp"
#include "versecraft/optim.hpp"
#include "versecraft/seq2seq.hpp"
#include "versecraft/tensor.hpp"

namespace versecraft {

inline constexpr std::string_view kCheckpointFormat = "versecraft-ckpt v1";

/// Generic container: one JSON header line, then raw little-endian float32
/// blocks. The header's "parameters" object maps each block name to its
/// shape and byte offset from the start of the data section.
struct Checkpoint {
    nlohmann::ordered_json header = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, Tensor>> blocks;

    const Tensor& block(const std::string& name) const;
    bool has_block(const std::string& name) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws HashMismatchError unless the header's vocab_hash equals vocab.hash().
void verify_vocab_hash(const Checkpoint& ckpt, const Vocab& vocab);

/// Optimizer position saved alongside the weights so training can resume.
struct TrainingState {
    std::size_t epochs_completed = 0;
    AdamState adam;
};

Checkpoint make_generator_checkpoint(const Seq2SeqModel& model, const Vocab& vocab,
                                     const TrainingState* state = nullptr);

struct LoadedGenerator {
    Seq2SeqModel model;
    std::optional<TrainingState> state;
};

/// Verifies the vocab hash and the manifest, then rebuilds the model.
LoadedGenerator read_generator_checkpoint(const Checkpoint& ckpt, const Vocab& vocab);

void save_generator(const std::filesystem::path& path, const Seq2SeqModel& model, const Vocab& vocab,
                    const TrainingState* state = nullptr);
LoadedGenerator load_generator(const std::filesystem::path& path, const Vocab& vocab);

/// Copies named blocks into params (shapes must match exactly).
void restore_params(const Checkpoint& ckpt, const ParamList& params, const std::string& prefix = {});
void append_params(Checkpoint& ckpt, const std::vector<const Param*>& params, const std::string& prefix = {});

}  // namespace versecraft
