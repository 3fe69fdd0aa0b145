#pragma once

#include <string>
#include <vector>

#include "versecraft/corpus.hpp"
#include "versecraft/seq2seq.hpp"

namespace versecraft {

struct SentenceScore {
    double log_prob = 0.0;  // natural log
    std::size_t tokens = 0;
};

/// Teacher-forced log-probability of the target line plus END.
SentenceScore sentence_log_prob(const Seq2SeqModel& model, const Vocab& vocab, const TrainingPair& pair);

struct PerplexityReport {
    std::size_t n = 0;
    double log_prob = 0.0;
    double perplexity = 0.0;

    /// "N=<int> PP=<float>"
    std::string text() const;
    /// {"n":…,"log_prob":…,"perplexity":…}
    std::string json() const;
};

/// Pools tokens over all pairs: PP = exp(-Σ log p / Σ N).
PerplexityReport perplexity(const Seq2SeqModel& model, const Vocab& vocab, const std::vector<TrainingPair>& pairs);

}  // namespace versecraft
