#include "versecraft/eval.hpp"

#include <cmath>

#include <json.hpp>

#include "versecraft/error.hpp"
#include "versecraft/numfmt.hpp"

namespace versecraft {

SentenceScore sentence_log_prob(const Seq2SeqModel& model, const Vocab& vocab, const TrainingPair& pair) {
    if (pair.keyword.empty() || pair.target.empty()) throw InvalidArgument("sentence_log_prob: empty keyword or target");
    auto targets = vocab.encode(pair.target);
    targets.push_back(Vocab::kEnd);
    const auto lp = teacher_forced_log_probs(model, vocab.encode(pair.keyword), vocab.encode(pair.preceding), targets);
    SentenceScore s;
    for (double x : lp) s.log_prob += x;
    s.tokens = lp.size();
    return s;
}

std::string PerplexityReport::text() const { return "N=" + std::to_string(n) + " PP=" + format_double(perplexity); }

std::string PerplexityReport::json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["log_prob"] = log_prob;
    j["perplexity"] = perplexity;
    return j.dump();
}

PerplexityReport perplexity(const Seq2SeqModel& model, const Vocab& vocab, const std::vector<TrainingPair>& pairs) {
    if (pairs.empty()) throw InvalidArgument("perplexity: empty evaluation set");
    PerplexityReport r;
    for (const auto& p : pairs) {
        const auto s = sentence_log_prob(model, vocab, p);
        r.log_prob += s.log_prob;
        r.n += s.tokens;
    }
    r.perplexity = std::exp(-r.log_prob / static_cast<double>(r.n));
    return r;
}

}  // namespace versecraft
