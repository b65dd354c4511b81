#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "mundartlex/checkpoint.hpp"
#include "mundartlex/decode.hpp"
#include "mundartlex/error.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

struct Prediction {
    std::string output;
    double score = 0.0;
    int rank = 0;
    bool truncated = false;
};

struct PredictResult {
    std::vector<Prediction> candidates;
    std::vector<std::string> unknown_tokens;  // source tokens mapped to UNK
};

inline std::vector<std::string> detokenize_ids(const Seq2SeqModel& m, const std::vector<TokenId>& ids) {
    std::vector<std::string> toks;
    toks.reserve(ids.size());
    for (auto id : ids) toks.push_back(m.tgt_vocab.token(id));
    return toks;
}

/// Tokenizes `input` for the model's direction, beam-decodes and returns up
/// to top_k distinct output strings (duplicates merged unless disabled).
inline PredictResult predict_topk(const Seq2SeqModel& m, std::string_view input, const DecodeConfig& cfg) {
    cfg.validate();
    const auto toks = tokenize_source(m.direction, input);
    if (text::trim(input).empty() || toks.empty()) throw ValidationError("empty input");
    PredictResult result;
    std::vector<TokenId> src;
    for (const auto& t : toks) {
        const auto id = m.src_vocab.lookup(t);
        if (id == unk_id) result.unknown_tokens.push_back(t);
        src.push_back(id);
    }
    if (result.unknown_tokens.size() == toks.size()) throw ValidationError("every input token is unknown to the model");
    const auto max_len = std::min(cfg.max_decode_len, m.net.config().max_len - 1);
    if (src.size() > static_cast<std::size_t>(m.net.config().max_len))
        throw ValidationError("input longer than the model's max_len");
    DecodeConfig run = cfg;
    run.max_decode_len = std::max(1, max_len);

    const ModelScorer<double> scorer(m.net, src);
    const auto pool = beam_search_pool(scorer, run);
    std::set<std::string> seen;
    for (const auto& c : pool) {
        if (result.candidates.size() == static_cast<std::size_t>(cfg.top_k)) break;
        auto out = detokenize_target(m.direction, detokenize_ids(m, c.tokens));
        if (cfg.merge_duplicates && !seen.insert(out).second) continue;  // pool is best-first
        result.candidates.push_back({std::move(out), c.score, static_cast<int>(result.candidates.size() + 1), c.truncated});
    }
    return result;
}

/// Greedy rank-1 output string.
inline std::string predict_greedy(const Seq2SeqModel& m, std::string_view input, int max_decode_len = 32) {
    const auto toks = tokenize_source(m.direction, input);
    if (toks.empty()) throw ValidationError("empty input");
    const auto src = encode_tokens(m.src_vocab, toks);
    const ModelScorer<double> scorer(m.net, src);
    const auto c = greedy_decode(scorer, std::max(1, std::min(max_decode_len, m.net.config().max_len - 1)));
    return detokenize_target(m.direction, detokenize_ids(m, c.tokens));
}

}  // namespace mundartlex
