#pragma once

// Greedy and beam-search decoding over any next-token scorer.
//
// A scorer maps a prefix (starting with BOS) to log-probabilities over the
// target vocabulary. Only EOS and regular tokens are ever emitted; PAD, BOS
// and UNK are skipped. `max_decode_len` bounds the number of decoding steps,
// the EOS step included: finished outputs have at most max_decode_len - 1
// tokens, truncated ones exactly max_decode_len.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/transformer.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

struct DecodeConfig {
    int beam_size = 10;
    int top_k = 5;
    int max_decode_len = 32;
    double length_penalty = 0.0;
    bool merge_duplicates = true;

    void validate() const {
        if (top_k < 1 || top_k > beam_size) throw ValidationError("need 1 <= top_k <= beam_size");
        if (max_decode_len < 1) throw ValidationError("max_decode_len must be >= 1");
        if (length_penalty < 0.0) throw ValidationError("length penalty must be non-negative");
    }
};

struct Candidate {
    std::vector<TokenId> tokens;  // without BOS/EOS
    double score = 0.0;           // sum of token log-probabilities
    int rank = 0;                 // 1-based
    bool truncated = false;       // hit max_decode_len without EOS
    friend bool operator==(const Candidate&, const Candidate&) = default;
};

template <class F>
concept NextTokenScorer = requires(const F& f, std::span<const TokenId> prefix) {
    { f(prefix) } -> std::convertible_to<std::vector<double>>;
};

inline bool emittable(TokenId id) { return id == eos_id || id >= static_cast<TokenId>(num_specials); }

/// Scorer over a trained model for one source sequence.
template <class T>
class ModelScorer {
public:
    ModelScorer(const Transformer<T>& model, std::span<const TokenId> src) : model_(&model), memory_(model.encode(src)) {}

    std::vector<double> operator()(std::span<const TokenId> prefix) const {
        const auto lp = model_->next_log_probs(memory_, prefix);
        return {lp.begin(), lp.end()};
    }

private:
    const Transformer<T>* model_;
    EncoderOutput<T> memory_;
};

/// Argmax at every step, ties to the lowest token id.
template <NextTokenScorer F>
Candidate greedy_decode(const F& scorer, int max_decode_len) {
    if (max_decode_len < 1) throw ValidationError("max_decode_len must be >= 1");
    std::vector<TokenId> prefix{bos_id};
    Candidate c;
    c.rank = 1;
    for (int step = 0; step < max_decode_len; ++step) {
        const std::vector<double> lp = scorer(std::span<const TokenId>(prefix));
        TokenId best = -1;
        double best_lp = -std::numeric_limits<double>::infinity();
        for (TokenId id = 0; id < static_cast<TokenId>(lp.size()); ++id) {
            if (!emittable(id)) continue;
            if (lp[static_cast<std::size_t>(id)] > best_lp) {
                best_lp = lp[static_cast<std::size_t>(id)];
                best = id;
            }
        }
        if (best < 0) break;  // nothing emittable with finite probability
        c.score += best_lp;
        if (best == eos_id) return c;
        c.tokens.push_back(best);
        prefix.push_back(best);
    }
    c.truncated = true;
    return c;
}

namespace detail {

struct Hypothesis {
    std::vector<TokenId> tokens;  // without BOS, may end in EOS
    double score = 0.0;
};

/// Score descending, then token ids lexicographically ascending.
inline bool hypothesis_before(const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
}

inline double length_normalized(double score, std::size_t length, double alpha) {
    if (alpha == 0.0) return score;
    return score / std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

}  // namespace detail

/// Every candidate the beam retired, best first: finished hypotheses ranked
/// by (length-penalized) score, followed by hypotheses truncated at
/// max_decode_len. Ranks are left at 0.
template <NextTokenScorer F>
std::vector<Candidate> beam_search_pool(const F& scorer, const DecodeConfig& cfg) {
    cfg.validate();
    const auto beam = static_cast<std::size_t>(cfg.beam_size);
    std::vector<detail::Hypothesis> live{{}}, finished;
    std::vector<detail::Hypothesis> expansions;
    std::vector<TokenId> prefix;
    for (int step = 0; step < cfg.max_decode_len && !live.empty(); ++step) {
        expansions.clear();
        for (const auto& h : live) {
            prefix.assign(1, bos_id);
            prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
            const std::vector<double> lp = scorer(std::span<const TokenId>(prefix));
            for (TokenId id = 0; id < static_cast<TokenId>(lp.size()); ++id) {
                const double l = lp[static_cast<std::size_t>(id)];
                if (!emittable(id) || l == -std::numeric_limits<double>::infinity()) continue;
                detail::Hypothesis next{h.tokens, h.score + l};
                next.tokens.push_back(id);
                expansions.push_back(std::move(next));
            }
        }
        const std::size_t keep = std::min(beam, expansions.size());
        std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                          detail::hypothesis_before);
        live.clear();
        for (std::size_t i = 0; i < keep; ++i) {
            if (expansions[i].tokens.back() == eos_id) {
                finished.push_back(std::move(expansions[i]));
            } else {
                live.push_back(std::move(expansions[i]));
            }
        }
        // Raw scores only decrease, so once top_k finished hypotheses beat
        // every live one the ranking cannot change.
        if (cfg.length_penalty == 0.0 && !live.empty() && finished.size() >= static_cast<std::size_t>(cfg.top_k)) {
            std::vector<double> scores;
            for (const auto& f : finished) scores.push_back(f.score);
            std::nth_element(scores.begin(), scores.begin() + (cfg.top_k - 1), scores.end(), std::greater<>());
            if (live.front().score < scores[static_cast<std::size_t>(cfg.top_k - 1)]) {
                live.clear();
                break;
            }
        }
    }

    std::vector<Candidate> out;
    std::vector<std::pair<double, detail::Hypothesis*>> ranked;
    for (auto& f : finished)
        ranked.emplace_back(detail::length_normalized(f.score, f.tokens.size(), cfg.length_penalty), &f);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->tokens < b.second->tokens;
    });
    for (const auto& [_, h] : ranked) {
        Candidate c;
        c.tokens.assign(h->tokens.begin(), h->tokens.end() - 1);
        c.score = h->score;
        out.push_back(std::move(c));
    }
    std::sort(live.begin(), live.end(), detail::hypothesis_before);
    for (auto& h : live) out.push_back(Candidate{std::move(h.tokens), h.score, 0, true});
    return out;
}

/// Best `top_k` candidates with consecutive ranks from 1.
template <NextTokenScorer F>
std::vector<Candidate> beam_decode(const F& scorer, const DecodeConfig& cfg) {
    auto pool = beam_search_pool(scorer, cfg);
    if (pool.size() > static_cast<std::size_t>(cfg.top_k)) pool.resize(static_cast<std::size_t>(cfg.top_k));
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i].rank = static_cast<int>(i + 1);
    return pool;
}

}  // namespace mundartlex
