#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/text.hpp"

namespace mundartlex {

using TokenId = int;

inline constexpr TokenId pad_id = 0;
inline constexpr TokenId bos_id = 1;
inline constexpr TokenId eos_id = 2;
inline constexpr TokenId unk_id = 3;
inline constexpr std::size_t num_specials = 4;

/// Token <-> id mapping with the four specials at fixed indices.
class Vocab {
public:
    Vocab() : tokens_{"<pad>", "<s>", "</s>", "<unk>"} { rebuild_index(); }

    /// Specials are prepended; `tokens` must not repeat or contain them.
    explicit Vocab(const std::vector<std::string>& tokens) : Vocab() {
        for (const auto& t : tokens) {
            if (index_.contains(t)) throw ValidationError("duplicate vocabulary token '" + t + "'");
            index_.emplace(t, static_cast<TokenId>(tokens_.size()));
            tokens_.push_back(t);
        }
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

    TokenId lookup(std::string_view token) const {
        const auto it = index_.find(token);
        return it == index_.end() ? unk_id : it->second;
    }
    bool contains(std::string_view token) const { return index_.contains(token); }

    /// Non-special tokens in id order.
    std::vector<std::string> regular_tokens() const {
        return {tokens_.begin() + static_cast<std::ptrdiff_t>(num_specials), tokens_.end()};
    }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<TokenId>(i));
    }

    std::vector<std::string> tokens_;
    std::map<std::string, TokenId, std::less<>> index_;
};

enum class Direction { p2g, g2p };

inline std::string_view direction_name(Direction d) { return d == Direction::p2g ? "p2g" : "g2p"; }

inline Direction parse_direction(std::string_view s) {
    if (s == "p2g") return Direction::p2g;
    if (s == "g2p") return Direction::g2p;
    throw ParseError("unknown direction '" + std::string(s) + "' (expected p2g or g2p)");
}

/// Phones are space-separated; written forms are split into characters
/// (spaces kept as tokens).
inline std::vector<std::string> tokenize_phones(std::string_view s) { return text::split_ws(s); }
inline std::vector<std::string> tokenize_chars(std::string_view s) { return text::utf8_chars(s); }

inline std::string detokenize_phones(const std::vector<std::string>& toks) { return text::join(toks, " "); }
inline std::string detokenize_chars(const std::vector<std::string>& toks) { return text::join(toks, ""); }

/// Tokenizer for the source side of a model running in `dir`.
inline std::vector<std::string> tokenize_source(Direction dir, std::string_view s) {
    return dir == Direction::p2g ? tokenize_phones(s) : tokenize_chars(s);
}
inline std::vector<std::string> tokenize_target(Direction dir, std::string_view s) {
    return dir == Direction::p2g ? tokenize_chars(s) : tokenize_phones(s);
}
inline std::string detokenize_target(Direction dir, const std::vector<std::string>& toks) {
    return dir == Direction::p2g ? detokenize_chars(toks) : detokenize_phones(toks);
}

struct TokenPair {
    std::vector<std::string> src;
    std::vector<std::string> tgt;
};

/// Source and target vocabularies over the distinct tokens of `pairs`, each
/// sorted lexicographically (byte order) after the specials.
inline std::pair<Vocab, Vocab> build_vocabs(const std::vector<TokenPair>& pairs) {
    if (pairs.empty()) throw ValidationError("cannot build vocabularies from an empty pair list");
    std::set<std::string> src, tgt;
    for (const auto& p : pairs) {
        src.insert(p.src.begin(), p.src.end());
        tgt.insert(p.tgt.begin(), p.tgt.end());
    }
    return {Vocab({src.begin(), src.end()}), Vocab({tgt.begin(), tgt.end()})};
}

inline std::vector<TokenId> encode_tokens(const Vocab& v, const std::vector<std::string>& toks) {
    std::vector<TokenId> ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) ids.push_back(v.lookup(t));
    return ids;
}

}  // namespace mundartlex
