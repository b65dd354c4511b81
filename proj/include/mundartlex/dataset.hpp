#pragma once

// Training pairs for p2g/g2p, their TSV format and deterministic splits.
//
// Pair TSV: `src<TAB>tgt[<TAB>dialect[<TAB>headword]]`. Columns are oriented
// by direction: for p2g src is space-separated phones and tgt a raw written
// form; for g2p src is the raw written form and tgt space-separated phones.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/fileio.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/text.hpp"
#include "mundartlex/train.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

struct LabeledPair {
    std::string src;  // surface text of the source side
    std::string tgt;
    std::optional<Dialect> dialect;  // metadata only, never a model input
    std::string headword;

    TokenPair tokens(Direction dir) const { return {tokenize_source(dir, src), tokenize_target(dir, tgt)}; }
    friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

inline std::vector<LabeledPair> parse_pairs(std::string_view contents) {
    std::vector<LabeledPair> out;
    std::size_t line_no = 0;
    for (auto line : text::split(contents, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line.front() == '#') continue;
        const auto f = text::split(line, '\t');
        if (f.size() < 2 || f.size() > 4) throw ParseError("expected src<TAB>tgt[<TAB>dialect[<TAB>headword]]", line_no);
        if (text::trim(f[0]).empty() || text::trim(f[1]).empty()) throw ParseError("empty source or target", line_no);
        LabeledPair p{f[0], f[1], std::nullopt, {}};
        if (f.size() >= 3 && !f[2].empty()) {
            p.dialect = try_parse_dialect(f[2]);
            if (!p.dialect) throw ParseError("unknown dialect code '" + f[2] + "'", line_no);
        }
        if (f.size() == 4) p.headword = f[3];
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<LabeledPair> load_pairs(const std::string& path) { return parse_pairs(text::read_file(path)); }

inline std::string format_pairs(const std::vector<LabeledPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += p.src + "\t" + p.tgt;
        if (p.dialect || !p.headword.empty()) out += "\t" + (p.dialect ? std::string(dialect_code(*p.dialect)) : "");
        if (!p.headword.empty()) out += "\t" + p.headword;
        out += '\n';
    }
    return out;
}

/// One pair per (entry, GSW); dialects are pooled.
inline std::vector<LabeledPair> pairs_from_lexicon(const Lexicon& lex, Direction dir) {
    std::vector<LabeledPair> out;
    for (const auto& e : lex.entries())
        for (const auto& g : e.gsws) {
            if (g.text.empty()) continue;
            const auto sampa = format_sampa(e.sampa);
            if (dir == Direction::p2g) {
                out.push_back({sampa, g.text, e.dialect, e.headword});
            } else {
                out.push_back({g.text, sampa, e.dialect, e.headword});
            }
        }
    return out;
}

struct SplitFractions {
    double train = 1.0, valid = 0.0, test = 0.0;
};

/// Parses "train:valid:test" (weights, normalized to sum 1).
inline SplitFractions parse_split(std::string_view spec) {
    const auto parts = text::split(spec, ':');
    if (parts.size() != 3) throw ParseError("split must look like train:valid:test");
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) {
        try {
            std::size_t used = 0;
            v[i] = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("bad split weight '" + parts[i] + "'");
        }
        if (!(v[i] >= 0.0)) throw ParseError("split weights must be non-negative");
    }
    const double sum = v[0] + v[1] + v[2];
    if (!(sum > 0.0) || v[0] == 0.0) throw ParseError("split needs a non-empty training part");
    return {v[0] / sum, v[1] / sum, v[2] / sum};
}

struct DataSplit {
    std::vector<LabeledPair> train, valid, test;
};

/// Seeded shuffle, then valid and test sizes rounded from the fractions.
inline DataSplit split_pairs(std::vector<LabeledPair> pairs, const SplitFractions& f, std::uint64_t seed) {
    Rng rng(seed ^ 0xD1B54A32D192ED03ULL);
    rng.shuffle(pairs.begin(), pairs.end());
    const auto n = pairs.size();
    auto rounded = [n](double frac) { return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n))); };
    const std::size_t n_valid = std::min(n, rounded(f.valid));
    const std::size_t n_test = std::min(n - n_valid, rounded(f.test));
    DataSplit s;
    s.valid.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(n_valid));
    s.test.assign(pairs.begin() + static_cast<std::ptrdiff_t>(s.valid.size()),
                  pairs.begin() + static_cast<std::ptrdiff_t>(s.valid.size() + n_test));
    s.train.assign(pairs.begin() + static_cast<std::ptrdiff_t>(s.valid.size() + n_test), pairs.end());
    return s;
}

inline std::vector<Example> make_examples(const Vocab& src, const Vocab& tgt, const std::vector<LabeledPair>& pairs,
                                          Direction dir) {
    std::vector<Example> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(make_example(src, tgt, p.tokens(dir)));
    return out;
}

inline std::vector<TokenPair> token_pairs(const std::vector<LabeledPair>& pairs, Direction dir) {
    std::vector<TokenPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.tokens(dir));
    return out;
}

}  // namespace mundartlex
