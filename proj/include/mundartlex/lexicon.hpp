#pragma once

// Dictionary data model: standard German headwords mapped to per-dialect SAMPA
// pronunciations and spontaneous Swiss German writings (GSWs).

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mundartlex/edit_distance.hpp"
#include "mundartlex/error.hpp"
#include "mundartlex/fileio.hpp"
#include "mundartlex/phoneset.hpp"
#include "mundartlex/text.hpp"

namespace mundartlex {

enum class Dialect { ZH, SG, BS, BE, VS, NW };

inline constexpr std::array<Dialect, 6> all_dialects{Dialect::ZH, Dialect::SG, Dialect::BS,
                                                     Dialect::BE, Dialect::VS, Dialect::NW};

inline std::string_view dialect_code(Dialect d) {
    switch (d) {
        case Dialect::ZH: return "ZH";
        case Dialect::SG: return "SG";
        case Dialect::BS: return "BS";
        case Dialect::BE: return "BE";
        case Dialect::VS: return "VS";
        case Dialect::NW: return "NW";
    }
    return "??";
}

inline std::string_view dialect_name(Dialect d) {
    switch (d) {
        case Dialect::ZH: return "Zurich";
        case Dialect::SG: return "St. Gallen";
        case Dialect::BS: return "Basel";
        case Dialect::BE: return "Bern";
        case Dialect::VS: return "Visp";
        case Dialect::NW: return "Stans";
    }
    return "?";
}

inline std::optional<Dialect> try_parse_dialect(std::string_view code) {
    for (auto d : all_dialects)
        if (dialect_code(d) == code) return d;
    return std::nullopt;
}

inline Dialect parse_dialect(std::string_view code) {
    if (auto d = try_parse_dialect(code)) return *d;
    throw ParseError("unknown dialect code '" + std::string(code) + "'");
}

enum class GswSource { manual, generated };

/// A written Swiss German form.
struct GswForm {
    std::string text;
    GswSource source = GswSource::generated;
    std::optional<int> rank;  // for generated forms

    friend bool operator==(const GswForm&, const GswForm&) = default;

    std::size_t space_count() const { return static_cast<std::size_t>(std::count(text.begin(), text.end(), ' ')); }
};

// TSV cell syntax: `text`, `text@m` (manual) or `text@g3` (generated, rank 3).
inline GswForm parse_gsw_cell(std::string_view cell) {
    GswForm g;
    const auto at = cell.rfind('@');
    if (at == std::string_view::npos) {
        g.text = std::string(cell);
        return g;
    }
    g.text = std::string(cell.substr(0, at));
    const auto tag = cell.substr(at + 1);
    if (tag == "m") {
        g.source = GswSource::manual;
    } else if (!tag.empty() && tag.front() == 'g') {
        if (tag.size() > 1) {
            const std::string digits{tag.substr(1)};
            if (digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6)
                throw ParseError("bad GSW rank in '" + std::string(cell) + "'");
            g.rank = std::stoi(digits);
            if (*g.rank < 1) throw ParseError("GSW rank must be positive in '" + std::string(cell) + "'");
        }
    } else {
        throw ParseError("bad GSW annotation in '" + std::string(cell) + "'");
    }
    return g;
}

inline std::string format_gsw_cell(const GswForm& g) {
    if (g.source == GswSource::manual) return g.text + "@m";
    if (g.rank) return g.text + "@g" + std::to_string(*g.rank);
    return g.text;
}

struct DictEntry {
    std::string headword;
    Dialect dialect = Dialect::ZH;
    SampaSeq sampa;
    std::vector<GswForm> gsws;

    friend bool operator==(const DictEntry&, const DictEntry&) = default;
};

struct ValidationReport {
    struct Check {
        std::string name;
        std::size_t count = 0;
        std::vector<std::string> examples;  // first few offending items
    };
    std::vector<Check> checks;

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.count == 0; });
    }
    std::size_t count(std::string_view name) const {
        for (const auto& c : checks)
            if (c.name == name) return c.count;
        return 0;
    }
    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;

    /// `CHECK<TAB>count` lines.
    std::string to_tsv() const {
        std::string out;
        for (const auto& c : checks) out += c.name + "\t" + std::to_string(c.count) + "\n";
        return out;
    }

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& c : checks) {
            os << (c.count == 0 ? "ok    " : "FAIL  ") << c.name << ": " << c.count << "\n";
            for (const auto& e : c.examples) os << "        " << e << "\n";
        }
        os << (ok() ? "lexicon is valid\n" : "lexicon has violations\n");
        return os.str();
    }
};

/// Immutable dictionary. Entries keep file order; the index maps
/// headword -> dialect -> entry positions.
class Lexicon {
public:
    using Index = std::map<std::string, std::map<Dialect, std::vector<std::size_t>>, std::less<>>;

    Lexicon() : inventory_(std::make_shared<const PhoneInventory>()) {}

    Lexicon(std::vector<DictEntry> entries, std::shared_ptr<const PhoneInventory> inventory,
            std::size_t duplicate_warnings = 0)
        : entries_(std::move(entries)), inventory_(std::move(inventory)), duplicate_warnings_(duplicate_warnings) {
        for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].headword][entries_[i].dialect].push_back(i);
    }

    const std::vector<DictEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const PhoneInventory& inventory() const noexcept { return *inventory_; }
    std::shared_ptr<const PhoneInventory> inventory_ptr() const noexcept { return inventory_; }
    std::size_t duplicate_warnings() const noexcept { return duplicate_warnings_; }
    const Index& index() const noexcept { return index_; }

    std::vector<const DictEntry*> lookup(std::string_view headword, Dialect d) const {
        std::vector<const DictEntry*> out;
        const auto h = index_.find(headword);
        if (h == index_.end()) return out;
        const auto it = h->second.find(d);
        if (it == h->second.end()) return out;
        for (auto i : it->second) out.push_back(&entries_[i]);
        return out;
    }

private:
    std::vector<DictEntry> entries_;
    std::shared_ptr<const PhoneInventory> inventory_;
    std::size_t duplicate_warnings_ = 0;
    Index index_;
};

inline constexpr std::string_view lexicon_header = "headword\tdialect\tsampa\tgsws";

/// Parses dictionary TSV. Rows with an identical (headword, dialect, sampa)
/// triple are collapsed into one entry (GSW lists merged) and counted.
inline Lexicon parse_lexicon(std::string_view contents, std::shared_ptr<const PhoneInventory> inv,
                             ParseMode mode = ParseMode::strict) {
    std::vector<DictEntry> entries;
    std::map<std::tuple<std::string, Dialect, std::string>, std::size_t> seen;
    std::size_t duplicates = 0;
    std::size_t line_no = 0;
    for (auto line : text::split(contents, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line.front() == '#') continue;
        if (line == lexicon_header) continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() < 3 || fields.size() > 4)
            throw ParseError("expected 4 tab-separated columns, got " + std::to_string(fields.size()), line_no);
        DictEntry e;
        e.headword = fields[0];
        if (e.headword.empty()) throw ParseError("empty headword", line_no);
        auto d = try_parse_dialect(fields[1]);
        if (!d) throw ParseError("unknown dialect code '" + fields[1] + "'", line_no);
        e.dialect = *d;
        try {
            e.sampa = parse_sampa(fields[2], *inv, mode);
            if (fields.size() == 4 && !fields[3].empty())
                for (const auto& cell : text::split(fields[3], '|')) e.gsws.push_back(parse_gsw_cell(cell));
        } catch (const ParseError& err) {
            throw ParseError(err.what(), line_no);
        } catch (const ValidationError& err) {
            throw ParseError(err.what(), line_no);
        }
        auto key = std::make_tuple(e.headword, e.dialect, format_sampa(e.sampa));
        if (const auto it = seen.find(key); it != seen.end()) {
            ++duplicates;
            auto& kept = entries[it->second].gsws;
            for (auto& g : e.gsws)
                if (std::find(kept.begin(), kept.end(), g) == kept.end()) kept.push_back(std::move(g));
            continue;
        }
        seen.emplace(std::move(key), entries.size());
        entries.push_back(std::move(e));
    }
    return Lexicon(std::move(entries), std::move(inv), duplicates);
}

inline Lexicon load_lexicon(const std::string& path, std::shared_ptr<const PhoneInventory> inv,
                            ParseMode mode = ParseMode::strict) {
    return parse_lexicon(text::read_file(path), std::move(inv), mode);
}

inline Lexicon load_lexicon(const std::string& path, const PhoneInventory& inv, ParseMode mode = ParseMode::strict) {
    return load_lexicon(path, std::make_shared<const PhoneInventory>(inv), mode);
}

inline std::string format_lexicon(const Lexicon& lex) {
    std::string out{lexicon_header};
    out += '\n';
    for (const auto& e : lex.entries()) {
        out += e.headword;
        out += '\t';
        out += dialect_code(e.dialect);
        out += '\t';
        out += format_sampa(e.sampa);
        out += '\t';
        for (std::size_t i = 0; i < e.gsws.size(); ++i) {
            if (i) out += '|';
            out += format_gsw_cell(e.gsws[i]);
        }
        out += '\n';
    }
    return out;
}

/// Pure: reports violation counts without throwing.
inline ValidationReport validate(const Lexicon& lex) {
    constexpr std::size_t max_examples = 5;
    ValidationReport::Check casing{"casing"}, dup{"duplicate_triple"}, empty{"empty_gsw"}, dup_gsw{"duplicate_gsw"},
        spacing{"gsw_spacing"}, inv{"inventory_mismatch"};
    auto flag = [&](ValidationReport::Check& c, std::string msg) {
        ++c.count;
        if (c.examples.size() < max_examples) c.examples.push_back(std::move(msg));
    };

    std::set<std::tuple<std::string, Dialect, std::string>> triples;
    for (const auto& e : lex.entries()) {
        const auto where = e.headword + "/" + std::string(dialect_code(e.dialect));
        if (e.headword.empty() || text::has_upper(e.headword)) flag(casing, "headword '" + e.headword + "'");
        if (!triples.emplace(e.headword, e.dialect, format_sampa(e.sampa)).second)
            flag(dup, where + " " + format_sampa(e.sampa));
        std::set<std::string> texts;
        for (const auto& g : e.gsws) {
            if (g.text.empty()) {
                flag(empty, where);
                continue;
            }
            if (text::has_upper(g.text)) flag(casing, where + " gsw '" + g.text + "'");
            if (g.text.front() == ' ' || g.text.back() == ' ' || g.text.find("  ") != std::string::npos ||
                g.text.find_first_of("\t\r\n") != std::string::npos)
                flag(spacing, where + " gsw '" + g.text + "'");
            if (!texts.insert(g.text).second) flag(dup_gsw, where + " gsw '" + g.text + "'");
        }
        bool bad = e.sampa.empty();
        for (const auto& p : e.sampa.phones)
            if (!lex.inventory().contains(p)) bad = true;
        if (bad) flag(inv, where + " '" + format_sampa(e.sampa) + "'");
    }
    return ValidationReport{{casing, dup, empty, dup_gsw, spacing, inv}};
}

namespace detail {

inline std::vector<char32_t> folded_chars(std::string_view s) {
    std::vector<char32_t> out;
    for (const auto& ch : text::utf8_chars(s))
        if (ch != " ") out.push_back(text::to_lower(text::code_point(ch)));
    return out;
}

inline std::vector<char32_t> folded_chars(const std::vector<Phone>& phones, std::size_t from, std::size_t to) {
    std::vector<char32_t> out;
    for (std::size_t i = from; i < to; ++i) {
        auto part = folded_chars(phones[i].symbol());
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace detail

/// Inserts one boundary phone "_" per space of `gsw`.
///
/// Splits left to right: the first written word is aligned against every
/// admissible phone prefix and the split minimizing
/// editdist(word, prefix) + editdist(rest, suffix) wins, ties going to the
/// leftmost split. Characters are compared case-folded; spaces inside the rest
/// are ignored when scoring.
inline SampaSeq insert_boundaries(const SampaSeq& sampa, const GswForm& gsw) {
    for (const auto& p : sampa.phones)
        if (p.is_boundary()) throw ValidationError("SAMPA already contains a boundary: " + format_sampa(sampa));
    const auto words = text::split(gsw.text, ' ');
    for (const auto& w : words)
        if (w.empty()) throw ValidationError("GSW '" + gsw.text + "' has leading, trailing or repeated spaces");
    const std::size_t k = words.size() - 1;
    if (k == 0) return sampa;
    if (k >= sampa.size())
        throw ValidationError("cannot place " + std::to_string(k) + " boundaries in " + std::to_string(sampa.size()) +
                              " phones");

    SampaSeq out;
    out.inventory_name = sampa.inventory_name;
    const auto& ph = sampa.phones;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < k; ++w) {
        const auto left = detail::folded_chars(words[w]);
        std::string rest_text;
        for (std::size_t r = w + 1; r < words.size(); ++r) rest_text += words[r];
        const auto rest = detail::folded_chars(rest_text);
        const std::size_t remaining = k - w;  // boundaries still to place, including this one
        std::size_t best_split = begin + 1;
        std::size_t best_cost = std::numeric_limits<std::size_t>::max();
        for (std::size_t split = begin + 1; split + remaining <= ph.size(); ++split) {
            const auto cost = edit_distance(left, detail::folded_chars(ph, begin, split)) +
                              edit_distance(rest, detail::folded_chars(ph, split, ph.size()));
            if (cost < best_cost) {
                best_cost = cost;
                best_split = split;
            }
        }
        out.phones.insert(out.phones.end(), ph.begin() + static_cast<std::ptrdiff_t>(begin),
                          ph.begin() + static_cast<std::ptrdiff_t>(best_split));
        out.phones.push_back(boundary_phone());
        begin = best_split;
    }
    out.phones.insert(out.phones.end(), ph.begin() + static_cast<std::ptrdiff_t>(begin), ph.end());
    return out;
}

enum class PhonesetVersion { extended, reduced };

/// Serializes the lexicon, reducing every SAMPA first for the reduced version.
inline std::string render_export(const Lexicon& lex, PhonesetVersion version, const ReductionRules* rules = nullptr) {
    if (version == PhonesetVersion::extended) return format_lexicon(lex);
    if (!rules) throw ValidationError("reduced export requires reduction rules");
    std::vector<DictEntry> reduced;
    reduced.reserve(lex.size());
    for (const auto& e : lex.entries()) {
        DictEntry r = e;
        try {
            r.sampa = reduce_sequence(e.sampa, *rules);
        } catch (const ValidationError& err) {
            throw ValidationError("cannot reduce entry '" + e.headword + "' (" + std::string(dialect_code(e.dialect)) +
                                  "): " + err.what());
        }
        reduced.push_back(std::move(r));
    }
    return format_lexicon(Lexicon(std::move(reduced),
                                  std::make_shared<const PhoneInventory>(rules->reduced_inventory())));
}

inline void export_lexicon(const Lexicon& lex, const std::string& path, PhonesetVersion version,
                           const ReductionRules* rules = nullptr) {
    write_file_atomic(path, render_export(lex, version, rules));
}

}  // namespace mundartlex
