#pragma once

// Exact-match reports over rank-1 predictions and rank-accuracy tables over
// human tags. Percentages are computed from integer counts and rounded half-up,
// so printed values never depend on floating-point accumulation order.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mundartlex/edit_distance.hpp"
#include "mundartlex/error.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/tags.hpp"
#include "mundartlex/text.hpp"
#include "mundartlex/vocab.hpp"

namespace mundartlex {

/// `num / den` as a decimal string with at most `decimals` places, rounded
/// half-up, trailing zeros (and a bare point) trimmed: 6688/100 → "66.88",
/// 510/10 → "51".
inline std::string format_ratio(std::uint64_t num, std::uint64_t den, int decimals) {
    if (den == 0) return "0";
    std::uint64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const std::uint64_t scaled = (2 * num * scale + den) / (2 * den);
    std::string s = std::to_string(scaled / scale);
    if (decimals > 0) {
        std::string frac = std::to_string(scaled % scale);
        frac.insert(0, static_cast<std::size_t>(decimals) - frac.size(), '0');
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
        if (!frac.empty()) s += "." + frac;
    }
    return s;
}

// ---- exact match ----------------------------------------------------------

struct MatchPair {
    std::string prediction;
    std::string reference;
    std::optional<Dialect> dialect;
};

struct MatchGroup {
    std::string name;  // "all" or a dialect code
    std::size_t n_pairs = 0;
    std::size_t n_exact = 0;
    std::size_t distance_sum = 0;

    double mean_distance() const { return n_pairs ? static_cast<double>(distance_sum) / static_cast<double>(n_pairs) : 0.0; }
    friend bool operator==(const MatchGroup&, const MatchGroup&) = default;
};

struct MatchReport {
    std::string system;  // label for comparison tables
    std::vector<MatchGroup> groups;  // "all" first, then dialects in canonical order

    const MatchGroup* find(std::string_view name) const {
        for (const auto& g : groups)
            if (g.name == name) return &g;
        return nullptr;
    }
};

/// Distances are counted on the target tokens of `dir` (characters for p2g,
/// phones for g2p).
inline MatchReport exact_match_report(const std::vector<MatchPair>& pairs, Direction dir, std::string system = "model") {
    MatchReport report{std::move(system), {}};
    MatchGroup all{"all"};
    std::map<Dialect, MatchGroup> by_dialect;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const auto ref = tokenize_target(dir, p.reference);
        if (ref.empty()) throw ValidationError("missing reference for pair " + std::to_string(i + 1));
        const std::size_t d = edit_distance(tokenize_target(dir, p.prediction), ref);
        auto add = [d](MatchGroup& g) {
            ++g.n_pairs;
            g.n_exact += d == 0;
            g.distance_sum += d;
        };
        add(all);
        if (p.dialect) {
            auto& g = by_dialect[*p.dialect];
            g.name = std::string(dialect_code(*p.dialect));
            add(g);
        }
    }
    report.groups.push_back(all);
    for (auto d : all_dialects)
        if (auto it = by_dialect.find(d); it != by_dialect.end()) report.groups.push_back(it->second);
    return report;
}

inline std::string match_reports_tsv(const std::vector<MatchReport>& reports) {
    std::string out = "system\tgroup\tn_pairs\tn_exact\tmean_distance\n";
    for (const auto& r : reports)
        for (const auto& g : r.groups)
            out += r.system + "\t" + g.name + "\t" + std::to_string(g.n_pairs) + "\t" + std::to_string(g.n_exact) + "\t" +
                   format_ratio(g.distance_sum, g.n_pairs, 3) + "\n";
    return out;
}

inline nlohmann::json match_reports_json(const std::vector<MatchReport>& reports) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : r.groups)
            groups.push_back({{"group", g.name},
                              {"n_pairs", g.n_pairs},
                              {"n_exact", g.n_exact},
                              {"mean_distance", g.mean_distance()}});
        out.push_back({{"system", r.system}, {"groups", groups}});
    }
    return out;
}

/// Aligned table, one column per system.
inline std::string match_reports_text(const std::vector<MatchReport>& reports) {
    std::vector<std::string> names;
    for (const auto& r : reports)
        for (const auto& g : r.groups)
            if (std::find(names.begin(), names.end(), g.name) == names.end()) names.push_back(g.name);
    std::ostringstream os;
    os << "group";
    for (const auto& r : reports) os << "\t" << r.system;
    os << "\n";
    for (const auto& n : names) {
        os << n;
        for (const auto& r : reports) {
            const auto* g = r.find(n);
            os << "\t" << (g ? std::to_string(g->n_exact) + "/" + std::to_string(g->n_pairs) : "-");
        }
        os << "\n";
    }
    return os.str();
}

// ---- rank accuracy ----------------------------------------------------------

struct RankRow {
    Dialect dialect = Dialect::ZH;
    std::string annotator;  // empty in the pooled view
    std::size_t items = 0;  // (headword, annotator) rows
    std::vector<std::size_t> correct;  // per rank, index 0 = rank 1

    /// Percentage at 1-based `rank`, one decimal.
    std::string percent(int rank) const {
        return format_ratio(100 * correct.at(static_cast<std::size_t>(rank - 1)), items, 1);
    }
    /// Mean of the unrounded per-rank percentages, two decimals.
    std::string total() const {
        std::uint64_t sum = 0;
        for (auto c : correct) sum += c;
        return format_ratio(100 * sum, items * correct.size(), 2);
    }
    double percent_value(int rank) const { return std::stod(percent(rank)); }
    double total_value() const { return std::stod(total()); }

    friend bool operator==(const RankRow&, const RankRow&) = default;
};

struct RankTable {
    int top_k = 5;
    bool per_annotator = false;
    std::vector<RankRow> rows;          // dialects in canonical order, then annotator
    std::size_t skipped_incomplete = 0;  // items left out by skip_incomplete

    const RankRow* find(Dialect d, std::string_view annotator = {}) const {
        for (const auto& r : rows)
            if (r.dialect == d && r.annotator == annotator) return &r;
        return nullptr;
    }
    friend bool operator==(const RankTable&, const RankTable&) = default;
};

struct RankOptions {
    int top_k = 5;
    bool per_annotator = false;   // one row per (dialect, annotator) instead of pooled
    bool skip_incomplete = false;  // drop items lacking some rank instead of failing
};

/// Every (headword, dialect, annotator) is one item and must carry exactly one
/// tag for each rank 1..top_k.
inline RankTable rank_accuracy(const std::vector<TagRecord>& tags, const RankOptions& opt = {}) {
    if (opt.top_k < 1) throw ValidationError("top_k must be >= 1");
    const auto k = static_cast<std::size_t>(opt.top_k);
    using Key = std::tuple<Dialect, std::string, std::string>;  // dialect, annotator, headword
    std::map<Key, std::vector<int>> items;  // tag per rank, -1 = missing
    for (const auto& t : tags) {
        check_tag_record(t);
        auto& ranks = items.try_emplace(Key{t.dialect, t.annotator, t.headword}, k, -1).first->second;
        if (t.rank > opt.top_k)
            throw ValidationError("rank " + std::to_string(t.rank) + " exceeds top_k for " + t.headword + "/" +
                                  std::string(dialect_code(t.dialect)) + "/" + t.annotator);
        auto& slot = ranks[static_cast<std::size_t>(t.rank - 1)];
        if (slot != -1)
            throw ValidationError("duplicate tag at rank " + std::to_string(t.rank) + " for " + t.headword + "/" +
                                  std::string(dialect_code(t.dialect)) + "/" + t.annotator);
        slot = t.tag;
    }

    RankTable table{opt.top_k, opt.per_annotator, {}, 0};
    std::map<std::pair<Dialect, std::string>, RankRow> rows;
    std::vector<std::string> incomplete;
    for (const auto& [key, ranks] : items) {
        const auto& [dialect, annotator, headword] = key;
        if (std::find(ranks.begin(), ranks.end(), -1) != ranks.end()) {
            if (opt.skip_incomplete) {
                ++table.skipped_incomplete;
            } else {
                incomplete.push_back(headword + "/" + std::string(dialect_code(dialect)) + "/" + annotator);
            }
            continue;
        }
        auto& row = rows[{dialect, opt.per_annotator ? annotator : std::string{}}];
        if (row.correct.empty()) {
            row.dialect = dialect;
            row.annotator = opt.per_annotator ? annotator : std::string{};
            row.correct.assign(k, 0);
        }
        ++row.items;
        for (std::size_t r = 0; r < k; ++r) row.correct[r] += ranks[r] == 1;
    }
    if (!incomplete.empty()) {
        std::string msg = "incomplete rank coverage for " + std::to_string(incomplete.size()) + " item(s):";
        for (std::size_t i = 0; i < incomplete.size() && i < 10; ++i) msg += " " + incomplete[i];
        if (incomplete.size() > 10) msg += " ...";
        throw ValidationError(msg);
    }
    for (auto& [_, row] : rows) table.rows.push_back(std::move(row));
    return table;
}

inline std::string rank_table_tsv(const RankTable& t) {
    std::string out = "dialect\tannotator\titems";
    for (int r = 1; r <= t.top_k; ++r) out += "\trank" + std::to_string(r);
    out += "\ttotal\n";
    for (const auto& row : t.rows) {
        out += std::string(dialect_code(row.dialect)) + "\t" + (row.annotator.empty() ? "*" : row.annotator) + "\t" +
               std::to_string(row.items);
        for (int r = 1; r <= t.top_k; ++r) out += "\t" + row.percent(r);
        out += "\t" + row.total() + "\n";
    }
    return out;
}

/// Reads back the printed numbers of rank_table_tsv (percentages as text).
struct PrintedRankRow {
    std::string dialect, annotator;
    std::size_t items = 0;
    std::vector<std::string> percents;
    std::string total;
    friend bool operator==(const PrintedRankRow&, const PrintedRankRow&) = default;
};

inline std::vector<PrintedRankRow> parse_rank_table_tsv(std::string_view tsv) {
    std::vector<PrintedRankRow> out;
    std::size_t line_no = 0;
    std::size_t width = 0;
    for (const auto& line : text::split(tsv, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = text::split(line, '\t');
        if (line_no == 1) {
            if (f.size() < 5 || f[0] != "dialect") throw ParseError("missing rank table header", line_no);
            width = f.size();
            continue;
        }
        if (f.size() != width) throw ParseError("wrong column count", line_no);
        PrintedRankRow row{f[0], f[1], 0, {f.begin() + 3, f.end() - 1}, f.back()};
        try {
            row.items = std::stoul(f[2]);
        } catch (const std::exception&) {
            throw ParseError("bad item count", line_no);
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline nlohmann::json rank_table_json(const RankTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json pct = nlohmann::json::array();
        for (int r = 1; r <= t.top_k; ++r) pct.push_back(row.percent_value(r));
        rows.push_back({{"dialect", std::string(dialect_code(row.dialect))},
                        {"annotator", row.annotator},
                        {"items", row.items},
                        {"correct", row.correct},
                        {"percent", pct},
                        {"total", row.total_value()}});
    }
    return {{"top_k", t.top_k},
            {"per_annotator", t.per_annotator},
            {"skipped_incomplete", t.skipped_incomplete},
            {"rows", rows}};
}

/// Ranks down, dialects across, as in the published table layout.
inline std::string rank_table_text(const RankTable& t) {
    std::vector<std::string> header{""};
    for (const auto& row : t.rows)
        header.push_back(std::string(dialect_name(row.dialect)) + (row.annotator.empty() ? "" : " (" + row.annotator + ")"));
    std::vector<std::vector<std::string>> lines{header};
    static constexpr const char* ordinals[] = {"1st", "2nd", "3rd"};
    for (int r = 1; r <= t.top_k; ++r) {
        std::vector<std::string> line{r <= 3 ? ordinals[r - 1] : std::to_string(r) + "th"};
        for (const auto& row : t.rows) line.push_back(row.percent(r));
        lines.push_back(std::move(line));
    }
    std::vector<std::string> total{"Total"}, items{"Items"};
    for (const auto& row : t.rows) {
        total.push_back(row.total());
        items.push_back(std::to_string(row.items));
    }
    lines.push_back(std::move(total));
    lines.push_back(std::move(items));

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& l : lines)
        for (std::size_t c = 0; c < l.size(); ++c) widths[c] = std::max(widths[c], text::utf8_chars(l[c]).size());
    std::string out;
    for (const auto& l : lines) {
        std::string s;
        for (std::size_t c = 0; c < l.size(); ++c) {
            const auto pad = widths[c] - text::utf8_chars(l[c]).size();
            if (c == 0) {
                s += l[c] + std::string(pad, ' ');
            } else {
                s += "  " + std::string(pad, ' ') + l[c];
            }
        }
        out += s + "\n";
    }
    return out;
}

}  // namespace mundartlex
