#pragma once

// SAMPA phone inventories, tokenization of space-separated SAMPA strings and
// the extended -> reduced phone-set transformation.

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mundartlex/error.hpp"
#include "mundartlex/text.hpp"

namespace mundartlex {

/// One SAMPA symbol, e.g. "l", "O:", "aI", "{" or the boundary "_".
class Phone {
public:
    Phone() = default;
    explicit Phone(std::string symbol) : symbol_(std::move(symbol)) {
        if (symbol_.empty()) throw ValidationError("empty phone symbol");
        for (char c : symbol_)
            if (text::is_space(c)) throw ValidationError("phone symbol contains whitespace: '" + symbol_ + "'");
    }

    const std::string& symbol() const noexcept { return symbol_; }
    bool is_boundary() const noexcept { return symbol_ == "_"; }

    friend auto operator<=>(const Phone&, const Phone&) = default;

private:
    std::string symbol_;
};

inline const Phone& boundary_phone() {
    static const Phone p{"_"};
    return p;
}

/// Sentinel produced by lenient parsing for tokens outside the inventory.
inline const Phone& unknown_phone() {
    static const Phone p{"<unk>"};
    return p;
}

/// A named, immutable set of phones. Iteration is lexicographic by symbol.
class PhoneInventory {
public:
    PhoneInventory() : PhoneInventory("custom", {}) {}

    /// Duplicates throw; the boundary phone is always added.
    PhoneInventory(std::string name, const std::vector<Phone>& phones, std::string version = "1")
        : name_(std::move(name)), version_(std::move(version)) {
        for (const auto& p : phones)
            if (!phones_.insert(p).second) throw ValidationError("duplicate symbol " + p.symbol());
        phones_.insert(boundary_phone());
    }

    const std::string& name() const noexcept { return name_; }
    const std::string& version() const noexcept { return version_; }
    std::size_t size() const noexcept { return phones_.size(); }
    bool contains(const Phone& p) const { return phones_.contains(p); }
    bool contains(std::string_view symbol) const {
        return std::any_of(phones_.begin(), phones_.end(), [&](const Phone& p) { return p.symbol() == symbol; });
    }
    const std::set<Phone>& phones() const noexcept { return phones_; }

private:
    std::string name_;
    std::string version_;
    std::set<Phone> phones_;
};

/// Inventory file: one symbol per line, '#' comments, blank lines ignored.
inline PhoneInventory parse_inventory(std::string_view contents, std::string name, std::string version = "1") {
    std::vector<Phone> phones;
    std::map<std::string, std::size_t, std::less<>> seen;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(contents, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const std::string symbol{line};
        if (symbol.find_first_of(" \t") != std::string::npos)
            throw ParseError("more than one symbol on a line: '" + symbol + "'", line_no);
        if (seen.contains(symbol)) throw ParseError("duplicate symbol " + symbol, line_no);
        seen.emplace(symbol, line_no);
        if (symbol != boundary_phone().symbol()) phones.emplace_back(symbol);
    }
    return PhoneInventory(std::move(name), phones, std::move(version));
}

/// Loads an inventory file. The inventory name is the file stem unless given.
inline PhoneInventory load_inventory(const std::string& path, std::string name = {}) {
    if (name.empty()) {
        auto stem = path.substr(path.find_last_of('/') + 1);
        if (const auto dot = stem.find('.'); dot != std::string::npos) stem.resize(dot);
        name = stem;
    }
    return parse_inventory(text::read_file(path), std::move(name));
}

/// An ordered phone sequence tagged with the inventory it was parsed against.
struct SampaSeq {
    std::vector<Phone> phones;
    std::string inventory_name;

    std::size_t size() const noexcept { return phones.size(); }
    bool empty() const noexcept { return phones.empty(); }
    friend bool operator==(const SampaSeq&, const SampaSeq&) = default;
};

enum class ParseMode { strict, lenient };

struct UnknownToken {
    std::string token;
    std::size_t position;  // 0-based token index
    friend bool operator==(const UnknownToken&, const UnknownToken&) = default;
};

/// Tokenizes on whitespace and matches each token whole against `inv`.
/// Strict mode throws on unknown tokens and on empty input; lenient mode maps
/// unknown tokens to unknown_phone() and records them in `unknown`.
inline SampaSeq parse_sampa(std::string_view text_in, const PhoneInventory& inv, ParseMode mode = ParseMode::strict,
                            std::vector<UnknownToken>* unknown = nullptr) {
    SampaSeq seq;
    seq.inventory_name = inv.name();
    const auto tokens = text::split_ws(text_in);
    if (tokens.empty() && mode == ParseMode::strict) throw ParseError("empty SAMPA string");
    seq.phones.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Phone p{tokens[i]};
        if (!inv.contains(p)) {
            if (mode == ParseMode::strict)
                throw ParseError("unknown phone '" + tokens[i] + "' at position " + std::to_string(i) +
                                 " (inventory " + inv.name() + ")");
            if (unknown) unknown->push_back({tokens[i], i});
            seq.phones.push_back(unknown_phone());
            continue;
        }
        seq.phones.push_back(std::move(p));
    }
    return seq;
}

inline std::string format_sampa(const SampaSeq& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.phones.size(); ++i) {
        if (i) out += ' ';
        out += seq.phones[i].symbol();
    }
    return out;
}

/// Splits one combined symbol (diphthong, geminate, ...) into its parts.
struct ReductionRule {
    Phone source;
    std::vector<Phone> targets;
    friend bool operator==(const ReductionRule&, const ReductionRule&) = default;
};

/// A validated, single-pass rule set mapping the extended inventory onto the
/// reduced one.
class ReductionRules {
public:
    ReductionRules() = default;

    ReductionRules(std::vector<ReductionRule> rules, PhoneInventory reduced) : reduced_(std::move(reduced)) {
        std::set<Phone> targets;
        for (const auto& r : rules) {
            if (r.targets.empty()) throw ValidationError("rule for " + r.source.symbol() + " has no targets");
            if (r.source.is_boundary()) throw ValidationError("the boundary phone cannot be split");
            for (const auto& t : r.targets) {
                if (!reduced_.contains(t))
                    throw ValidationError("rule target " + t.symbol() + " (from " + r.source.symbol() +
                                          ") is not in the reduced inventory");
                targets.insert(t);
            }
            if (!by_source_.emplace(r.source, r.targets).second)
                throw ValidationError("duplicate rule for " + r.source.symbol());
        }
        for (const auto& [src, _] : by_source_)
            if (targets.contains(src)) throw ValidationError("rule source " + src.symbol() + " is also a rule target");
        rules_ = std::move(rules);
    }

    const std::vector<ReductionRule>& rules() const noexcept { return rules_; }
    const PhoneInventory& reduced_inventory() const noexcept { return reduced_; }

    const std::vector<Phone>* find(const Phone& p) const {
        const auto it = by_source_.find(p);
        return it == by_source_.end() ? nullptr : &it->second;
    }

private:
    std::vector<ReductionRule> rules_;
    std::map<Phone, std::vector<Phone>> by_source_;
    PhoneInventory reduced_;
};

/// Rules file: `SOURCE<TAB>T1 T2 [T3...]` per line, '#' comments allowed.
inline std::vector<ReductionRule> parse_rules(std::string_view contents) {
    std::vector<ReductionRule> rules;
    std::size_t line_no = 0;
    for (const auto& raw : text::split(contents, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty() || text::trim(line).front() == '#') continue;
        const auto fields = text::split(line, '\t');
        if (fields.size() != 2) throw ParseError("expected SOURCE<TAB>TARGETS", line_no);
        const auto source = text::trim(fields[0]);
        const auto targets = text::split_ws(fields[1]);
        if (source.empty() || targets.empty()) throw ParseError("empty rule source or targets", line_no);
        ReductionRule r{Phone{std::string(source)}, {}};
        for (const auto& t : targets) r.targets.emplace_back(t);
        rules.push_back(std::move(r));
    }
    return rules;
}

inline ReductionRules load_rules(const std::string& path, PhoneInventory reduced) {
    return ReductionRules(parse_rules(text::read_file(path)), std::move(reduced));
}

/// Replaces every phone that has a rule by its targets; other phones must
/// already belong to the reduced inventory.
inline SampaSeq reduce_sequence(const SampaSeq& seq, const ReductionRules& rules) {
    SampaSeq out;
    out.inventory_name = rules.reduced_inventory().name();
    out.phones.reserve(seq.phones.size());
    for (const auto& p : seq.phones) {
        if (const auto* targets = rules.find(p)) {
            out.phones.insert(out.phones.end(), targets->begin(), targets->end());
        } else if (rules.reduced_inventory().contains(p)) {
            out.phones.push_back(p);
        } else {
            throw ValidationError("phone " + p.symbol() + " has no reduction rule and is not in the reduced inventory");
        }
    }
    return out;
}

}  // namespace mundartlex
