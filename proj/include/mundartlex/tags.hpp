#pragma once

// Human 0/1 judgments of ranked candidates, stored as JSONL (one object per
// line, keys sorted so output is byte-stable).

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mundartlex/error.hpp"
#include "mundartlex/fileio.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/text.hpp"

namespace mundartlex {

/// Why a candidate was tagged 0.
enum class Reason { added_letter, missing_letter, changed_letter, two_minor };

inline constexpr std::array<Reason, 4> all_reasons{Reason::added_letter, Reason::missing_letter,
                                                   Reason::changed_letter, Reason::two_minor};

inline std::string_view reason_code(Reason r) {
    switch (r) {
        case Reason::added_letter: return "ADDED_LETTER";
        case Reason::missing_letter: return "MISSING_LETTER";
        case Reason::changed_letter: return "CHANGED_LETTER";
        case Reason::two_minor: return "TWO_MINOR";
    }
    return "?";
}

inline std::string_view reason_description(Reason r) {
    switch (r) {
        case Reason::added_letter: return "at least one added letter";
        case Reason::missing_letter: return "at least one missing letter";
        case Reason::changed_letter: return "at least one changed letter";
        case Reason::two_minor: return "at least two minor mistakes";
    }
    return "?";
}

inline std::optional<Reason> try_parse_reason(std::string_view code) {
    for (auto r : all_reasons)
        if (reason_code(r) == code) return r;
    return std::nullopt;
}

struct TagRecord {
    std::string headword;
    Dialect dialect = Dialect::ZH;
    int rank = 1;
    std::string candidate;
    int tag = 0;
    std::string annotator;
    std::optional<Reason> reason;  // only when tag == 0

    friend bool operator==(const TagRecord&, const TagRecord&) = default;
};

inline void check_tag_record(const TagRecord& r) {
    if (r.headword.empty()) throw ValidationError("empty headword");
    if (r.annotator.empty()) throw ValidationError("empty annotator");
    if (r.rank < 1) throw ValidationError("rank must be >= 1");
    if (r.tag != 0 && r.tag != 1) throw ValidationError("tag must be 0 or 1, got " + std::to_string(r.tag));
    if (r.reason && r.tag != 0) throw ValidationError("a reason is only allowed on tag 0");
}

inline nlohmann::json tag_to_json(const TagRecord& r) {
    nlohmann::json j = {{"headword", r.headword}, {"dialect", std::string(dialect_code(r.dialect))},
                        {"rank", r.rank},         {"candidate", r.candidate},
                        {"tag", r.tag},           {"annotator", r.annotator}};
    if (r.reason) j["reason"] = std::string(reason_code(*r.reason));
    return j;
}

/// Throws ValidationError on missing fields, bad values or unknown codes.
inline TagRecord tag_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("tag record must be a JSON object");
    TagRecord r;
    try {
        r.headword = j.at("headword").get<std::string>();
        const auto d = j.at("dialect").get<std::string>();
        const auto dialect = try_parse_dialect(d);
        if (!dialect) throw ValidationError("unknown dialect '" + d + "'");
        r.dialect = *dialect;
        r.rank = j.at("rank").get<int>();
        r.candidate = j.at("candidate").get<std::string>();
        r.tag = j.at("tag").get<int>();
        r.annotator = j.at("annotator").get<std::string>();
        if (j.contains("reason") && !j["reason"].is_null()) {
            const auto code = j["reason"].get<std::string>();
            r.reason = try_parse_reason(code);
            if (!r.reason) throw ValidationError("unknown reason code '" + code + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad tag record: ") + e.what());
    }
    check_tag_record(r);
    return r;
}

inline std::vector<TagRecord> parse_tags(std::string_view contents) {
    std::vector<TagRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : text::split(contents, '\n')) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(tag_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

inline std::string format_tags(const std::vector<TagRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        check_tag_record(r);
        out += tag_to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<TagRecord> load_tags(const std::string& path) { return parse_tags(text::read_file(path)); }

inline void save_tags(const std::vector<TagRecord>& records, const std::string& path) {
    write_file_atomic(path, format_tags(records));
}

}  // namespace mundartlex
