#pragma once

// Annotation service: serves ranked candidates to annotators, records 0/1
// tags in an append-only JSONL log and exports them for evaluation.
//
// Pool TSV (immutable per run):
//   headword<TAB>dialect<TAB>sampa<TAB>rank<TAB>candidate<TAB>score
// one row per candidate; every (headword, dialect) item carries ranks 1..k
// with the same k across the pool.
//
// State directory: tags.jsonl (append log, fsynced before a request is
// acknowledged) and sessions.json (rewritten atomically).

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "mundartlex/error.hpp"
#include "mundartlex/eval.hpp"
#include "mundartlex/fileio.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/tags.hpp"
#include "mundartlex/text.hpp"

namespace mundartlex {

struct PoolCandidate {
    int rank = 0;
    std::string text;
    double score = 0.0;
};

struct CandidateItem {
    std::string id;  // "<dialect>/<headword>"
    std::string headword;
    Dialect dialect = Dialect::ZH;
    std::string sampa;
    std::vector<PoolCandidate> candidates;  // ranks 1..k in order
};

inline std::string item_id(Dialect d, std::string_view headword) {
    return std::string(dialect_code(d)) + "/" + std::string(headword);
}

inline constexpr std::string_view pool_header = "headword\tdialect\tsampa\trank\tcandidate\tscore";

/// Items ordered by headword, then dialect.
inline std::vector<CandidateItem> parse_pool(std::string_view contents) {
    std::map<std::pair<std::string, Dialect>, CandidateItem> items;
    std::size_t line_no = 0;
    for (auto line : text::split(contents, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line.front() == '#') continue;
        if (line_no == 1 && line == pool_header) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 6) throw ParseError("expected 6 tab-separated pool columns", line_no);
        const auto dialect = try_parse_dialect(f[1]);
        if (!dialect) throw ParseError("unknown dialect code '" + f[1] + "'", line_no);
        if (f[0].empty()) throw ParseError("empty headword", line_no);
        PoolCandidate c;
        try {
            std::size_t used = 0;
            c.rank = std::stoi(f[3], &used);
            if (used != f[3].size()) throw std::invalid_argument("rank");
            c.score = f[5].empty() ? 0.0 : std::stod(f[5]);
        } catch (const std::exception&) {
            throw ParseError("bad rank or score", line_no);
        }
        if (c.rank < 1) throw ParseError("rank must be >= 1", line_no);
        c.text = f[4];
        auto& item = items[{f[0], *dialect}];
        if (item.id.empty()) {
            item = {item_id(*dialect, f[0]), f[0], *dialect, f[2], {}};
        } else if (item.sampa != f[2]) {
            throw ParseError("conflicting sampa for " + item.id, line_no);
        }
        for (const auto& prev : item.candidates)
            if (prev.rank == c.rank) throw ParseError("duplicate rank " + f[3] + " for " + item.id, line_no);
        item.candidates.push_back(std::move(c));
    }
    std::vector<CandidateItem> out;
    std::size_t k = 0;
    for (auto& [_, item] : items) {
        std::sort(item.candidates.begin(), item.candidates.end(),
                  [](const auto& a, const auto& b) { return a.rank < b.rank; });
        for (std::size_t i = 0; i < item.candidates.size(); ++i)
            if (item.candidates[i].rank != static_cast<int>(i + 1))
                throw ValidationError("item " + item.id + " does not carry consecutive ranks from 1");
        if (k == 0) k = item.candidates.size();
        if (item.candidates.size() != k)
            throw ValidationError("item " + item.id + " has " + std::to_string(item.candidates.size()) +
                                  " candidates, expected " + std::to_string(k));
        out.push_back(std::move(item));
    }
    return out;
}

inline std::vector<CandidateItem> load_pool(const std::string& path) { return parse_pool(text::read_file(path)); }

inline std::string format_pool(const std::vector<CandidateItem>& items) {
    std::string out{pool_header};
    out += '\n';
    for (const auto& item : items)
        for (const auto& c : item.candidates) {
            nlohmann::json score = c.score;
            out += item.headword + "\t" + std::string(dialect_code(item.dialect)) + "\t" + item.sampa + "\t" +
                   std::to_string(c.rank) + "\t" + c.text + "\t" + score.dump() + "\n";
        }
    return out;
}

/// Error carried back to HTTP clients as {code, message}.
class ServiceError : public Error {
public:
    ServiceError(int status, std::string code, const std::string& message)
        : Error(message), status_(status), code_(std::move(code)) {}
    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }

private:
    int status_;
    std::string code_;
};

struct Session {
    std::string id;
    std::string annotator;
    std::optional<Dialect> dialect;
    std::vector<std::string> queue;  // item ids
    std::size_t cursor = 0;

    bool complete() const noexcept { return cursor >= queue.size(); }
};

struct TagSubmission {
    std::string session;
    std::string item;
    int rank = 0;
    int tag = -1;
    std::optional<std::string> reason;
    std::string client_ts;
    bool overwrite = false;
};

struct ExportFilter {
    std::optional<std::string> annotator;
    std::optional<Dialect> dialect;
    std::optional<int> tag;
    std::optional<int> rank;
};

/// `headword<TAB>dialect<TAB>gsw` rows for every tag=1 record, deduplicated.
inline std::string augmentation_tsv(const std::vector<TagRecord>& records) {
    std::vector<std::tuple<Dialect, std::string, std::string>> rows;
    for (const auto& r : records)
        if (r.tag == 1) rows.emplace_back(r.dialect, r.headword, r.candidate);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::string out;
    for (const auto& [d, h, g] : rows) out += h + "\t" + std::string(dialect_code(d)) + "\t" + g + "\n";
    return out;
}

struct ServiceOptions {
    bool enforce_criteria = true;  // tag 0 needs a reason code
};

/// Thread-safe core of the service; the HTTP layer only translates requests.
class AnnotationService {
public:
    AnnotationService(std::vector<CandidateItem> pool, std::filesystem::path state_dir, ServiceOptions opt = {})
        : pool_(std::move(pool)), state_dir_(std::move(state_dir)), opt_(opt) {
        if (pool_.empty()) throw ValidationError("empty pool");
        top_k_ = static_cast<int>(pool_.front().candidates.size());
        for (std::size_t i = 0; i < pool_.size(); ++i) index_[pool_[i].id] = i;
        std::filesystem::create_directories(state_dir_);
        load_log();
        load_sessions();
        const auto log = (state_dir_ / "tags.jsonl").string();
        log_fd_ = ::open(log.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (log_fd_ < 0) throw IoError("cannot open " + log + " for appending");
    }

    ~AnnotationService() {
        if (log_fd_ >= 0) ::close(log_fd_);
    }

    AnnotationService(const AnnotationService&) = delete;
    AnnotationService& operator=(const AnnotationService&) = delete;

    int top_k() const noexcept { return top_k_; }
    const std::vector<CandidateItem>& pool() const noexcept { return pool_; }

    Session create_session(const std::string& annotator, std::optional<Dialect> dialect) {
        if (text::trim(annotator).empty()) throw ServiceError(400, "invalid_annotator", "annotator name required");
        std::unique_lock lock(mutex_);
        Session s;
        s.annotator = annotator;
        s.dialect = dialect;
        for (const auto& item : pool_) {
            if (dialect && item.dialect != *dialect) continue;
            if (!item_complete(annotator, item.id)) s.queue.push_back(item.id);
        }
        if (s.queue.empty()) throw ServiceError(409, "empty_queue", "empty queue");
        s.id = "s" + std::to_string(++session_counter_);
        sessions_[s.id] = s;
        save_sessions();
        return s;
    }

    Session session(const std::string& id) const {
        std::shared_lock lock(mutex_);
        return find_session(id);
    }

    /// Up to `n` items from the cursor; the cursor does not move.
    std::vector<CandidateItem> next_items(const std::string& session_id, std::size_t n) const {
        std::shared_lock lock(mutex_);
        const Session& s = find_session(session_id);
        std::vector<CandidateItem> out;
        for (std::size_t i = s.cursor; i < s.queue.size() && out.size() < n; ++i) out.push_back(pool_[index_.at(s.queue[i])]);
        return out;
    }

    /// Latest tags of `annotator` on `item_id`, by rank.
    std::map<int, TagRecord> item_tags(const std::string& annotator, const std::string& item_id) const {
        std::shared_lock lock(mutex_);
        std::map<int, TagRecord> out;
        const auto it = latest_.find({annotator, item_id});
        if (it == latest_.end()) return out;
        for (const auto& [rank, idx] : it->second) out.emplace(rank, records_[idx]);
        return out;
    }

    /// Validates, appends and fsyncs the record, then advances the cursor.
    TagRecord submit_tag(const TagSubmission& sub) {
        std::unique_lock lock(mutex_);
        Session& s = find_session(sub.session);
        if (std::find(s.queue.begin(), s.queue.end(), sub.item) == s.queue.end())
            throw ServiceError(404, "unknown_item", "item '" + sub.item + "' is not in session " + s.id);
        if (sub.rank < 1 || sub.rank > top_k_)
            throw ServiceError(400, "invalid_rank", "rank must lie in 1.." + std::to_string(top_k_));
        if (sub.tag != 0 && sub.tag != 1) throw ServiceError(400, "invalid_tag", "tag must be 0 or 1");
        std::optional<Reason> reason;
        if (sub.reason) {
            reason = try_parse_reason(*sub.reason);
            if (!reason) throw ServiceError(400, "invalid_reason", "unknown reason code '" + *sub.reason + "'");
            if (sub.tag != 0) throw ServiceError(400, "invalid_reason", "a reason is only allowed on tag 0");
        }
        if (sub.tag == 0 && !reason && opt_.enforce_criteria)
            throw ServiceError(400, "reason_required", "tag 0 requires a reason code");
        auto& latest = latest_[{s.annotator, sub.item}];
        if (latest.count(sub.rank) && !sub.overwrite)
            throw ServiceError(409, "conflict", "rank " + std::to_string(sub.rank) + " of " + sub.item +
                                                    " is already tagged; resubmit with overwrite");

        const CandidateItem& item = pool_[index_.at(sub.item)];
        TagRecord rec{item.headword, item.dialect, sub.rank,
                      item.candidates[static_cast<std::size_t>(sub.rank - 1)].text, sub.tag, s.annotator, reason};
        nlohmann::json line = tag_to_json(rec);
        line["seq"] = records_.size() + 1;
        line["session"] = s.id;
        if (!sub.client_ts.empty()) line["client_ts"] = sub.client_ts;
        append_line(line.dump() + "\n");

        latest[sub.rank] = records_.size();
        records_.push_back(rec);
        const auto before = s.cursor;
        advance(s);
        if (s.cursor != before) save_sessions();
        return rec;
    }

    /// Latest record per (annotator, item, rank), ordered by annotator,
    /// dialect, headword, rank; byte-stable for a given log.
    std::vector<TagRecord> export_records(const ExportFilter& f = {}) const {
        std::shared_lock lock(mutex_);
        std::vector<TagRecord> out;
        for (const auto& [key, ranks] : latest_)
            for (const auto& [rank, idx] : ranks) {
                const auto& r = records_[idx];
                if (f.annotator && r.annotator != *f.annotator) continue;
                if (f.dialect && r.dialect != *f.dialect) continue;
                if (f.tag && r.tag != *f.tag) continue;
                if (f.rank && r.rank != *f.rank) continue;
                out.push_back(r);
            }
        std::sort(out.begin(), out.end(), [](const TagRecord& a, const TagRecord& b) {
            return std::tie(a.annotator, a.dialect, a.headword, a.rank) < std::tie(b.annotator, b.dialect, b.headword, b.rank);
        });
        return out;
    }

    /// Rank table over the exported records of fully tagged items.
    RankTable summary(const ExportFilter& f = {}, bool per_annotator = false) const {
        ExportFilter items_only = f;
        items_only.tag.reset();
        items_only.rank.reset();
        return rank_accuracy(export_records(items_only), {top_k_, per_annotator, true});
    }

    std::size_t record_count() const {
        std::shared_lock lock(mutex_);
        return records_.size();
    }

private:
    using ItemKey = std::pair<std::string, std::string>;  // annotator, item id

    Session& find_session(const std::string& id) {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "unknown session '" + id + "'");
        return it->second;
    }
    const Session& find_session(const std::string& id) const {
        return const_cast<AnnotationService*>(this)->find_session(id);
    }

    bool item_complete(const std::string& annotator, const std::string& id) const {
        const auto it = latest_.find({annotator, id});
        return it != latest_.end() && it->second.size() == static_cast<std::size_t>(top_k_);
    }

    void advance(Session& s) const {
        while (s.cursor < s.queue.size() && item_complete(s.annotator, s.queue[s.cursor])) ++s.cursor;
    }

    void append_line(const std::string& line) {
        std::size_t done = 0;
        while (done < line.size()) {
            const auto n = ::write(log_fd_, line.data() + done, line.size() - done);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw IoError("append to tag log failed");
            }
            done += static_cast<std::size_t>(n);
        }
        if (::fsync(log_fd_) != 0) throw IoError("fsync of tag log failed");
    }

    /// A torn final line (crash mid-append, never acknowledged) is dropped.
    void load_log() {
        const auto path = state_dir_ / "tags.jsonl";
        if (!std::filesystem::exists(path)) return;
        const std::string contents = text::read_file(path.string());
        const auto lines = text::split(contents, '\n');
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (text::trim(lines[i]).empty()) continue;
            const bool last_unterminated = i + 1 == lines.size() && !contents.empty() && contents.back() != '\n';
            TagRecord rec;
            try {
                rec = tag_from_json(nlohmann::json::parse(lines[i]));
            } catch (const std::exception& e) {
                if (last_unterminated) break;
                throw ParseError(std::string("tag log: ") + e.what(), i + 1);
            }
            const auto id = item_id(rec.dialect, rec.headword);
            if (!index_.count(id) || rec.rank > top_k_)
                throw ParseError("tag log refers to " + id + " rank " + std::to_string(rec.rank) + " outside the pool", i + 1);
            latest_[{rec.annotator, id}][rec.rank] = records_.size();
            records_.push_back(std::move(rec));
        }
        if (!contents.empty() && contents.back() != '\n') {
            // Terminate the torn tail so the next append starts a fresh line.
            write_file_atomic(path.string(), contents.substr(0, contents.rfind('\n') + 1));
        }
    }

    void load_sessions() {
        const auto path = state_dir_ / "sessions.json";
        if (!std::filesystem::exists(path)) return;
        try {
            const auto j = nlohmann::json::parse(text::read_file(path.string()));
            session_counter_ = j.at("counter").get<std::uint64_t>();
            for (const auto& js : j.at("sessions")) {
                Session s;
                s.id = js.at("id").get<std::string>();
                s.annotator = js.at("annotator").get<std::string>();
                if (js.contains("dialect") && !js["dialect"].is_null())
                    s.dialect = parse_dialect(js["dialect"].get<std::string>());
                for (const auto& id : js.at("queue")) {
                    const auto sid = id.get<std::string>();
                    if (index_.count(sid)) s.queue.push_back(sid);
                }
                advance(s);  // the log is authoritative for progress
                sessions_[s.id] = std::move(s);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("sessions file: ") + e.what());
        }
    }

    void save_sessions() const {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& [_, s] : sessions_)
            list.push_back({{"id", s.id},
                            {"annotator", s.annotator},
                            {"dialect", s.dialect ? nlohmann::json(std::string(dialect_code(*s.dialect))) : nlohmann::json()},
                            {"queue", s.queue},
                            {"cursor", s.cursor}});
        write_file_atomic((state_dir_ / "sessions.json").string(),
                          nlohmann::json{{"counter", session_counter_}, {"sessions", list}}.dump(1) + "\n");
    }

    std::vector<CandidateItem> pool_;
    std::map<std::string, std::size_t> index_;
    std::filesystem::path state_dir_;
    ServiceOptions opt_;
    int top_k_ = 0;
    int log_fd_ = -1;

    mutable std::shared_mutex mutex_;
    std::vector<TagRecord> records_;                  // full log, in append order
    std::map<ItemKey, std::map<int, std::size_t>> latest_;  // rank -> index into records_
    std::map<std::string, Session> sessions_;
    std::uint64_t session_counter_ = 0;
};

// ---- HTTP binding -------------------------------------------------------------

inline nlohmann::json session_json(const Session& s) {
    return {{"id", s.id},
            {"annotator", s.annotator},
            {"dialect", s.dialect ? nlohmann::json(std::string(dialect_code(*s.dialect))) : nlohmann::json()},
            {"queue_length", s.queue.size()},
            {"cursor", s.cursor},
            {"complete", s.complete()}};
}

inline nlohmann::json item_json(const CandidateItem& item, const std::map<int, TagRecord>& tags) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : item.candidates) {
        nlohmann::json jc = {{"rank", c.rank}, {"text", c.text}, {"score", c.score}};
        if (auto it = tags.find(c.rank); it != tags.end()) {
            jc["tag"] = it->second.tag;
            if (it->second.reason) jc["reason"] = std::string(reason_code(*it->second.reason));
        }
        cands.push_back(std::move(jc));
    }
    return {{"id", item.id},
            {"headword", item.headword},
            {"dialect", std::string(dialect_code(item.dialect))},
            {"sampa", item.sampa},
            {"candidates", cands}};
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"code", code}, {"message", message}});
}

inline std::optional<Dialect> dialect_param(const httplib::Request& req, const char* name = "dialect") {
    if (!req.has_param(name) || req.get_param_value(name).empty()) return std::nullopt;
    const auto v = req.get_param_value(name);
    auto d = try_parse_dialect(v);
    if (!d) throw ServiceError(400, "invalid_dialect", "unknown dialect code '" + v + "'");
    return d;
}

inline std::optional<int> int_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name) || req.get_param_value(name).empty()) return std::nullopt;
    const auto v = req.get_param_value(name);
    try {
        std::size_t used = 0;
        const int n = std::stoi(v, &used);
        if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw ServiceError(400, "invalid_parameter", std::string("parameter '") + name + "' must be an integer");
}

inline ExportFilter export_filter(const httplib::Request& req) {
    ExportFilter f;
    if (req.has_param("annotator") && !req.get_param_value("annotator").empty())
        f.annotator = req.get_param_value("annotator");
    f.dialect = dialect_param(req);
    f.tag = int_param(req, "tag");
    f.rank = int_param(req, "rank");
    return f;
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) throw ServiceError(400, "invalid_body", "request body must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(400, "invalid_body", std::string("malformed JSON: ") + e.what());
    }
}

template <class Handler>
auto guarded(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
        try {
            h(req, res);
        } catch (const ServiceError& e) {
            send_error(res, e.status(), e.code(), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, "invalid_body", e.what());
        } catch (const ValidationError& e) {
            send_error(res, 400, "invalid_request", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

inline constexpr const char* placeholder_page =
    "<!doctype html><meta charset=utf-8><title>mundartlex annotation</title>"
    "<p>The annotation API is running. No UI bundle was configured (start with --static-dir).</p>";

}  // namespace detail

/// Registers every endpoint on `server`. `static_dir` (optional) is mounted at /.
inline void bind_routes(httplib::Server& server, AnnotationService& svc, const std::string& static_dir = {}) {
    using detail::guarded;
    server.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto body = req.body.empty() ? nlohmann::json::object() : detail::parse_body(req);
        std::string annotator = body.value("annotator", std::string{});
        if (annotator.empty()) annotator = req.get_header_value("X-Annotator");
        std::optional<Dialect> dialect;
        if (body.contains("dialect") && !body["dialect"].is_null()) {
            const auto code = body["dialect"].get<std::string>();
            dialect = try_parse_dialect(code);
            if (!dialect) throw ServiceError(400, "invalid_dialect", "unknown dialect code '" + code + "'");
        }
        detail::send_json(res, 201, session_json(svc.create_session(annotator, dialect)));
    }));

    server.Get("/sessions/:id/items", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto id = req.path_params.at("id");
        const int n = detail::int_param(req, "n").value_or(1);
        if (n < 0) throw ServiceError(400, "invalid_parameter", "n must be non-negative");
        const Session s = svc.session(id);
        nlohmann::json items = nlohmann::json::array();
        for (const auto& item : svc.next_items(id, static_cast<std::size_t>(n)))
            items.push_back(item_json(item, svc.item_tags(s.annotator, item.id)));
        detail::send_json(res, 200, {{"session", session_json(s)}, {"items", items}});
    }));

    server.Post("/tags", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto body = detail::parse_body(req);
        TagSubmission sub;
        sub.session = body.at("session").get<std::string>();
        sub.item = body.at("item").get<std::string>();
        sub.rank = body.at("rank").get<int>();
        sub.tag = body.at("tag").get<int>();
        if (body.contains("reason") && !body["reason"].is_null()) sub.reason = body["reason"].get<std::string>();
        sub.client_ts = body.value("client_ts", std::string{});
        sub.overwrite = body.value("overwrite", false);
        const auto rec = svc.submit_tag(sub);
        detail::send_json(res, 201, {{"record", tag_to_json(rec)}, {"session", session_json(svc.session(sub.session))}});
    }));

    server.Get("/export", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto records = svc.export_records(detail::export_filter(req));
        const auto format = req.has_param("format") ? req.get_param_value("format") : std::string("jsonl");
        if (format == "jsonl") {
            res.set_content(format_tags(records), "application/x-ndjson; charset=utf-8");
        } else if (format == "augment") {
            res.set_content(augmentation_tsv(records), "text/tab-separated-values; charset=utf-8");
        } else {
            throw ServiceError(400, "invalid_parameter", "format must be jsonl or augment");
        }
    }));

    server.Get("/summary", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        ExportFilter f;
        f.dialect = detail::dialect_param(req);
        if (req.has_param("annotator") && !req.get_param_value("annotator").empty())
            f.annotator = req.get_param_value("annotator");
        const bool per_annotator = req.has_param("per_annotator") && req.get_param_value("per_annotator") == "1";
        detail::send_json(res, 200, rank_table_json(svc.summary(f, per_annotator)));
    }));

    if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
        server.set_mount_point("/", static_dir);
    } else {
        server.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(detail::placeholder_page, "text/html; charset=utf-8");
        });
    }
}

}  // namespace mundartlex
