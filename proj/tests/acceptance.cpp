// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mundartlex/checkpoint.hpp"
#include "mundartlex/cli.hpp"
#include "mundartlex/dataset.hpp"
#include "mundartlex/decode.hpp"
#include "mundartlex/edit_distance.hpp"
#include "mundartlex/eval.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/predict.hpp"
#include "mundartlex/train.hpp"
#include "service_support.hpp"
#include "test_support.hpp"

using namespace mundartlex;
using mundartlex::testing::data_file;
using mundartlex::testing::TableScorer;
using mundartlex::testing::TempDir;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool ok = true;
    std::string detail;
};

int failures = 0;

void run_check(const std::string& name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::ostringstream line;
    line << (o.ok ? "PASS " : "FAIL ") << name << " (" << std::fixed;
    line.precision(1);
    line << seconds_since(t0) << " s)";
    if (!o.detail.empty()) line << ": " << o.detail;
    std::cout << line.str() << std::endl;
    failures += !o.ok;
}

Outcome gradient_check() {
    ModelConfig c;
    c.n_layers = 1;
    c.n_heads = 1;
    c.d_k = 4;
    c.d_v = 4;
    c.d_model = 8;
    c.d_word_vec = 8;
    c.d_inner_hid = 16;
    c.dropout = 0.0;
    c.max_len = 16;
    Transformer<double> m(c, 9, 9);
    m.init_glorot(42);
    Rng rng(7);
    for (auto& p : m.parameters()) p += rng.uniform(-0.05, 0.05);
    const std::vector<Example> data{Example{{4, 5, 6, 5}, {4, 7, 5}}, Example{{6, 4, 7}, {6, 6, 4, 8}}};
    std::vector<const Example*> batch{&data[0], &data[1]};
    std::vector<double> analytic, scratch;
    batch_loss_and_gradient(m, batch, analytic, {});

    const auto t0 = Clock::now();
    auto& params = m.parameters();
    double worst = 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + 1e-5;
        const double up = batch_loss_and_gradient(m, batch, scratch, {});
        params[i] = saved - 1e-5;
        const double down = batch_loss_and_gradient(m, batch, scratch, {});
        params[i] = saved;
        const double numeric = (up - down) / 2e-5;
        const double scale = std::max(std::abs(numeric), std::abs(analytic[i]));
        const double rel = scale == 0.0 ? 0.0 : std::abs(numeric - analytic[i]) / scale;
        worst = std::max(worst, rel);
        bad += rel >= 1e-4;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << params.size() << " parameters, worst relative error " << worst << ", " << bad << " above 1e-4";
    return {bad == 0 && secs < 30.0, d.str()};
}

struct OverfitRun {
    int exact = 0;
    std::string liebe;
    std::vector<double> params;
    double secs = 0.0;
};

OverfitRun overfit_run(const std::vector<LabeledPair>& pairs, std::uint64_t seed) {
    const auto t0 = Clock::now();
    auto [sv, tv] = build_vocabs(token_pairs(pairs, Direction::p2g));
    Seq2SeqModel m(Direction::p2g, sv, tv, ModelConfig{});
    m.net.init_glorot(seed);
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 4;
    tc.dropout = 0.2;
    tc.lr_scale = 0.3;
    tc.warmup_steps = 300;
    tc.ema_decay = 0.998;
    tc.seed = seed;
    train(m.net, make_examples(sv, tv, pairs, Direction::p2g), tc);
    OverfitRun r;
    for (const auto& p : pairs) r.exact += predict_greedy(m, p.src) == p.tgt;
    r.liebe = predict_greedy(m, "l i @ b @");
    r.params = m.net.parameters();
    r.secs = seconds_since(t0);
    return r;
}

Outcome overfit_check() {
    const auto pairs = load_pairs(data_file("toy50.tsv"));
    const auto a = overfit_run(pairs, 1);
    const auto b = overfit_run(pairs, 1);
    const bool same = a.params == b.params && a.exact == b.exact;
    const auto need = static_cast<int>(std::ceil(0.95 * static_cast<double>(pairs.size())));
    std::ostringstream d;
    d << a.exact << "/" << pairs.size() << " greedy exact after 200 epochs, \"l i @ b @\" -> \"" << a.liebe << "\", "
      << a.secs << " s per run, rerun " << (same ? "identical" : "differs");
    return {a.exact >= need && a.secs < 300.0 && same, d.str()};
}

struct Enumerated {
    std::vector<TokenId> tokens;
    double score;
};

// Finished sequences (EOS step within max_len) by score, then EOS-free ones of length max_len.
std::vector<Enumerated> enumerate_all(const TableScorer& scorer, int max_len) {
    std::vector<Enumerated> finished, truncated;
    std::vector<Enumerated> frontier{{{}, 0.0}};
    for (int step = 0; step < max_len; ++step) {
        std::vector<Enumerated> next;
        for (const auto& h : frontier) {
            std::vector<TokenId> prefix{bos_id};
            prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
            const auto lp = scorer(std::span<const TokenId>(prefix));
            for (TokenId id = 0; id < static_cast<TokenId>(lp.size()); ++id) {
                const double l = lp[static_cast<std::size_t>(id)];
                if (!std::isfinite(l)) continue;
                if (id == eos_id) {
                    finished.push_back({h.tokens, h.score + l});
                } else {
                    auto t = h.tokens;
                    t.push_back(id);
                    next.push_back({std::move(t), h.score + l});
                }
            }
        }
        frontier = std::move(next);
    }
    truncated = std::move(frontier);
    auto order = [](const Enumerated& a, const Enumerated& b) {
        return a.score != b.score ? a.score > b.score : a.tokens < b.tokens;
    };
    std::sort(finished.begin(), finished.end(), order);
    std::sort(truncated.begin(), truncated.end(), order);
    finished.insert(finished.end(), truncated.begin(), truncated.end());
    return finished;
}

Outcome beam_check() {
    std::size_t tables = 0, mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        const std::size_t regular = 1 + seed % 3;  // with EOS at most 4 output tokens
        const int max_len = 1 + static_cast<int>(seed % 5);
        const TableScorer f(regular, seed, seed % 2 == 0);
        const auto oracle = enumerate_all(f, max_len);
        DecodeConfig cfg;
        cfg.top_k = static_cast<int>(std::min<std::size_t>(oracle.size(), 5));
        cfg.beam_size = 1024;
        cfg.max_decode_len = max_len;
        const auto got = beam_decode(f, cfg);
        ++tables;
        bool same = got.size() == static_cast<std::size_t>(cfg.top_k);
        for (std::size_t i = 0; same && i < got.size(); ++i)
            same = got[i].tokens == oracle[i].tokens && got[i].score == oracle[i].score;
        mismatches += !same;
    }
    std::size_t greedy_diff = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const TableScorer f(2 + seed % 6, seed + 5000);
        const int max_len = 1 + static_cast<int>(seed % 8);
        DecodeConfig cfg;
        cfg.beam_size = 1;
        cfg.top_k = 1;
        cfg.max_decode_len = max_len;
        const auto b = beam_decode(f, cfg);
        greedy_diff += b.size() != 1 || !(b[0] == greedy_decode(f, max_len));
    }
    std::ostringstream d;
    d << mismatches << "/" << tables << " tables differ from enumeration, " << greedy_diff
      << "/1000 beam-1 runs differ from greedy";
    return {mismatches == 0 && greedy_diff == 0, d.str()};
}

// Recursion over suffixes, memoised per (i, j) so length-6 inputs stay cheap.
std::size_t recursive_distance(std::string_view a, std::string_view b) {
    std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
    std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        auto& m = memo[i][j];
        if (m < 0)
            m = static_cast<int>(std::min({go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1), go(i + 1, j) + 1, go(i, j + 1) + 1}));
        return static_cast<std::size_t>(m);
    };
    return go(0, 0);
}

Outcome edit_distance_check() {
    std::vector<std::string> all{""};
    for (std::size_t start = 0; all.back().size() < 6;) {
        const auto end = all.size();
        for (std::size_t i = start; i < end; ++i)
            for (char c : {'a', 'b', 'c'}) all.push_back(all[i] + c);
        start = end;
    }
    const auto t0 = Clock::now();
    std::size_t pairs = 0, bad = 0;
    for (const auto& a : all)
        for (const auto& b : all) {
            ++pairs;
            bad += edit_distance(a, b) != recursive_distance(a, b);
        }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << pairs << " pairs, " << bad << " discrepancies";
    return {bad == 0 && secs < 120.0, d.str()};
}

Outcome phoneset_check() {
    const auto ext = load_inventory(data_file("extended.txt"));
    const auto red = load_inventory(data_file("reduced.txt"));
    const auto rules = load_rules(data_file("rules.tsv"), red);
    const auto out = format_sampa(reduce_sequence(parse_sampa("UI s t r { tt @", ext), rules));
    Rng rng(2024);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const SampaSeq s{mundartlex::testing::random_phones(ext, rng, 15, true), ext.name()};
        const auto once = reduce_sequence(s, rules);
        bad += !(reduce_sequence(once, rules) == once);
    }
    std::ostringstream d;
    d << "\"UI s t r { tt @\" -> \"" << out << "\", " << bad << "/10000 not idempotent";
    return {out == "U I s t r { t t @" && bad == 0, d.str()};
}

Outcome boundary_check() {
    const auto inv = std::make_shared<const PhoneInventory>(load_inventory(data_file("extended.txt")));
    auto gsw = [](std::string t) { return GswForm{std::move(t), GswSource::manual, std::nullopt}; };
    const auto out = format_sampa(insert_boundaries(parse_sampa("b i n k a N @", *inv), gsw("bin gange")));
    Rng rng(2025);
    auto word = [&] {
        std::string w(1 + rng.below(6), 'a');
        for (auto& c : w) c = static_cast<char>('a' + rng.below(26));
        return w;
    };
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const SampaSeq s{mundartlex::testing::random_phones(*inv, rng, 12, false), inv->name()};
        const std::size_t words = 1 + rng.below(std::min<std::size_t>(s.size(), 4));
        std::string text = word();
        for (std::size_t w = 1; w < words; ++w) text += " " + word();
        const auto r = insert_boundaries(s, gsw(text));
        const auto n = static_cast<std::size_t>(
            std::count_if(r.phones.begin(), r.phones.end(), [](const Phone& p) { return p.is_boundary(); }));
        bad += n != static_cast<std::size_t>(std::count(text.begin(), text.end(), ' '));
    }
    std::ostringstream d;
    d << "\"b i n k a N @\" + \"bin gange\" -> \"" << out << "\", " << bad << "/10000 count mismatches";
    return {out == "b i n _ k a N @" && bad == 0, d.str()};
}

std::vector<TagRecord> rank_column(Dialect d, std::size_t items, const std::vector<std::size_t>& correct) {
    std::vector<TagRecord> out;
    for (std::size_t i = 0; i < items; ++i)
        for (std::size_t r = 0; r < correct.size(); ++r)
            out.push_back({"w" + std::to_string(i), d, static_cast<int>(r + 1), "cand", i < correct[r] ? 1 : 0, "a1",
                           std::nullopt});
    return out;
}

Outcome table_check() {
    auto tags = rank_column(Dialect::VS, 1000, {946, 742, 614, 558, 484});
    const auto bs = rank_column(Dialect::BS, 200, {81, 50, 40, 30, 20});
    tags.insert(tags.end(), bs.begin(), bs.end());
    const auto t = rank_accuracy(tags);
    std::string visp;
    for (int r = 1; r <= 5; ++r) visp += t.find(Dialect::VS)->percent(r) + "/";
    visp += t.find(Dialect::VS)->total();
    const auto basel = t.find(Dialect::BS)->percent(1);

    std::vector<MatchPair> pairs;
    auto add = [&](Dialect d, std::size_t n, std::size_t same) {
        for (std::size_t i = 0; i < n; ++i) pairs.push_back({i < same ? "k a t" : "k a d", "k a t", d});
    };
    add(Dialect::ZH, 1294, 647);
    add(Dialect::VS, 825, 272);
    add(Dialect::BE, 293, 59);
    const auto rep = exact_match_report(pairs, Direction::g2p);
    const auto all = rep.find("all")->n_exact, zh = rep.find("ZH")->n_exact, vs = rep.find("VS")->n_exact;

    std::ostringstream d;
    d << "Visp " << visp << ", Basel rank 1 " << basel << ", exact all/ZH/VS " << all << "/" << zh << "/" << vs;
    return {visp == "94.6/74.2/61.4/55.8/48.4/66.88" && basel == "40.5" && all == 978 && zh == 647 && vs == 272,
            d.str()};
}

Outcome checkpoint_check() {
    auto pairs = load_pairs(data_file("toy50.tsv"));
    pairs.resize(12);
    auto [sv, tv] = build_vocabs(token_pairs(pairs, Direction::p2g));
    ModelConfig mc;
    mc.d_model = mc.d_word_vec = 16;
    mc.d_k = mc.d_v = 8;
    mc.d_inner_hid = 32;
    Seq2SeqModel m(Direction::p2g, sv, tv, mc);
    m.net.init_glorot(3);
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 4;
    train(m.net, make_examples(sv, tv, pairs, Direction::p2g), tc);

    TempDir dir("accept-ckpt");
    save_checkpoint(m, dir.file("m.ckpt"));
    const auto back = load_checkpoint(dir.file("m.ckpt"));
    Rng rng(99);
    auto ids = [&](std::size_t vocab) {
        std::vector<TokenId> out(1 + rng.below(8));
        for (auto& t : out) t = static_cast<TokenId>(num_specials + rng.below(vocab - num_specials));
        return out;
    };
    std::size_t differing = 0;
    for (int i = 0; i < 10; ++i) {
        const auto src = ids(sv.size());
        auto prefix = ids(tv.size());
        prefix.insert(prefix.begin(), bos_id);
        const auto a = m.net.forward(src, prefix);
        const auto b = back.net.forward(src, prefix);
        differing += a.size() != b.size() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0;
    }

    const auto bytes = serialize_checkpoint(m);
    std::size_t accepted = 0;
    auto expect_rejected = [&](const std::string& b) {
        try {
            deserialize_checkpoint(b);
            ++accepted;
        } catch (const Error&) {
        }
    };
    expect_rejected(bytes.substr(0, bytes.size() / 2));
    expect_rejected(bytes.substr(0, bytes.size() - 1));
    auto flipped = bytes;
    flipped[flipped.size() - 5] ^= 0x10;
    expect_rejected(flipped);
    auto magic = bytes;
    magic[1] = '?';
    expect_rejected(magic);
    expect_rejected("");

    std::ostringstream d;
    d << differing << "/10 forward outputs differ after reload, " << accepted << "/5 corrupted inputs accepted";
    return {differing == 0 && accepted == 0, d.str()};
}

Outcome service_check() {
    TempDir dir("accept-service");
    auto pool = mundartlex::testing::make_pool(Dialect::ZH, 10);
    const auto vs = mundartlex::testing::make_pool(Dialect::VS, 10, 5, "v");
    pool.insert(pool.end(), vs.begin(), vs.end());
    AnnotationService svc(pool, dir.path() / "state");
    mundartlex::testing::TestServer server(svc);
    auto cli = server.client();

    Rng rng(11);
    std::size_t errors = 0;
    for (const std::string annotator : {"anna", "ben"}) {
        auto res = cli.Post("/sessions", json{{"annotator", annotator}}.dump(), "application/json");
        if (!res || res->status != 201) return {false, "session creation failed"};
        const auto sid = json::parse(res->body).at("id").get<std::string>();
        for (int i = 0; i < 20; ++i) {
            res = cli.Get("/sessions/" + sid + "/items?n=1");
            if (!res || res->status != 200) return {false, "item fetch failed"};
            const auto item = json::parse(res->body).at("items").at(0).at("id").get<std::string>();
            for (int r = 1; r <= 5; ++r) {
                const int tag = rng.below(2) ? 1 : 0;
                json body{{"session", sid}, {"item", item}, {"rank", r}, {"tag", tag}};
                if (!tag) body["reason"] = reason_code(all_reasons[rng.below(all_reasons.size())]);
                res = cli.Post("/tags", body.dump(), "application/json");
                errors += !res || res->status != 201;
            }
        }
    }
    auto summary = cli.Get("/summary");
    auto exported = cli.Get("/export");
    if (!summary || !exported || summary->status != 200 || exported->status != 200)
        return {false, "summary or export request failed"};
    std::ofstream(dir.file("export.jsonl")) << exported->body;

    const std::string path = dir.file("export.jsonl");
    const char* argv[] = {"mundartlex", "tags-report", "--tags", path.c_str(), "--format", "json"};
    std::ostringstream out, err;
    const int code = run_cli(6, argv, out, err);
    if (code != 0) return {false, "tags-report exited " + std::to_string(code) + ": " + err.str()};
    const auto from_api = json::parse(summary->body);
    const auto from_cli = json::parse(out.str());
    std::ostringstream d;
    d << parse_tags(exported->body).size() << " exported records, " << errors << " rejected submissions, summary "
      << (from_api == from_cli ? "equals" : "differs from") << " tags-report";
    return {errors == 0 && from_api == from_cli, d.str()};
}

}  // namespace

int main() {
    run_check("gradient check against finite differences", gradient_check);
    run_check("overfit 50-pair toy dictionary", overfit_check);
    run_check("beam search against exhaustive enumeration", beam_check);
    run_check("edit distance against brute force", edit_distance_check);
    run_check("phone-set reduction", phoneset_check);
    run_check("boundary insertion", boundary_check);
    run_check("rank and exact-match table arithmetic", table_check);
    run_check("checkpoint round trip", checkpoint_check);
    run_check("annotation service summary consistency", service_check);
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
