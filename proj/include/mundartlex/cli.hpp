#pragma once

// `mundartlex` command-line front end. run_cli() never calls exit(), so the
// whole tool can be driven in-process.
//
// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mundartlex/annotation_service.hpp"
#include "mundartlex/checkpoint.hpp"
#include "mundartlex/dataset.hpp"
#include "mundartlex/decode.hpp"
#include "mundartlex/eval.hpp"
#include "mundartlex/lexicon.hpp"
#include "mundartlex/phoneset.hpp"
#include "mundartlex/predict.hpp"
#include "mundartlex/tags.hpp"
#include "mundartlex/train.hpp"

#ifndef MUNDARTLEX_DEFAULT_DATA_DIR
#define MUNDARTLEX_DEFAULT_DATA_DIR "data"
#endif

namespace mundartlex {

/// $MUNDARTLEX_DATA_DIR, else the build-time default.
inline std::string default_data_dir() {
    if (const char* env = std::getenv("MUNDARTLEX_DATA_DIR"); env && *env) return env;
    return MUNDARTLEX_DEFAULT_DATA_DIR;
}

namespace cli {

enum class Format { text, tsv, json };

inline const std::map<std::string, Format> format_names{{"text", Format::text}, {"tsv", Format::tsv}, {"json", Format::json}};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

/// Path relative to the data directory unless given explicitly.
inline std::string data_path(const std::string& given, const std::string& file) {
    return given.empty() ? (std::filesystem::path(default_data_dir()) / file).string() : given;
}

inline std::shared_ptr<const PhoneInventory> inventory_from(const std::string& path, const std::string& fallback) {
    const auto p = data_path(path, fallback);
    return std::make_shared<const PhoneInventory>(load_inventory(p));
}

struct DictArgs {
    std::string dict;
    std::string inventory;
    bool lenient = false;

    void add(CLI::App* sub, bool required = true) {
        auto* d = sub->add_option("--dict", dict, "dictionary TSV (headword, dialect, sampa, gsws)");
        if (required) d->required()->check(CLI::ExistingFile);
        sub->add_option("--inventory", inventory, "phone inventory file (default: <data>/extended.txt)");
        sub->add_flag("--lenient", lenient, "map unknown SAMPA tokens to <unk> instead of failing");
    }

    Lexicon load() const {
        return load_lexicon(dict, inventory_from(inventory, "extended.txt"),
                            lenient ? ParseMode::lenient : ParseMode::strict);
    }
};

// ---- dict-validate ------------------------------------------------------------

inline int dict_validate(const DictArgs& a, Format fmt, Streams io) {
    const Lexicon lex = a.load();
    const auto report = validate(lex);
    if (fmt == Format::tsv) {
        io.out << report.to_tsv();
    } else if (fmt == Format::json) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : report.checks)
            checks.push_back({{"check", c.name}, {"count", c.count}, {"examples", c.examples}});
        io.out << nlohmann::json{{"entries", lex.size()},
                                 {"duplicate_rows", lex.duplicate_warnings()},
                                 {"ok", report.ok()},
                                 {"checks", checks}}
                      .dump(2)
               << "\n";
    } else {
        io.out << lex.size() << " entries, " << lex.duplicate_warnings() << " duplicate rows merged\n" << report.to_text();
    }
    return report.ok() ? 0 : 1;
}

// ---- dict-convert -------------------------------------------------------------

struct ConvertArgs {
    DictArgs dict;
    std::string phoneset = "reduced";
    std::string rules;
    std::string reduced_inventory;
    std::string output;
};

inline int dict_convert(const ConvertArgs& a, Streams io) {
    const Lexicon lex = a.dict.load();
    std::string rendered;
    if (a.phoneset == "extended") {
        rendered = render_export(lex, PhonesetVersion::extended);
    } else {
        const auto reduced = load_inventory(data_path(a.reduced_inventory, "reduced.txt"), "reduced");
        const auto rules = load_rules(data_path(a.rules, "rules.tsv"), reduced);
        rendered = render_export(lex, PhonesetVersion::reduced, &rules);
    }
    if (a.output.empty()) {
        io.out << rendered;
    } else {
        write_file_atomic(a.output, rendered);
        io.err << "wrote " << lex.size() << " entries to " << a.output << "\n";
    }
    return 0;
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
    DictArgs dict;
    std::string pairs;
    std::string model;
    std::string direction = "p2g";
    std::string split = "1:0:0";
    TrainConfig train;
    int max_len = ModelConfig{}.max_len;
};

inline int train_command(const TrainArgs& a, Format fmt, Streams io) {
    const Direction dir = parse_direction(a.direction);
    std::vector<LabeledPair> pairs;
    if (!a.pairs.empty()) {
        pairs = load_pairs(a.pairs);
    } else {
        pairs = pairs_from_lexicon(a.dict.load(), dir);
    }
    ModelConfig mc;
    mc.dropout = a.train.dropout;
    mc.max_len = a.max_len;
    std::size_t dropped = 0;
    std::erase_if(pairs, [&](const LabeledPair& p) {
        const auto t = p.tokens(dir);
        const bool too_long = t.src.size() > static_cast<std::size_t>(mc.max_len) ||
                              t.tgt.size() + 1 > static_cast<std::size_t>(mc.max_len);
        dropped += too_long;
        return too_long;
    });
    if (dropped) io.err << "warning: skipped " << dropped << " pair(s) longer than max_len " << mc.max_len << "\n";
    if (pairs.empty()) throw ValidationError("no training pairs");

    const auto split = split_pairs(pairs, parse_split(a.split), a.train.seed);
    if (split.train.empty()) throw ValidationError("training split is empty");
    auto [src_vocab, tgt_vocab] = build_vocabs(token_pairs(split.train, dir));
    Seq2SeqModel m(dir, src_vocab, tgt_vocab, mc);
    m.net.init_glorot(a.train.seed);

    const auto train_ex = make_examples(m.src_vocab, m.tgt_vocab, split.train, dir);
    const auto valid_ex = make_examples(m.src_vocab, m.tgt_vocab, split.valid, dir);
    io.err << "training " << direction_name(dir) << " on " << split.train.size() << " pairs (valid "
           << split.valid.size() << ", test " << split.test.size() << "), " << m.net.parameter_count()
           << " parameters\n";
    const auto result = train(m.net, train_ex, a.train, valid_ex, [&](const EpochReport& r) {
        io.err << "epoch " << r.epoch << "/" << a.train.epochs << " loss " << r.train_loss;
        if (r.has_valid) io.err << " valid " << r.valid_loss;
        io.err << "\n";
    });

    m.training.epochs_run = a.train.epochs;
    m.training.batch_size = a.train.batch_size;
    m.training.dropout = a.train.dropout;
    m.training.seed = a.train.seed;
    m.training.steps = result.steps;
    m.training.loss_history = result.loss_history;
    m.training.final_loss = result.loss_history.back();
    m.training.extra = {{"split", {split.train.size(), split.valid.size(), split.test.size()}},
                        {"lr_scale", a.train.lr_scale},
                        {"warmup_steps", a.train.warmup_steps},
                        {"label_smoothing", a.train.label_smoothing},
                        {"ema_decay", a.train.ema_decay}};
    if (!result.valid_history.empty()) m.training.extra["valid_history"] = result.valid_history;
    save_checkpoint(m, a.model);
    const std::pair<const char*, const std::vector<LabeledPair>*> parts[] = {
        {"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}};
    if (!split.valid.empty() || !split.test.empty())
        for (const auto& [name, part] : parts) write_file_atomic(a.model + "." + name + ".tsv", format_pairs(*part));

    if (fmt == Format::json) {
        io.out << nlohmann::json{{"model", a.model},
                                 {"direction", std::string(direction_name(dir))},
                                 {"epochs", a.train.epochs},
                                 {"batch_size", a.train.batch_size},
                                 {"dropout", a.train.dropout},
                                 {"seed", a.train.seed},
                                 {"steps", result.steps},
                                 {"final_loss", m.training.final_loss}}
                      .dump(2)
               << "\n";
    } else if (fmt == Format::tsv) {
        io.out << "epoch\tloss\n";
        for (std::size_t i = 0; i < result.loss_history.size(); ++i)
            io.out << i + 1 << "\t" << result.loss_history[i] << "\n";
    } else {
        io.out << "saved " << a.model << " (final loss " << m.training.final_loss << ")\n";
    }
    return 0;
}

// ---- predict ------------------------------------------------------------------

struct PredictArgs {
    std::string model;
    std::vector<std::string> inputs;
    DictArgs dict;
    DecodeConfig decode;
    bool no_merge = false;
    std::string output;
};

inline int predict_command(PredictArgs a, Format fmt, Streams io) {
    a.decode.merge_duplicates = !a.no_merge;
    a.decode.validate();
    const Seq2SeqModel m = load_checkpoint(a.model);
    auto warn_unknown = [&](const std::string& input, const PredictResult& r) {
        if (!r.unknown_tokens.empty())
            io.err << "warning: " << r.unknown_tokens.size() << " unknown token(s) in '" << input << "': "
                   << text::join(r.unknown_tokens, " ") << "\n";
    };

    if (!a.dict.dict.empty()) {
        if (m.direction != Direction::p2g) throw ValidationError("--dict prediction needs a p2g model");
        const Lexicon lex = a.dict.load();
        std::vector<CandidateItem> pool;
        std::size_t failed = 0;
        for (const auto& e : lex.entries()) {
            const auto sampa = format_sampa(e.sampa);
            try {
                const auto r = predict_topk(m, sampa, a.decode);
                warn_unknown(sampa, r);
                CandidateItem item{item_id(e.dialect, e.headword), e.headword, e.dialect, sampa, {}};
                for (const auto& c : r.candidates) item.candidates.push_back({c.rank, c.output, c.score});
                pool.push_back(std::move(item));
            } catch (const ValidationError& err) {
                ++failed;
                io.err << "warning: skipped " << e.headword << " (" << dialect_code(e.dialect) << "): " << err.what() << "\n";
            }
        }
        std::string rendered;
        if (fmt == Format::json) {
            nlohmann::json items = nlohmann::json::array();
            for (const auto& item : pool) items.push_back(item_json(item, {}));
            rendered = items.dump(2) + "\n";
        } else {
            rendered = format_pool(pool);
        }
        if (a.output.empty()) {
            io.out << rendered;
        } else {
            write_file_atomic(a.output, rendered);
        }
        return failed ? 1 : 0;
    }

    if (a.inputs.empty()) throw CLI::RequiredError("--input or --dict");
    nlohmann::json all = nlohmann::json::array();
    for (const auto& input : a.inputs) {
        const auto r = predict_topk(m, input, a.decode);
        warn_unknown(input, r);
        if (fmt == Format::json) {
            nlohmann::json cands = nlohmann::json::array();
            for (const auto& c : r.candidates)
                cands.push_back({{"rank", c.rank}, {"output", c.output}, {"score", c.score}, {"truncated", c.truncated}});
            all.push_back({{"input", input}, {"candidates", cands}, {"unknown_tokens", r.unknown_tokens}});
        } else {
            for (const auto& c : r.candidates) {
                nlohmann::json score = c.score;
                io.out << input << "\t" << c.rank << "\t" << c.output << "\t" << score.dump() << "\n";
                if (c.truncated) io.err << "warning: candidate " << c.rank << " for '" << input << "' was truncated\n";
            }
        }
    }
    if (fmt == Format::json) io.out << all.dump(2) << "\n";
    return 0;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
    std::string model;
    std::string pairs;
    std::string baseline;
    DecodeConfig decode;
};

inline int evaluate_command(EvaluateArgs a, Format fmt, Streams io) {
    a.decode.top_k = 1;
    const Seq2SeqModel m = load_checkpoint(a.model);
    const auto pairs = load_pairs(a.pairs);
    if (pairs.empty()) throw ValidationError("no evaluation pairs");
    std::vector<MatchPair> preds;
    for (const auto& p : pairs) {
        const auto r = predict_topk(m, p.src, a.decode);
        preds.push_back({r.candidates.empty() ? std::string{} : r.candidates.front().output, p.tgt, p.dialect});
    }
    std::vector<MatchReport> reports{exact_match_report(preds, m.direction, "model")};
    if (!a.baseline.empty()) {
        std::map<std::string, std::string> by_src;
        for (const auto& b : load_pairs(a.baseline)) by_src[b.src] = b.tgt;
        std::vector<MatchPair> base;
        for (const auto& p : pairs) {
            auto it = by_src.find(p.src);
            if (it == by_src.end()) throw ValidationError("baseline has no prediction for '" + p.src + "'");
            base.push_back({it->second, p.tgt, p.dialect});
        }
        reports.push_back(exact_match_report(base, m.direction, "baseline"));
    }
    if (fmt == Format::tsv) {
        io.out << match_reports_tsv(reports);
    } else if (fmt == Format::json) {
        io.out << match_reports_json(reports).dump(2) << "\n";
    } else {
        io.out << match_reports_text(reports);
    }
    return 0;
}

// ---- tags-report --------------------------------------------------------------

struct TagsReportArgs {
    std::string tags;
    int top_k = 5;
    bool per_annotator = false;
};

inline int tags_report(const TagsReportArgs& a, Format fmt, Streams io) {
    const auto records = load_tags(a.tags);
    if (records.empty()) throw ValidationError("no tags");
    const auto table = rank_accuracy(records, {a.top_k, a.per_annotator, false});
    if (fmt == Format::tsv) {
        io.out << rank_table_tsv(table);
    } else if (fmt == Format::json) {
        io.out << rank_table_json(table).dump(2) << "\n";
    } else {
        io.out << rank_table_text(table);
    }
    return 0;
}

// ---- serve --------------------------------------------------------------------

struct ServeArgs {
    std::string pool;
    std::string state_dir = "annotations";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    bool no_criteria = false;
};

inline int serve_command(const ServeArgs& a, Streams io) {
    AnnotationService svc(load_pool(a.pool), a.state_dir, ServiceOptions{!a.no_criteria});
    httplib::Server server;
    bind_routes(server, svc, a.static_dir);
    io.err << "serving " << svc.pool().size() << " items on http://" << a.host << ":" << a.port << "/\n";
    if (!server.listen(a.host, a.port)) throw IoError("cannot listen on " + a.host + ":" + std::to_string(a.port));
    return 0;
}

}  // namespace cli

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli;
    CLI::App app{"Swiss German pronunciation dictionary toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value file (flags win)");
    app.set_version_flag("--version", "mundartlex 0.1.0");

    Format fmt = Format::text;
    auto add_format = [&fmt](CLI::App* sub) {
        sub->add_option("--format", fmt, "output format: text, tsv or json")
            ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case));
    };
    auto add_decode = [](CLI::App* sub, DecodeConfig& d) {
        sub->add_option("--beam", d.beam_size, "beam size")->capture_default_str();
        sub->add_option("--max-decode-len", d.max_decode_len, "decoding steps including EOS")->capture_default_str();
        sub->add_option("--length-penalty", d.length_penalty, "length-normalization exponent (0 = none)")
            ->capture_default_str();
    };

    DictArgs validate_args;
    auto* s_validate = app.add_subcommand("dict-validate", "check a dictionary for rule violations");
    validate_args.add(s_validate);
    add_format(s_validate);

    ConvertArgs convert_args;
    auto* s_convert = app.add_subcommand("dict-convert", "export a dictionary in the extended or reduced phone set");
    convert_args.dict.add(s_convert);
    s_convert->add_option("--phoneset", convert_args.phoneset, "target phone set")
        ->check(CLI::IsMember({"extended", "reduced"}))
        ->capture_default_str();
    s_convert->add_option("--rules", convert_args.rules, "reduction rules (default: <data>/rules.tsv)");
    s_convert->add_option("--reduced-inventory", convert_args.reduced_inventory,
                          "reduced inventory (default: <data>/reduced.txt)");
    s_convert->add_option("--output,-o", convert_args.output, "write here instead of stdout");
    add_format(s_convert);

    TrainArgs train_args;
    auto* s_train = app.add_subcommand("train", "train a p2g or g2p model");
    train_args.dict.add(s_train, false);
    auto* pairs_opt = s_train->add_option("--pairs", train_args.pairs, "pair TSV (src, tgt[, dialect[, headword]])")
                          ->check(CLI::ExistingFile);
    s_train->get_option("--dict")->check(CLI::ExistingFile)->excludes(pairs_opt);
    s_train->add_option("--model", train_args.model, "checkpoint to write")->required();
    s_train->add_option("--direction", train_args.direction, "p2g or g2p")
        ->check(CLI::IsMember({"p2g", "g2p"}))
        ->capture_default_str();
    s_train->add_option("--epochs", train_args.train.epochs)->capture_default_str();
    s_train->add_option("--batch-size", train_args.train.batch_size)->capture_default_str();
    s_train->add_option("--dropout", train_args.train.dropout)->capture_default_str();
    s_train->add_option("--seed", train_args.train.seed)->capture_default_str();
    s_train->add_option("--split", train_args.split, "train:valid:test weights")->capture_default_str();
    s_train->add_option("--lr-scale", train_args.train.lr_scale, "learning-rate multiplier")->capture_default_str();
    s_train->add_option("--warmup", train_args.train.warmup_steps, "warmup steps")->capture_default_str();
    s_train->add_option("--label-smoothing", train_args.train.label_smoothing)->capture_default_str();
    s_train->add_option("--ema-decay", train_args.train.ema_decay, "average weights with this decay (0 = off)")
        ->capture_default_str();
    s_train->add_option("--max-len", train_args.max_len, "longest source/target sequence")->capture_default_str();
    add_format(s_train);

    PredictArgs predict_args;
    auto* s_predict = app.add_subcommand("predict", "top-k predictions for inputs or a whole dictionary");
    s_predict->add_option("--model", predict_args.model)->required()->check(CLI::ExistingFile);
    auto* input_opt = s_predict->add_option("--input", predict_args.inputs, "source string (repeatable)");
    predict_args.dict.add(s_predict, false);
    s_predict->get_option("--dict")->check(CLI::ExistingFile)->excludes(input_opt);
    s_predict->add_option("--top-k", predict_args.decode.top_k)->capture_default_str();
    add_decode(s_predict, predict_args.decode);
    s_predict->add_flag("--no-merge", predict_args.no_merge, "keep duplicate output strings");
    s_predict->add_option("--output,-o", predict_args.output, "with --dict: write the candidate pool here");
    add_format(s_predict);

    EvaluateArgs eval_args;
    auto* s_eval = app.add_subcommand("evaluate", "exact matches of rank-1 predictions against references");
    s_eval->add_option("--model", eval_args.model)->required()->check(CLI::ExistingFile);
    s_eval->add_option("--pairs", eval_args.pairs, "reference pair TSV")->required()->check(CLI::ExistingFile);
    s_eval->add_option("--baseline", eval_args.baseline, "pair TSV of another system's predictions")
        ->check(CLI::ExistingFile);
    add_decode(s_eval, eval_args.decode);
    add_format(s_eval);

    TagsReportArgs tags_args;
    auto* s_tags = app.add_subcommand("tags-report", "rank-accuracy table from a tags JSONL file");
    s_tags->add_option("--tags", tags_args.tags)->required()->check(CLI::ExistingFile);
    s_tags->add_option("--top-k", tags_args.top_k)->capture_default_str();
    s_tags->add_flag("--per-annotator", tags_args.per_annotator, "one row per dialect and annotator");
    add_format(s_tags);

    ServeArgs serve_args;
    auto* s_serve = app.add_subcommand("serve", "run the annotation HTTP service");
    s_serve->add_option("--pool", serve_args.pool, "candidate pool TSV")->required()->check(CLI::ExistingFile);
    s_serve->add_option("--state-dir", serve_args.state_dir, "tag log and sessions")->capture_default_str();
    s_serve->add_option("--host", serve_args.host)->capture_default_str();
    s_serve->add_option("--port", serve_args.port)->capture_default_str()->check(CLI::Range(0, 65535));
    s_serve->add_option("--static-dir", serve_args.static_dir, "UI bundle served at /");
    s_serve->add_flag("--no-criteria", serve_args.no_criteria, "accept tag 0 without a reason code");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (auto subs = app.get_subcommands(); !subs.empty()) err << "run '" << subs.front()->get_name() << " --help' for options\n";
        return 2;
    }

    const Streams io{out, err};
    try {
        if (*s_validate) return dict_validate(validate_args, fmt, io);
        if (*s_convert) return dict_convert(convert_args, io);
        if (*s_train) {
            if (train_args.pairs.empty() && train_args.dict.dict.empty()) throw CLI::RequiredError("--dict or --pairs");
            return train_command(train_args, fmt, io);
        }
        if (*s_predict) return predict_command(predict_args, fmt, io);
        if (*s_eval) return evaluate_command(eval_args, fmt, io);
        if (*s_tags) return tags_report(tags_args, fmt, io);
        if (*s_serve) return serve_command(serve_args, io);
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace mundartlex
