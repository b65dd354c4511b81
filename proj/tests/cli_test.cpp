#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mundartlex/cli.hpp"
#include "test_support.hpp"

using namespace mundartlex;
using mundartlex::testing::data_file;
using mundartlex::testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "mundartlex");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) out.push_back(l);
    return out;
}

// Small p2g model shared by the predict and evaluate tests.
const std::string& toy_model() {
    static TempDir dir("cli-model");
    static const std::string path = [] {
        const auto p = dir.file("toy.ckpt");
        const auto r = run({"train", "--pairs", data_file("toy50.tsv"), "--model", p, "--epochs", "3", "--batch-size",
                            "8", "--seed", "2"});
        if (r.code != 0) throw std::runtime_error("toy training failed: " + r.err);
        return p;
    }();
    return path;
}

void write(const std::string& path, const std::string& contents) { std::ofstream(path) << contents; }

std::string visp_tags() {
    const std::vector<int> correct{946, 742, 614, 558, 484};
    std::vector<TagRecord> recs;
    for (int i = 0; i < 1000; ++i)
        for (int r = 1; r <= 5; ++r) {
            const int tag = i < correct[static_cast<std::size_t>(r - 1)] ? 1 : 0;
            recs.push_back({"w" + std::to_string(i), Dialect::VS, r, "c", tag, "a",
                            tag ? std::nullopt : std::optional<Reason>(Reason::changed_letter)});
        }
    return format_tags(recs);
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"dict-validate", "--dict", data_file("sample_lexicon.tsv"), "--bogus"}).code, 2);
    const auto r = run({"train", "--pairs", data_file("toy50.tsv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--model"), std::string::npos);
    EXPECT_EQ(run({"train", "--model", "x.ckpt"}).code, 2);
    EXPECT_EQ(run({"tags-report", "--tags", data_file("toy50.tsv"), "--format", "yaml"}).code, 2);
    EXPECT_EQ(run({"--version"}).code, 0);
}

TEST(Cli, DictValidate) {
    auto r = run({"dict-validate", "--dict", data_file("sample_lexicon.tsv"), "--format", "tsv"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("casing\t0"), std::string::npos);

    TempDir dir("cli");
    write(dir.file("bad.tsv"), "headword\tdialect\tsampa\tgsws\nLiebe\tZH\tl i @ b @\tliebi\n");
    r = run({"dict-validate", "--dict", dir.file("bad.tsv"), "--format", "tsv"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("casing\t1"), std::string::npos);

    write(dir.file("broken.tsv"), "headword\tdialect\tsampa\tgsws\nliebe\tQQ\tl i @ b @\tliebi\n");
    r = run({"dict-validate", "--dict", dir.file("broken.tsv")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(Cli, DictConvertReduced) {
    const auto r = run({"dict-convert", "--dict", data_file("sample_lexicon.tsv"), "--phoneset", "reduced"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("austreten\tNW\tU I s t r { t t @"), std::string::npos);
    TempDir dir("cli");
    EXPECT_EQ(run({"dict-convert", "--dict", data_file("sample_lexicon.tsv"), "-o", dir.file("red.tsv")}).code, 0);
    EXPECT_EQ(text::read_file(dir.file("red.tsv")), r.out);
}

TEST(Cli, TrainEchoesSettingsIntoCheckpoint) {
    TempDir dir("cli");
    const auto model = dir.file("m.ckpt");
    const auto r = run({"train", "--pairs", data_file("toy50.tsv"), "--model", model, "--epochs", "55", "--batch-size",
                        "64", "--dropout", "0.2", "--seed", "7", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("epochs"), 55);
    const auto m = load_checkpoint(model);
    EXPECT_EQ(m.training.epochs_run, 55);
    EXPECT_EQ(m.training.batch_size, 64);
    EXPECT_EQ(m.training.dropout, 0.2);
    EXPECT_EQ(m.training.seed, 7u);
    EXPECT_EQ(m.training.loss_history.size(), 55u);
    EXPECT_EQ(m.training.steps, 55u);  // 50 pairs, one batch per epoch
}

TEST(Cli, TrainWithSplitWritesParts) {
    TempDir dir("cli");
    const auto model = dir.file("m.ckpt");
    const auto r = run({"train", "--pairs", data_file("toy50.tsv"), "--model", model, "--epochs", "1", "--split",
                        "8:1:1", "--direction", "p2g"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_pairs(model + ".train.tsv").size(), 40u);
    EXPECT_EQ(load_pairs(model + ".valid.tsv").size(), 5u);
    EXPECT_EQ(load_pairs(model + ".test.tsv").size(), 5u);
}

TEST(Cli, PredictFiveLines) {
    const auto r = run({"predict", "--model", toy_model(), "--input", "f r 2: g @", "--top-k", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 5u);
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const auto f = text::split(ls[i], '\t');
        ASSERT_EQ(f.size(), 4u);
        EXPECT_EQ(f[0], "f r 2: g @");
        EXPECT_EQ(f[1], std::to_string(i + 1));
    }
    const auto j = run({"predict", "--model", toy_model(), "--input", "l i @ b @", "--top-k", "1", "--format", "json"});
    ASSERT_EQ(j.code, 0);
    EXPECT_EQ(nlohmann::json::parse(j.out)[0].at("candidates").size(), 1u);
    EXPECT_EQ(run({"predict", "--model", toy_model(), "--input", ""}).code, 1);
    EXPECT_EQ(run({"predict", "--model", toy_model()}).code, 2);
}

TEST(Cli, PredictDictWritesPool) {
    TempDir dir("cli");
    write(dir.file("d.tsv"), "headword\tdialect\tsampa\tgsws\nliebe\tZH\tl i @ b @\tliebi\nfrage\tZH\tf r 2: g @\tfrag\n");
    const auto r = run({"predict", "--model", toy_model(), "--dict", dir.file("d.tsv"), "-o", dir.file("pool.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pool = load_pool(dir.file("pool.tsv"));
    ASSERT_EQ(pool.size(), 2u);
    EXPECT_EQ(pool[0].candidates.size(), 5u);
}

TEST(Cli, Evaluate) {
    TempDir dir("cli");
    write(dir.file("base.tsv"), "l i @ b @\tliebi\nf r 2: g @\tfrog\n");
    write(dir.file("ref.tsv"), "l i @ b @\tliebi\tZH\nf r 2: g @\tfrag\tZH\n");
    const auto r = run({"evaluate", "--model", toy_model(), "--pairs", dir.file("ref.tsv"), "--baseline",
                        dir.file("base.tsv"), "--format", "tsv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("baseline\tall\t2\t1\t0.5"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("model\tZH\t2\t"), std::string::npos);
}

TEST(Cli, TagsReport) {
    TempDir dir("cli");
    write(dir.file("visp.jsonl"), visp_tags());
    auto r = run({"tags-report", "--tags", dir.file("visp.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("66.88"), std::string::npos);

    r = run({"tags-report", "--tags", dir.file("visp.jsonl"), "--format", "tsv"});
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_rank_table_tsv(r.out);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rank_table_tsv(rank_accuracy(load_tags(dir.file("visp.jsonl")))), r.out);

    write(dir.file("empty.jsonl"), "");
    r = run({"tags-report", "--tags", dir.file("empty.jsonl")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("no tags"), std::string::npos);

    auto partial = visp_tags();
    partial.erase(partial.rfind('{'));
    write(dir.file("partial.jsonl"), partial);
    r = run({"tags-report", "--tags", dir.file("partial.jsonl")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("incomplete"), std::string::npos);
}

TEST(Cli, ConfigFileFlagsWin) {
    TempDir dir("cli");
    write(dir.file("v.jsonl"), visp_tags());
    write(dir.file("cfg.ini"), "[tags-report]\ntags=" + dir.file("v.jsonl") + "\nformat=json\n");
    auto r = run({"--config", dir.file("cfg.ini"), "tags-report"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NO_THROW(static_cast<void>(nlohmann::json::parse(r.out)));
    r = run({"--config", dir.file("cfg.ini"), "tags-report", "--format", "tsv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("dialect\t", 0), 0u);
}
