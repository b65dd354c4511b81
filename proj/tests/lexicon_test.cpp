#include <algorithm>
#include <cctype>
#include <limits>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "mundartlex/lexicon.hpp"
#include "test_support.hpp"

using namespace mundartlex;
using mundartlex::testing::data_file;
using mundartlex::testing::TempDir;

namespace {

std::shared_ptr<const PhoneInventory> extended() {
    static const auto inv = std::make_shared<const PhoneInventory>(load_inventory(data_file("extended.txt")));
    return inv;
}

SampaSeq sampa(std::string_view s) { return parse_sampa(s, *extended()); }

GswForm gsw(std::string text) { return GswForm{std::move(text), GswSource::manual, std::nullopt}; }

// Levenshtein on ASCII, case-folded.
std::size_t lev(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (std::tolower(a[i - 1]) == std::tolower(b[j - 1]) ? 0 : 1)});
    return d[a.size()][b.size()];
}

std::string concat(const SampaSeq& s, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) out += s.phones[i].symbol();
    return out;
}

// Exhaustive one-space oracle: every split point, summed distance, leftmost minimum.
std::size_t oracle_split(const SampaSeq& s, const std::string& left, const std::string& right) {
    std::size_t best = 0, best_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 1; i < s.size(); ++i) {
        const auto c = lev(left, concat(s, 0, i)) + lev(right, concat(s, i, s.size()));
        if (c < best_cost) best_cost = c, best = i;
    }
    return best;
}

std::string random_word(Rng& rng) {
    std::string w;
    const auto n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) w += static_cast<char>('a' + rng.below(26));
    return w;
}

}  // namespace

TEST(Lexicon, SingleRow) {
    const auto lex = parse_lexicon(std::string(lexicon_header) + "\nliebe\tZH\tl i @ b @\tliebi\n", extended());
    ASSERT_EQ(lex.size(), 1u);
    const auto hits = lex.lookup("liebe", Dialect::ZH);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(format_sampa(hits[0]->sampa), "l i @ b @");
    ASSERT_EQ(hits[0]->gsws.size(), 1u);
    EXPECT_EQ(hits[0]->gsws[0].text, "liebi");
    EXPECT_TRUE(lex.lookup("liebe", Dialect::BE).empty());
}

TEST(Lexicon, EmptyFile) {
    EXPECT_TRUE(parse_lexicon("", extended()).empty());
    EXPECT_TRUE(parse_lexicon(std::string(lexicon_header) + "\n", extended()).empty());
}

TEST(Lexicon, DuplicateRowCollapsed) {
    const std::string row = "liebe\tZH\tl i @ b @\tliebi\n";
    const auto lex = parse_lexicon(std::string(lexicon_header) + "\n" + row + row, extended());
    EXPECT_EQ(lex.size(), 1u);
    EXPECT_EQ(lex.duplicate_warnings(), 1u);
}

TEST(Lexicon, MalformedRowsNameLine) {
    const std::string h = std::string(lexicon_header) + "\n";
    try {
        parse_lexicon(h + "liebe\tZH\tl i @ b @\tliebi\nliebe\tXX\tl i @ b @\tliebi\n", extended());
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_lexicon(h + "liebe\tZH\n", extended()), ParseError);
    EXPECT_TRUE(parse_lexicon(h + "liebe\tZH\tl i @ b @\n", extended()).entries()[0].gsws.empty());
    EXPECT_THROW(parse_lexicon(h + "liebe\tZH\tl i QQ b @\tliebi\n", extended()), ParseError);
    EXPECT_EQ(parse_lexicon(h + "liebe\tZH\tl i QQ b @\tliebi\n", extended(), ParseMode::lenient).size(), 1u);
}

TEST(Lexicon, GswCellSyntax) {
    EXPECT_EQ(parse_gsw_cell("liebi@m").source, GswSource::manual);
    EXPECT_EQ(parse_gsw_cell("liebi").source, GswSource::generated);
    const auto g = parse_gsw_cell("liebi@g3");
    EXPECT_EQ(g.source, GswSource::generated);
    EXPECT_EQ(g.rank, 3);
    EXPECT_EQ(format_gsw_cell(g), "liebi@g3");
    EXPECT_THROW(parse_gsw_cell("liebi@g0"), ParseError);
    EXPECT_THROW(parse_gsw_cell("liebi@x"), ParseError);
}

TEST(Validate, LiebeRowsAreClean) {
    const auto all = load_lexicon(data_file("sample_lexicon.tsv"), extended());
    std::vector<DictEntry> liebe;
    for (const auto& e : all.entries())
        if (e.headword == "liebe") liebe.push_back(e);
    ASSERT_EQ(liebe.size(), 6u);
    const auto report = validate(Lexicon(liebe, extended()));
    EXPECT_TRUE(report.ok()) << report.to_text();
}

TEST(Validate, CasingAndInventory) {
    std::vector<DictEntry> es{{"Liebe", Dialect::ZH, sampa("l i @ b @"), {gsw("liebi")}}};
    auto r = validate(Lexicon(es, extended()));
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.count("casing"), 1u);

    const auto tiny = std::make_shared<const PhoneInventory>(parse_inventory("l\ni\n@\n", "tiny"));
    std::vector<DictEntry> es2{{"liebe", Dialect::ZH, sampa("l i @ b @"), {gsw("liebi")}}};
    r = validate(Lexicon(es2, tiny));
    EXPECT_EQ(r.count("inventory_mismatch"), 1u);
    EXPECT_EQ(r.count("casing"), 0u);
}

TEST(Validate, EmptyAndDuplicateGsw) {
    std::vector<DictEntry> es{{"liebe", Dialect::ZH, sampa("l i @ b @"), {gsw("liebi"), gsw("liebi"), gsw("")}}};
    const auto r = validate(Lexicon(es, extended()));
    EXPECT_EQ(r.count("duplicate_gsw"), 1u);
    EXPECT_EQ(r.count("empty_gsw"), 1u);
}

TEST(InsertBoundaries, Examples) {
    EXPECT_EQ(format_sampa(insert_boundaries(sampa("b i n k a N @"), gsw("bin gange"))), "b i n _ k a N @");
    EXPECT_EQ(format_sampa(insert_boundaries(sampa("l i @ b @"), gsw("liebi"))), "l i @ b @");
    EXPECT_EQ(format_sampa(insert_boundaries(sampa("I S k A N @"), gsw("isch gange"))), "I S _ k A N @");
}

TEST(InsertBoundaries, OracleAgreesOnWorkedExample) {
    const auto s = sampa("I S k A N @");
    EXPECT_EQ(oracle_split(s, "isch", "gange"), 2u);
}

TEST(InsertBoundaries, Errors) {
    EXPECT_THROW(insert_boundaries(sampa("a b"), gsw("x y z")), ValidationError);
    EXPECT_THROW(insert_boundaries(sampa("a _ b"), gsw("x y")), ValidationError);
    EXPECT_THROW(insert_boundaries(sampa("a b t"), gsw("x  y")), ValidationError);
}

TEST(InsertBoundaries, MatchesExhaustiveOracleForOneSpace) {
    const auto inv = extended();
    Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        SampaSeq s{mundartlex::testing::random_phones(*inv, rng, 8, false), inv->name()};
        if (s.size() < 2) continue;
        const auto left = random_word(rng), right = random_word(rng);
        const auto out = insert_boundaries(s, gsw(left + " " + right));
        const auto pos = static_cast<std::size_t>(
            std::find_if(out.phones.begin(), out.phones.end(), [](const Phone& p) { return p.is_boundary(); }) -
            out.phones.begin());
        ASSERT_EQ(pos, oracle_split(s, left, right)) << format_sampa(s) << " / " << left << " " << right;
    }
}

TEST(InsertBoundaries, CountAndRemovalProperties) {
    const auto inv = extended();
    Rng rng(22);
    for (int i = 0; i < 10000; ++i) {
        SampaSeq s{mundartlex::testing::random_phones(*inv, rng, 12, false), inv->name()};
        const std::size_t words = 1 + rng.below(std::min<std::size_t>(s.size(), 4));
        std::string text = random_word(rng);
        for (std::size_t w = 1; w < words; ++w) text += " " + random_word(rng);
        const auto out = insert_boundaries(s, gsw(text));
        std::size_t count = 0;
        SampaSeq stripped{{}, s.inventory_name};
        for (std::size_t j = 0; j < out.size(); ++j) {
            if (out.phones[j].is_boundary()) {
                ++count;
                ASSERT_GT(j, 0u);
                ASSERT_LT(j + 1, out.size());
                ASSERT_FALSE(out.phones[j + 1].is_boundary());
            } else {
                stripped.phones.push_back(out.phones[j]);
            }
        }
        ASSERT_EQ(count, words - 1);
        ASSERT_EQ(stripped, s);
    }
}

TEST(Export, RoundTripExtended) {
    TempDir dir("lexicon");
    const auto lex = load_lexicon(data_file("sample_lexicon.tsv"), extended());
    export_lexicon(lex, dir.file("out.tsv"), PhonesetVersion::extended);
    const auto back = load_lexicon(dir.file("out.tsv"), extended());
    ASSERT_EQ(back.size(), lex.size());
    EXPECT_EQ(format_lexicon(back), format_lexicon(lex));
}

TEST(Export, ReducedAustreten) {
    TempDir dir("lexicon");
    const auto reduced = std::make_shared<const PhoneInventory>(load_inventory(data_file("reduced.txt")));
    const auto rules = load_rules(data_file("rules.tsv"), *reduced);
    const auto lex = load_lexicon(data_file("sample_lexicon.tsv"), extended());
    export_lexicon(lex, dir.file("red.tsv"), PhonesetVersion::reduced, &rules);
    const auto back = load_lexicon(dir.file("red.tsv"), reduced);
    ASSERT_EQ(back.size(), lex.size());
    const auto hits = back.lookup("austreten", Dialect::NW);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(format_sampa(hits[0]->sampa), "U I s t r { t t @");
    EXPECT_THROW(render_export(lex, PhonesetVersion::reduced), ValidationError);
}

TEST(Export, EmptyLexiconIsHeaderOnly) {
    EXPECT_EQ(format_lexicon(Lexicon{}), std::string(lexicon_header) + "\n");
}
