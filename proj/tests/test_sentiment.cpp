#include <gtest/gtest.h>

#include <numeric>

#include "emoji_corpus.hpp"
#include "memestat/error.hpp"
#include "memestat/sentiment.hpp"
#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace memestat;
using testutil::day;

namespace {

Post post(std::string id, Date d, std::string text, int second = 0) {
    const auto ts = std::chrono::sys_seconds{d}.time_since_epoch().count() + second;
    return Post{std::move(id), ts, std::move(text)};
}

Lexicon test_lexicon() { return Lexicon::load(testutil::data_path("test_lexicon.tsv")); }

}  // namespace

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

TEST(Labels, ScoresAndNames) {
    EXPECT_EQ(label_to_score(SentimentLabel::Positive), 1.0);
    EXPECT_EQ(label_to_score(SentimentLabel::Neutral), 0.0);
    EXPECT_EQ(label_to_score(SentimentLabel::Negative), -1.0);
    EXPECT_EQ(parse_label("POSITIVE"), SentimentLabel::Positive);
    EXPECT_EQ(parse_label("Neutral"), SentimentLabel::Neutral);
    EXPECT_EQ(parse_label(label_name(SentimentLabel::Negative)), SentimentLabel::Negative);
    EXPECT_FALSE(parse_label("meh"));
}

// ---------------------------------------------------------------------------
// Emoji
// ---------------------------------------------------------------------------

TEST(Emoji, CountExamples) {
    EXPECT_EQ(count_emojis(""), 0u);
    EXPECT_EQ(count_emojis("🚀🚀💎 to the moon"), 3u);
    EXPECT_EQ(count_emojis("we are a 👨‍👩‍👧‍👦 now"), 1u);
    EXPECT_EQ(count_emojis("👍🏽"), 1u);
    EXPECT_EQ(count_emojis("🇺🇸"), 1u);
    EXPECT_EQ(count_emojis("1️⃣"), 1u);
    EXPECT_EQ(count_emojis("123 # *"), 0u);
    EXPECT_EQ(count_emojis("❤"), 0u);
    EXPECT_EQ(count_emojis("❤️"), 1u);
    EXPECT_EQ(count_emojis("⌚︎"), 0u);
    EXPECT_EQ(count_emojis("⌚"), 1u);
    EXPECT_EQ(count_emojis("🏳️‍🌈"), 1u);
}

TEST(Emoji, ExtractReturnsClusters) {
    EXPECT_EQ(extract_emojis("a👍🏽b🇺🇸"), (std::vector<std::string>{"👍🏽", "🇺🇸"}));
}

TEST(Emoji, MatchesIcuSegmentationOracle) {
    std::size_t total = 0;
    for (const auto& text : testutil::emoji_corpus()) {
        const auto expected = oracle::icu_emojis(text);
        EXPECT_EQ(extract_emojis(text), expected) << text;
        EXPECT_EQ(count_emojis(text), expected.size()) << text;
        total += expected.size();
    }
    EXPECT_GT(total, 300u);
}

TEST(Emoji, AdditiveUnderConcatenation) {
    const auto corpus = testutil::emoji_corpus();
    for (std::size_t i = 0; i + 1 < corpus.size(); ++i) {
        // A space between the halves guarantees a cluster boundary.
        const std::string joined = corpus[i] + " " + corpus[i + 1];
        EXPECT_EQ(count_emojis(joined), count_emojis(corpus[i]) + count_emojis(corpus[i + 1]));
    }
}

TEST(EmojiTable, ParsesAndValidates) {
    const EmojiTable t = EmojiTable::parse("# comment\n1F600..1F64F\n\n2705..2705\n");
    EXPECT_TRUE(t.contains(0x1F600));
    EXPECT_TRUE(t.contains(0x2705));
    EXPECT_FALSE(t.contains(0x2706));
    EXPECT_EQ(t.ranges().size(), 2u);
    EXPECT_THROW(EmojiTable::parse("1F600-1F64F\n"), InputError);
    EXPECT_THROW(EmojiTable::parse("ZZZ..1F64F\n"), InputError);
    EXPECT_THROW(EmojiTable::parse("1F64F..1F600\n"), InputError);
    EXPECT_THROW(EmojiTable::parse("1F600..1F64F\n1F640..1F650\n"), InputError);
}

TEST(EmojiTable, CustomTableChangesCounts) {
    const EmojiTable rockets_only = EmojiTable::parse("1F680..1F680\n");
    EXPECT_EQ(count_emojis("🚀💎🚀", rockets_only), 2u);
    // Explicit emoji presentation still counts regardless of the table.
    EXPECT_EQ(count_emojis("❤️", rockets_only), 1u);
}

TEST(EmojiTable, BundledTableCoversEmojiBlocks) {
    const EmojiTable& t = default_emoji_table();
    for (const char32_t cp : {0x1F600, 0x1F64F, 0x1F680, 0x1F6A8, 0x1F90D, 0x1F9FF, 0x1F1E6, 0x1F1FF, 0x231A}) {
        EXPECT_TRUE(t.contains(cp)) << std::hex << static_cast<unsigned>(cp);
    }
    // Text-default pictographs are not emoji without FE0F.
    for (const char32_t cp : {0x2764, 0x00A9, 0x263A, 0x1F5E8}) EXPECT_FALSE(t.contains(cp));
}

TEST(EmojiInventory, Examples) {
    EXPECT_TRUE(emoji_inventory({}).empty());
    const std::vector<Post> posts{post("a", day(2021, 1, 1), "🚀🚀"), post("b", day(2021, 1, 1), "🚀💎")};
    EXPECT_EQ(emoji_inventory(posts),
              (std::vector<EmojiInventoryRow>{{"🚀", 3, 2}, {"💎", 1, 1}}));
}

TEST(EmojiInventory, TiesOrderedByCodepoint) {
    const std::vector<Post> posts{post("a", day(2021, 1, 1), "🚀😀💎")};
    const auto rows = emoji_inventory(posts);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].emoji, "💎");  // U+1F48E
    EXPECT_EQ(rows[1].emoji, "😀");  // U+1F600
    EXPECT_EQ(rows[2].emoji, "🚀");  // U+1F680
}

TEST(EmojiInventory, ConservesCounts) {
    std::vector<Post> posts;
    std::size_t expected = 0;
    const auto corpus = testutil::emoji_corpus();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        posts.push_back(post("p" + std::to_string(i), day(2021, 1, 1), corpus[i]));
        expected += count_emojis(corpus[i]);
    }
    std::size_t total = 0;
    for (const auto& row : emoji_inventory(posts)) {
        EXPECT_GE(row.occurrences, row.post_count);
        EXPECT_GE(row.post_count, 1u);
        total += row.occurrences;
    }
    EXPECT_EQ(total, expected);
}

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

TEST(Lexicon, PolarityExamples) {
    const Lexicon lex = test_lexicon();
    EXPECT_DOUBLE_EQ(lexicon_polarity("good", lex), 0.7);
    EXPECT_DOUBLE_EQ(lexicon_polarity("not good", lex), -0.35);
    EXPECT_DOUBLE_EQ(lexicon_polarity("xyzzy plugh", lex), 0.0);
    EXPECT_DOUBLE_EQ(lexicon_polarity("", lex), 0.0);
}

TEST(Lexicon, NegationVariants) {
    const Lexicon lex = test_lexicon();
    EXPECT_DOUBLE_EQ(lexicon_polarity("never bad", lex), 0.25);
    EXPECT_DOUBLE_EQ(lexicon_polarity("isn't good", lex), -0.35);
    EXPECT_DOUBLE_EQ(lexicon_polarity("isn’t good", lex), -0.35);
    EXPECT_DOUBLE_EQ(lexicon_polarity("NOT GOOD!", lex), -0.35);
    // Negation reaches only the next token.
    EXPECT_DOUBLE_EQ(lexicon_polarity("not very good", lex), 0.7);
    // Mean over matches.
    EXPECT_DOUBLE_EQ(lexicon_polarity("good bad", lex), (0.7 - 0.5) / 2);
}

TEST(Lexicon, BoundedOnRandomText) {
    const Lexicon& lex = default_lexicon();
    std::vector<std::string> words;
    for (const auto& [token, _] : lex.entries) words.push_back(token);
    words.insert(words.end(), {"not", "no", "never", "don't", "the", "🚀", ",", "!"});
    Xoshiro256StarStar rng(44);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        const std::size_t n = 1 + rng.below(15);
        for (std::size_t i = 0; i < n; ++i) text += words[rng.below(words.size())] + " ";
        const double s = lexicon_polarity(text, lex);
        EXPECT_LE(std::abs(s), 1.0);
    }
}

TEST(Lexicon, ParseValidation) {
    EXPECT_THROW(Lexicon::parse("good\t1.5\n"), InputError);
    EXPECT_THROW(Lexicon::parse("Good\t0.5\n"), InputError);
    EXPECT_THROW(Lexicon::parse("good\t0.5\ngood\t0.4\n"), InputError);
    EXPECT_THROW(Lexicon::parse("good 0.5\n"), InputError);
    EXPECT_THROW(Lexicon::parse("good\tabc\n"), InputError);
    try {
        Lexicon::parse("# header\nok\t0.1\nbad\t2\n");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    const Lexicon lex = Lexicon::parse("# c\n\nmoon\t0.8\n");
    EXPECT_EQ(lex.entries.size(), 1u);
}

TEST(Lexicon, BundledLexiconLoads) {
    const Lexicon& lex = default_lexicon();
    EXPECT_GE(lex.entries.size(), 150u);
    for (const auto& [token, polarity] : lex.entries) {
        EXPECT_LE(std::abs(polarity), 1.0) << token;
    }
    EXPECT_TRUE(lex.is_negator("not"));
    EXPECT_TRUE(lex.is_negator("don't"));
    EXPECT_FALSE(lex.is_negator("moon"));
}

TEST(Tokenize, SplitsAndLowercases) {
    EXPECT_EQ(tokenize("HODL!! to the Moon🚀, don't sell"),
              (std::vector<std::string>{"hodl", "to", "the", "moon", "don't", "sell"}));
    EXPECT_EQ(tokenize("'quoted' words’"), (std::vector<std::string>{"quoted", "words"}));
    EXPECT_EQ(tokenize("café bar"), (std::vector<std::string>{"café", "bar"}));
    EXPECT_TRUE(tokenize("  ...  ").empty());
}

// ---------------------------------------------------------------------------
// Daily aggregation
// ---------------------------------------------------------------------------

TEST(DailySignal, LabelCancellation) {
    const std::vector<Post> posts{post("a", day(2021, 1, 5), "x", 10), post("b", day(2021, 1, 5), "y", 20)};
    const LabelMap labels{{"a", SentimentLabel::Positive}, {"b", SentimentLabel::Negative}};
    const DailySeries s = daily_signal(posts, LabelScorer{labels}, Aggregation::Mean);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.dates()[0], day(2021, 1, 5));
    EXPECT_EQ(s.values()[0], 0.0);
}

TEST(DailySignal, EmojiMean) {
    const std::vector<Post> posts{post("a", day(2021, 1, 5), "🚀🚀"), post("b", day(2021, 1, 5), "none"),
                                  post("c", day(2021, 1, 5), "🚀💎🙌🦍")};
    EXPECT_EQ(daily_signal(posts, EmojiCountScorer{}, Aggregation::Mean).values()[0], 2.0);
    EXPECT_EQ(daily_signal(posts, EmojiCountScorer{}, Aggregation::Sum).values()[0], 6.0);
}

TEST(DailySignal, SumEqualsMeanForSinglePost) {
    const std::vector<Post> posts{post("a", day(2021, 1, 5), "good moon")};
    EXPECT_EQ(daily_signal(posts, LexiconScorer{}, Aggregation::Mean),
              daily_signal(posts, LexiconScorer{}, Aggregation::Sum));
}

TEST(DailySignal, EmptyDaysAbsentAndUtcBucketing) {
    const std::vector<Post> posts{post("a", day(2021, 1, 5), "🚀", 86399), post("b", day(2021, 1, 7), "🚀🚀", 0)};
    const DailySeries s = daily_signal(posts, EmojiCountScorer{});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.dates()[0], day(2021, 1, 5));
    EXPECT_EQ(s.dates()[1], day(2021, 1, 7));
}

TEST(DailySignal, MissingLabelsListed) {
    const std::vector<Post> posts{post("a", day(2021, 1, 5), "x"), post("b", day(2021, 1, 5), "y"),
                                  post("c", day(2021, 1, 6), "z")};
    const LabelMap labels{{"b", SentimentLabel::Neutral}};
    try {
        daily_signal(posts, LabelScorer{labels});
        FAIL() << "expected an error";
    } catch (const InputError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(" a"), std::string::npos);
        EXPECT_NE(msg.find(" c"), std::string::npos);
        EXPECT_EQ(msg.find(" b"), std::string::npos);
    }
    EXPECT_THROW(daily_signal(std::vector<Post>{}, EmojiCountScorer{}), InsufficientDataError);
}

TEST(DailySignal, DuplicatingPostsKeepsMeanDoublesSum) {
    Xoshiro256StarStar rng(12);
    const auto corpus = testutil::emoji_corpus();
    std::vector<Post> posts;
    for (std::size_t i = 0; i < 60; ++i) {
        posts.push_back(post("p" + std::to_string(i), day(2021, 1, 1) + std::chrono::days{rng.below(5)},
                             corpus[rng.below(corpus.size())] + " good moon not bad", static_cast<int>(i)));
    }
    std::vector<Post> doubled = posts;
    for (const auto& p : posts) doubled.push_back(Post{p.id + "dup", p.timestamp, p.text});
    for (const Scorer& scorer : {Scorer{EmojiCountScorer{}}, Scorer{LexiconScorer{}}}) {
        const DailySeries mean1 = daily_signal(posts, scorer, Aggregation::Mean);
        const DailySeries mean2 = daily_signal(doubled, scorer, Aggregation::Mean);
        const DailySeries sum1 = daily_signal(posts, scorer, Aggregation::Sum);
        const DailySeries sum2 = daily_signal(doubled, scorer, Aggregation::Sum);
        ASSERT_EQ(mean1.size(), mean2.size());
        for (std::size_t i = 0; i < mean1.size(); ++i) {
            EXPECT_NEAR(mean1.values()[i], mean2.values()[i], 1e-12);
            EXPECT_NEAR(2 * sum1.values()[i], sum2.values()[i], 1e-12);
        }
    }
}
