#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "memestat/series.hpp"

namespace memestat {

/// One social-media post or comment.
struct Post {
    std::string id;
    std::int64_t timestamp = 0;  // UTC epoch seconds
    std::string text;

    friend bool operator==(const Post&, const Post&) = default;
};

enum class SentimentLabel { Positive, Neutral, Negative };

/// positive -> +1, neutral -> 0, negative -> -1.
double label_to_score(SentimentLabel l);
std::string_view label_name(SentimentLabel l);
/// Case-insensitive match against positive / neutral / negative.
std::optional<SentimentLabel> parse_label(std::string_view token);

// ---------------------------------------------------------------------------
// Emoji
// ---------------------------------------------------------------------------

/// Codepoint ranges that count as emoji without a variation selector.
class EmojiTable {
public:
    struct Range {
        char32_t lo;
        char32_t hi;
    };

    EmojiTable() = default;
    explicit EmojiTable(std::vector<Range> ranges);

    /// Parses `hex_start..hex_end` lines; blank lines and `#` comments are ignored.
    static EmojiTable parse(std::string_view text);
    static EmojiTable load(const std::string& path);

    bool contains(char32_t cp) const;
    std::span<const Range> ranges() const { return ranges_; }

private:
    std::vector<Range> ranges_;
};

/// The bundled table (data/emoji_ranges.txt, compiled in).
const EmojiTable& default_emoji_table();

/// Grapheme clusters of `text` that render as emoji. A cluster counts when its
/// base scalar is in `table` and is not followed by U+FE0E, or when the base has
/// the Emoji property and is immediately followed by U+FE0F. ZWJ sequences,
/// modifier sequences, keycaps and flags therefore count once.
std::vector<std::string> extract_emojis(std::string_view text, const EmojiTable& table = default_emoji_table());

std::size_t count_emojis(std::string_view text, const EmojiTable& table = default_emoji_table());

struct EmojiInventoryRow {
    std::string emoji;
    std::size_t occurrences = 0;
    std::size_t post_count = 0;

    friend bool operator==(const EmojiInventoryRow&, const EmojiInventoryRow&) = default;
};

/// Per-emoji totals, sorted by occurrences descending then by codepoint sequence.
std::vector<EmojiInventoryRow> emoji_inventory(std::span<const Post> posts,
                                               const EmojiTable& table = default_emoji_table());

// ---------------------------------------------------------------------------
// Lexicon polarity
// ---------------------------------------------------------------------------

struct Lexicon {
    std::map<std::string, double, std::less<>> entries;
    std::set<std::string, std::less<>> negators{"not", "no", "never", "n't"};

    /// `token<TAB>polarity` lines; `#` starts a comment line. Throws InputError
    /// on bad polarity, non-lowercase or duplicate tokens.
    static Lexicon parse(std::string_view text);
    static Lexicon load(const std::string& path);

    bool is_negator(std::string_view token) const;
};

/// The bundled finance/meme lexicon (data/lexicon.tsv, compiled in).
const Lexicon& default_lexicon();

/// Lowercased word tokens. Splits on whitespace, punctuation, symbols and
/// emoji; keeps in-word apostrophes (U+2019 folds to ').
std::vector<std::string> tokenize(std::string_view text);

/// Mean polarity of matched tokens; a match directly after a negator
/// contributes -0.5 times its polarity. No matches gives 0.
double lexicon_polarity(std::string_view text, const Lexicon& lexicon = default_lexicon());

// ---------------------------------------------------------------------------
// Daily aggregation
// ---------------------------------------------------------------------------

enum class Aggregation { Mean, Sum };

using LabelMap = std::unordered_map<std::string, SentimentLabel>;

struct EmojiCountScorer {
    std::reference_wrapper<const EmojiTable> table = std::cref(default_emoji_table());
};
struct LexiconScorer {
    std::reference_wrapper<const Lexicon> lexicon = std::cref(default_lexicon());
};
struct LabelScorer {
    std::reference_wrapper<const LabelMap> labels;
};

using Scorer = std::variant<EmojiCountScorer, LexiconScorer, LabelScorer>;

double score_post(const Post& post, const Scorer& scorer);

/// Per-UTC-day reduction of per-post scores. Days without posts are absent.
/// Throws InputError listing every post id without a label under LabelScorer.
DailySeries daily_signal(std::span<const Post> posts, const Scorer& scorer, Aggregation aggregation = Aggregation::Mean);

}  // namespace memestat
