#include "memestat/sentiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "embedded_data.inc"
#include "memestat/error.hpp"
#include "memestat/unicode.hpp"

namespace memestat {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        fn(line_no, text.substr(0, nl));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

double label_to_score(SentimentLabel l) {
    switch (l) {
        case SentimentLabel::Positive: return 1.0;
        case SentimentLabel::Neutral: return 0.0;
        case SentimentLabel::Negative: return -1.0;
    }
    return 0.0;
}

std::string_view label_name(SentimentLabel l) {
    switch (l) {
        case SentimentLabel::Positive: return "positive";
        case SentimentLabel::Neutral: return "neutral";
        case SentimentLabel::Negative: return "negative";
    }
    return "neutral";
}

std::optional<SentimentLabel> parse_label(std::string_view token) {
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(), ascii_lower);
    if (lower == "positive") return SentimentLabel::Positive;
    if (lower == "neutral") return SentimentLabel::Neutral;
    if (lower == "negative") return SentimentLabel::Negative;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

EmojiTable::EmojiTable(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
    std::sort(ranges_.begin(), ranges_.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        if (ranges_[i].hi < ranges_[i].lo) throw InputError("emoji table: range end before start");
        if (i > 0 && ranges_[i].lo <= ranges_[i - 1].hi) throw InputError("emoji table: overlapping ranges");
    }
}

EmojiTable EmojiTable::parse(std::string_view text) {
    std::vector<Range> ranges;
    for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') return;
        const auto dots = line.find("..");
        auto hex = [&](std::string_view s) {
            std::uint32_t v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
            if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || v > 0x10FFFF) {
                throw InputError("emoji table line " + std::to_string(line_no) + ": bad codepoint");
            }
            return static_cast<char32_t>(v);
        };
        if (dots == std::string_view::npos) {
            throw InputError("emoji table line " + std::to_string(line_no) + ": expected hex_start..hex_end");
        }
        ranges.push_back({hex(line.substr(0, dots)), hex(line.substr(dots + 2))});
    });
    return EmojiTable(std::move(ranges));
}

EmojiTable EmojiTable::load(const std::string& path) {
    return parse(read_file(path));
}

bool EmojiTable::contains(char32_t cp) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), cp, [](char32_t c, const Range& r) { return c < r.lo; });
    if (it == ranges_.begin()) return false;
    return cp <= std::prev(it)->hi;
}

const EmojiTable& default_emoji_table() {
    static const EmojiTable table = EmojiTable::parse(embedded::kEmojiRanges);
    return table;
}

namespace {

// Calls fn(cluster codepoints) for each emoji cluster.
template <typename Fn>
void for_each_emoji(std::string_view text, const EmojiTable& table, Fn&& fn) {
    namespace u = unicode;
    const std::u32string cps = u::decode_utf8(text);
    const std::u32string_view view(cps);
    for (const auto& c : u::grapheme_clusters(view)) {
        std::size_t base = c.begin;
        while (base + 1 < c.end && u::break_class(cps[base]) == u::BreakClass::Prepend) ++base;
        const char32_t cp = cps[base];
        const char32_t next = base + 1 < c.end ? cps[base + 1] : 0;
        const bool counted = (table.contains(cp) && next != u::kTextPresentation) ||
                             (next == u::kEmojiPresentation && u::has_emoji_property(cp));
        if (counted) fn(view.substr(c.begin, c.end - c.begin));
    }
}

}  // namespace

std::vector<std::string> extract_emojis(std::string_view text, const EmojiTable& table) {
    std::vector<std::string> out;
    for_each_emoji(text, table, [&](std::u32string_view cluster) { out.push_back(unicode::encode_utf8(cluster)); });
    return out;
}

std::size_t count_emojis(std::string_view text, const EmojiTable& table) {
    std::size_t n = 0;
    for_each_emoji(text, table, [&](std::u32string_view) { ++n; });
    return n;
}

std::vector<EmojiInventoryRow> emoji_inventory(std::span<const Post> posts, const EmojiTable& table) {
    struct Tally {
        std::size_t occurrences = 0;
        std::size_t post_count = 0;
    };
    std::map<std::u32string, Tally> tallies;
    for (const auto& post : posts) {
        std::map<std::u32string, std::size_t> local;
        for_each_emoji(post.text, table, [&](std::u32string_view cluster) { ++local[std::u32string(cluster)]; });
        for (const auto& [emoji, count] : local) {
            auto& t = tallies[emoji];
            t.occurrences += count;
            t.post_count += 1;
        }
    }

    std::vector<std::pair<std::u32string, Tally>> sorted(tallies.begin(), tallies.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.second.occurrences > b.second.occurrences; });
    std::vector<EmojiInventoryRow> rows;
    rows.reserve(sorted.size());
    for (const auto& [emoji, t] : sorted) rows.push_back({unicode::encode_utf8(emoji), t.occurrences, t.post_count});
    return rows;
}

// ---------------------------------------------------------------------------

Lexicon Lexicon::parse(std::string_view text) {
    Lexicon lex;
    for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') return;
        const auto where = "lexicon line " + std::to_string(line_no) + ": ";
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw InputError(where + "expected token<TAB>polarity");
        const auto token = trim(line.substr(0, tab));
        const auto value = trim(line.substr(tab + 1));
        double polarity = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), polarity);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(polarity)) {
            throw InputError(where + "bad polarity");
        }
        if (polarity < -1.0 || polarity > 1.0) throw InputError(where + "polarity outside [-1, 1]");
        if (token.empty()) throw InputError(where + "empty token");
        if (std::any_of(token.begin(), token.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
            throw InputError(where + "token must be lowercase");
        }
        if (!lex.entries.emplace(std::string(token), polarity).second) {
            throw InputError(where + "duplicate token '" + std::string(token) + "'");
        }
    });
    return lex;
}

Lexicon Lexicon::load(const std::string& path) {
    return parse(read_file(path));
}

bool Lexicon::is_negator(std::string_view token) const {
    if (negators.contains(token)) return true;
    return token.size() > 3 && token.ends_with("n't") && negators.contains(std::string_view("n't"));
}

const Lexicon& default_lexicon() {
    static const Lexicon lex = Lexicon::parse(embedded::kLexicon);
    return lex;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        const auto first = current.find_first_not_of('\'');
        if (first != std::string::npos) {
            const auto last = current.find_last_not_of('\'');
            tokens.push_back(current.substr(first, last - first + 1));
        }
        current.clear();
    };
    for (char32_t cp : unicode::decode_utf8(text)) {
        if (cp == 0x2019) cp = '\'';
        if (unicode::is_word_separator(cp)) {
            flush();
            continue;
        }
        if (cp < 0x80) {
            current.push_back(ascii_lower(static_cast<char>(cp)));
        } else {
            unicode::append_utf8(current, cp);
        }
    }
    flush();
    return tokens;
}

double lexicon_polarity(std::string_view text, const Lexicon& lexicon) {
    const auto tokens = tokenize(text);
    double total = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (lexicon.is_negator(tokens[i])) continue;
        const auto it = lexicon.entries.find(tokens[i]);
        if (it == lexicon.entries.end()) continue;
        const bool negated = i > 0 && lexicon.is_negator(tokens[i - 1]);
        total += negated ? -0.5 * it->second : it->second;
        ++matched;
    }
    return matched == 0 ? 0.0 : total / static_cast<double>(matched);
}

// ---------------------------------------------------------------------------

double score_post(const Post& post, const Scorer& scorer) {
    struct Visitor {
        const Post& post;
        double operator()(const EmojiCountScorer& s) const {
            return static_cast<double>(count_emojis(post.text, s.table.get()));
        }
        double operator()(const LexiconScorer& s) const { return lexicon_polarity(post.text, s.lexicon.get()); }
        double operator()(const LabelScorer& s) const {
            const auto it = s.labels.get().find(post.id);
            if (it == s.labels.get().end()) throw InputError("missing label for post id " + post.id);
            return label_to_score(it->second);
        }
    };
    return std::visit(Visitor{post}, scorer);
}

DailySeries daily_signal(std::span<const Post> posts, const Scorer& scorer, Aggregation aggregation) {
    if (posts.empty()) throw InsufficientDataError("daily_signal: no posts");

    if (const auto* by_label = std::get_if<LabelScorer>(&scorer)) {
        std::vector<std::string> missing;
        for (const auto& p : posts) {
            if (!by_label->labels.get().contains(p.id)) missing.push_back(p.id);
        }
        if (!missing.empty()) {
            std::string msg = "missing labels for " + std::to_string(missing.size()) + " post id(s):";
            for (const auto& id : missing) msg += " " + id;
            throw InputError(msg);
        }
    }

    struct Bucket {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<Date, Bucket> buckets;
    for (const auto& p : posts) {
        auto& b = buckets[utc_day(p.timestamp)];
        b.sum += score_post(p, scorer);
        ++b.count;
    }
    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(buckets.size());
    values.reserve(buckets.size());
    for (const auto& [day, b] : buckets) {
        dates.push_back(day);
        values.push_back(aggregation == Aggregation::Mean ? b.sum / static_cast<double>(b.count) : b.sum);
    }
    return {std::move(dates), std::move(values)};
}

}  // namespace memestat
