#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memestat/sentiment.hpp"
#include "memestat/series.hpp"

namespace memestat {

struct ReadOptions {
    /// Fraction of malformed non-blank lines tolerated before read_posts fails.
    /// A single malformed line is always tolerated.
    double max_malformed_fraction = 0.01;
};

struct PostReadResult {
    std::vector<Post> posts;  // sorted by timestamp, then id
    std::size_t malformed = 0;
    std::vector<std::size_t> malformed_lines;  // 1-based
};

/// JSONL with one {"id", "created_utc", "body"} object per line. `created_utc`
/// may be an integer, a float (floored) or a numeric string. Lines that fail to
/// parse, lack a field, or repeat an earlier id are counted as malformed.
PostReadResult read_posts(const std::string& path, const ReadOptions& options = {});
PostReadResult parse_posts(std::string_view text, const ReadOptions& options = {});
/// Canonical JSONL: keys in id, created_utc, body order.
std::string format_posts(const std::vector<Post>& posts);
void write_posts(const std::string& path, const std::vector<Post>& posts);

/// CSV `date,close`; close must be > 0 and dates unique.
DailySeries read_prices(const std::string& path);
DailySeries parse_prices(std::string_view text);
std::string format_prices(const DailySeries& s);

/// CSV `date,interest`; interest must be an integer in 0..100 and dates unique.
DailySeries read_trends(const std::string& path);
DailySeries parse_trends(std::string_view text);
std::string format_trends(const DailySeries& s);

struct LabelRecord {
    std::string post_id;
    SentimentLabel label = SentimentLabel::Neutral;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

/// CSV `post_id,label`; labels matched case-insensitively, duplicate ids rejected.
std::vector<LabelRecord> read_labels(const std::string& path);
std::vector<LabelRecord> parse_labels(std::string_view text);
std::string format_labels(const std::vector<LabelRecord>& records);
LabelMap to_label_map(const std::vector<LabelRecord>& records);

/// Posts per UTC day; days without posts are absent.
DailySeries comment_volume(std::span<const Post> posts);

/// Keeps posts whose UTC day lies in [from, to].
std::vector<Post> filter_window(std::span<const Post> posts, Date from, Date to);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);
/// Quotes a field if it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace memestat
