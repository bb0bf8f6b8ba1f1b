#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memestat/ingest.hpp"
#include "memestat/sentiment.hpp"
#include "memestat/series.hpp"
#include "memestat/stats.hpp"

namespace memestat {

inline const std::string kPriceName = "Stock price";
inline const std::string kVolumeName = "Number of comments";
inline const std::string kTrendsName = "Google Trends";
inline const std::string kLexiconName = "Lexicon polarity";
inline const std::string kEmojiName = "Emoji counter";

/// Activity signals go to the "Value" tables, sentiment signals to the "Sentiment" tables.
enum class SignalGroup { Activity, Sentiment };

struct NamedPath {
    std::string name;
    std::string path;

    friend bool operator==(const NamedPath&, const NamedPath&) = default;
};

struct ExperimentConfig {
    std::string ticker = "GME";
    std::optional<std::string> posts;
    std::optional<std::string> prices;
    std::optional<std::string> trends;
    std::vector<NamedPath> labels;
    std::optional<std::string> lexicon;
    std::optional<std::string> emoji_table;
    Date from = Date{std::chrono::year{2021} / 1 / 4};
    Date to = Date{std::chrono::year{2021} / 3 / 31};
    std::vector<Variant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
    int maxlag = 5;
    int shift_days = 1;
    AlignPolicy align = AlignPolicy::InnerJoin;
    Aggregation aggregation = Aggregation::Mean;  // per-post scores -> daily value
    DifferenceSide correlation_side = DifferenceSide::TargetOnly;
    DifferenceSide granger_side = DifferenceSide::Both;
    std::string output_dir = "out";
    ReadOptions read_options;

    /// Throws memestat::Error on a missing price file, no predictor source,
    /// or any validate_settings() failure.
    void validate() const;
    /// Checks only the analysis settings: window order, variants, maxlag,
    /// shift, ticker and label set names.
    void validate_settings() const;
};

/// Sets one `key = value` setting (keys match the CLI flag names without dashes).
/// `labels` accepts `path` or `name=path` and appends. Throws Error on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses a plain `key = value` file (`#` comments) into ordered settings.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

/// Applies every setting of a config file. Relative input paths (not `out`)
/// are resolved against the file's directory.
void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Every analysis setting as ordered (key, value) pairs, excluding file locations.
std::vector<std::pair<std::string, std::string>> canonical_settings(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

struct NamedSeries {
    std::string name;
    SignalGroup group = SignalGroup::Activity;
    DailySeries series;
};

struct ExperimentInputs {
    DailySeries price;
    std::vector<NamedSeries> signals;
    std::size_t post_count = 0;
    std::size_t posts_outside_window = 0;
    std::size_t malformed_posts = 0;
    std::vector<std::pair<std::string, std::size_t>> unlabeled_posts;  // (label set, posts skipped)
    std::vector<std::pair<std::string, std::string>> input_digests;  // (role, sha256)
};

/// Reads every configured input, applies the window, and derives daily signals.
/// Posts missing from a label file are left out of that label signal.
ExperimentInputs load_inputs(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

/// Non-numeric table cells.
inline constexpr std::string_view kDegenerateCell = "degenerate";
inline constexpr std::string_view kInsufficientCell = "insufficient";

struct CorrelationRow {
    SignalGroup group = SignalGroup::Activity;
    std::string signal;
    CorrelationMethod method = CorrelationMethod::Pearson;
    Variant variant;
    std::optional<double> value;
    std::string note;  // degenerate / insufficient when value is empty
};

struct CausalityRow {
    SignalGroup group = SignalGroup::Activity;
    std::string cause;
    std::string effect;
    Variant variant;
    std::optional<GrangerResult> result;
    std::string note;
};

struct Provenance {
    std::string config_hash;  // sha256 of the canonical settings text
    std::vector<std::pair<std::string, std::string>> settings;
    std::vector<std::pair<std::string, std::string>> input_digests;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ResultSet {
    std::string ticker;
    std::vector<CorrelationRow> correlations;
    std::vector<CausalityRow> causality;  // headline lag per (direction, variant, signal)
    std::vector<CausalityRow> lag_scan;   // every feasible lag
    Provenance provenance;
};

/// Correlation of every signal against price, and Granger tests in both
/// directions, for every configured variant. Statistical failures become
/// degenerate/insufficient cells. Signals are evaluated concurrently.
ResultSet analyze(const ExperimentInputs& inputs, const ExperimentConfig& config);

ResultSet run_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

/// Fixed-point with 6 decimals; negative zero prints as 0.000000, infinity as inf.
std::string format_number(double v);

std::string render_markdown(const ResultSet& rs);
std::string render_csv(const ResultSet& rs);
/// Inverse of render_csv (numbers at their printed precision).
ResultSet parse_csv(std::string_view text);

struct ChartSeries {
    std::string name;
    DailySeries series;
};

/// Multi-line SVG chart; every series is min-max normalized to [0, 1] (zero
/// range maps to 0.5) over a shared date axis. Throws Error if `series` is
/// empty or any series has no points.
std::string render_chart(const std::vector<ChartSeries>& series, std::string_view title);

std::string sha256_hex(std::string_view bytes);

struct OutputFiles {
    std::string report_md;
    std::string report_csv;
    std::vector<std::string> charts;
    std::string provenance_json;
};

/// Writes report.md, report.csv, charts/*.svg and provenance.json under config.output_dir.
OutputFiles write_outputs(const ExperimentConfig& config, const ExperimentInputs& inputs, const ResultSet& rs);

}  // namespace memestat
