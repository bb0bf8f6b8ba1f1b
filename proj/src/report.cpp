#include "memestat/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "memestat/error.hpp"

namespace memestat {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

int parse_int(std::string_view key, std::string_view text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error("setting " + std::string(key) + ": expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

double parse_double(std::string_view text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InputError("expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

Date parse_date_setting(std::string_view key, std::string_view text) {
    const auto d = parse_iso_date(text);
    if (!d) throw Error("setting " + std::string(key) + ": expected YYYY-MM-DD, got '" + std::string(text) + "'");
    return *d;
}

std::string_view bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw InputError("expected true or false, got '" + std::string(text) + "'");
}

std::string_view align_name(AlignPolicy p) { return p == AlignPolicy::InnerJoin ? "inner" : "ffill"; }
std::string_view agg_name(Aggregation a) { return a == Aggregation::Mean ? "mean" : "sum"; }
std::string_view side_name(DifferenceSide s) { return s == DifferenceSide::TargetOnly ? "target" : "both"; }

std::string group_key(SignalGroup g) { return g == SignalGroup::Activity ? "activity" : "sentiment"; }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (!prices) throw Error("config: a price file is required");
    if (!posts && !trends) throw Error("config: at least one predictor source (posts or trends) is required");
    if (!labels.empty() && !posts) throw Error("config: label files need a posts file");
    validate_settings();
}

void ExperimentConfig::validate_settings() const {
    if (!(from < to)) throw Error("config: window start must be before window end");
    if (variants.empty()) throw Error("config: no variants selected");
    if (maxlag < 1) throw Error("config: maxlag must be >= 1");
    if (shift_days < 1) throw Error("config: shift must be >= 1");
    if (ticker.empty()) throw Error("config: ticker must not be empty");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].name.empty()) throw Error("config: label set name must not be empty");
        for (std::size_t j = 0; j < i; ++j) {
            if (labels[i].name == labels[j].name) throw Error("config: duplicate label set name " + labels[i].name);
        }
    }
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view raw) {
    const std::string value(trim(raw));
    if (key == "ticker") {
        config.ticker = value;
    } else if (key == "posts") {
        config.posts = value;
    } else if (key == "prices") {
        config.prices = value;
    } else if (key == "trends") {
        config.trends = value;
    } else if (key == "lexicon") {
        config.lexicon = value;
    } else if (key == "emoji-table") {
        config.emoji_table = value;
    } else if (key == "labels") {
        NamedPath np;
        const auto eq = value.find('=');
        if (eq != std::string::npos && eq > 0 && value.find_first_of("/\\") > eq) {
            np.name = std::string(trim(std::string_view(value).substr(0, eq)));
            np.path = std::string(trim(std::string_view(value).substr(eq + 1)));
        } else {
            np.path = value;
            np.name = std::filesystem::path(value).stem().string();
        }
        if (np.path.empty()) throw Error("setting labels: empty path");
        config.labels.push_back(std::move(np));
    } else if (key == "from") {
        config.from = parse_date_setting(key, value);
    } else if (key == "to") {
        config.to = parse_date_setting(key, value);
    } else if (key == "variants") {
        std::vector<Variant> vs;
        for (const auto part : split(value, ',')) {
            const auto name = trim(part);
            if (name.empty()) continue;
            if (name == "all") {
                vs.insert(vs.end(), std::begin(kAllVariants), std::end(kAllVariants));
                continue;
            }
            const auto v = parse_variant(name);
            if (!v) throw Error("setting variants: unknown variant '" + std::string(name) + "'");
            vs.push_back(*v);
        }
        std::vector<Variant> unique;
        for (const Variant& v : kAllVariants) {
            if (std::find(vs.begin(), vs.end(), v) != vs.end()) unique.push_back(v);
        }
        config.variants = std::move(unique);
    } else if (key == "maxlag") {
        config.maxlag = parse_int(key, value);
    } else if (key == "shift") {
        config.shift_days = parse_int(key, value);
    } else if (key == "align") {
        if (value == "inner" || value == "inner-join") {
            config.align = AlignPolicy::InnerJoin;
        } else if (value == "ffill" || value == "forward-fill") {
            config.align = AlignPolicy::ForwardFill;
        } else {
            throw Error("setting align: expected inner or ffill");
        }
    } else if (key == "agg") {
        if (value == "mean") {
            config.aggregation = Aggregation::Mean;
        } else if (value == "sum") {
            config.aggregation = Aggregation::Sum;
        } else {
            throw Error("setting agg: expected mean or sum");
        }
    } else if (key == "correlation-side" || key == "granger-side") {
        DifferenceSide side;
        if (value == "target") {
            side = DifferenceSide::TargetOnly;
        } else if (value == "both") {
            side = DifferenceSide::Both;
        } else {
            throw Error("setting " + std::string(key) + ": expected target or both");
        }
        (key == "granger-side" ? config.granger_side : config.correlation_side) = side;
    } else if (key == "max-malformed") {
        config.read_options.max_malformed_fraction = parse_double(value);
    } else if (key == "out") {
        config.output_dir = value;
    } else {
        throw Error("unknown setting '" + std::string(key) + "'");
    }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (const auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw Error("config line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    for (const auto& [key, value] : parse_config_text(read_text_file(path))) {
        apply_setting(config, key, value);
        if (key == "posts") resolve(*config.posts);
        if (key == "prices") resolve(*config.prices);
        if (key == "trends") resolve(*config.trends);
        if (key == "lexicon") resolve(*config.lexicon);
        if (key == "emoji-table") resolve(*config.emoji_table);
        if (key == "labels") resolve(config.labels.back().path);
    }
}

std::vector<std::pair<std::string, std::string>> canonical_settings(const ExperimentConfig& c) {
    std::string variants;
    for (const Variant& v : c.variants) {
        if (!variants.empty()) variants += ",";
        variants += variant_name(v);
    }
    std::string label_sets;
    for (const auto& l : c.labels) {
        if (!label_sets.empty()) label_sets += ",";
        label_sets += l.name;
    }
    char malformed[32];
    std::snprintf(malformed, sizeof malformed, "%g", c.read_options.max_malformed_fraction);
    return {
        {"ticker", c.ticker},
        {"from", format_iso_date(c.from)},
        {"to", format_iso_date(c.to)},
        {"variants", variants},
        {"maxlag", std::to_string(c.maxlag)},
        {"shift", std::to_string(c.shift_days)},
        {"align", std::string(align_name(c.align))},
        {"agg", std::string(agg_name(c.aggregation))},
        {"correlation-side", std::string(side_name(c.correlation_side))},
        {"granger-side", std::string(side_name(c.granger_side))},
        {"max-malformed", malformed},
        {"label-sets", label_sets},
    };
}

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

DailySeries clip(const DailySeries& s, Date from, Date to) {
    std::vector<Date> dates;
    std::vector<double> values;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.dates()[i] >= from && s.dates()[i] <= to) {
            dates.push_back(s.dates()[i]);
            values.push_back(s.values()[i]);
        }
    }
    return DailySeries(std::move(dates), std::move(values));
}

}  // namespace

ExperimentInputs load_inputs(const ExperimentConfig& config) {
    config.validate();
    ExperimentInputs in;

    auto read_digested = [&](const std::string& role, const std::string& path) {
        std::string text = read_text_file(path);
        in.input_digests.emplace_back(role, sha256_hex(text));
        return text;
    };

    in.price = clip(parse_prices(read_digested("prices", *config.prices)), config.from, config.to);
    if (in.price.empty()) throw InputError("no price data inside the window");

    std::vector<Post> posts;
    if (config.posts) {
        const auto result = parse_posts(read_digested("posts", *config.posts), config.read_options);
        in.malformed_posts = result.malformed;
        posts = filter_window(result.posts, config.from, config.to);
        in.post_count = posts.size();
        in.posts_outside_window = result.posts.size() - posts.size();
        if (posts.empty()) throw InputError("no posts inside the window");
        in.signals.push_back({kVolumeName, SignalGroup::Activity, comment_volume(posts)});
    }
    if (config.trends) {
        in.signals.push_back({kTrendsName, SignalGroup::Activity,
                              clip(parse_trends(read_digested("trends", *config.trends)), config.from, config.to)});
        if (in.signals.back().series.empty()) throw InputError("no trends data inside the window");
    }
    if (config.posts) {
        const Lexicon lexicon =
            config.lexicon ? Lexicon::parse(read_digested("lexicon", *config.lexicon)) : default_lexicon();
        const EmojiTable table = config.emoji_table
                                     ? EmojiTable::parse(read_digested("emoji-table", *config.emoji_table))
                                     : default_emoji_table();
        in.signals.push_back(
            {kLexiconName, SignalGroup::Sentiment, daily_signal(posts, LexiconScorer{lexicon}, config.aggregation)});
        in.signals.push_back(
            {kEmojiName, SignalGroup::Sentiment, daily_signal(posts, EmojiCountScorer{table}, config.aggregation)});
        for (const auto& set : config.labels) {
            const LabelMap labels = to_label_map(parse_labels(read_digested("labels:" + set.name, set.path)));
            std::vector<Post> labeled;
            for (const Post& p : posts) {
                if (labels.contains(p.id)) labeled.push_back(p);
            }
            in.unlabeled_posts.emplace_back(set.name, posts.size() - labeled.size());
            if (labeled.empty()) throw InputError("label set " + set.name + " covers no post inside the window");
            in.signals.push_back(
                {set.name, SignalGroup::Sentiment, daily_signal(labeled, LabelScorer{labels}, config.aggregation)});
        }
    }
    return in;
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

namespace {

/// Runs fn; statistical failures become a cell note, anything else propagates.
template <class Fn>
std::string attempt(Fn&& fn) {
    try {
        fn();
        return {};
    } catch (const DegenerateSeriesError&) {
        return std::string(kDegenerateCell);
    } catch (const SingularMatrixError&) {
        return std::string(kDegenerateCell);
    } catch (const InsufficientDataError&) {
        return std::string(kInsufficientCell);
    }
}

struct SignalRows {
    std::vector<CorrelationRow> correlations;
    std::vector<CausalityRow> causality;
    std::vector<CausalityRow> lag_scan;
};

SignalRows analyze_signal(const NamedSeries& signal, const DailySeries& price, const ExperimentConfig& config) {
    SignalRows rows;
    const AlignedPair pair = align(signal.series, price, config.align);

    for (const CorrelationMethod method : {CorrelationMethod::Pearson, CorrelationMethod::Kendall}) {
        for (const Variant& v : config.variants) {
            CorrelationRow row{signal.group, signal.name, method, v, std::nullopt, {}};
            row.note = attempt([&] {
                const AlignedPair p = apply_variant(pair, v, config.correlation_side, config.shift_days);
                row.value = method == CorrelationMethod::Pearson ? pearson(p.x(), p.y()) : kendall_tau(p.x(), p.y());
            });
            rows.correlations.push_back(std::move(row));
        }
    }

    for (const bool price_causes : {true, false}) {
        for (const Variant& v : config.variants) {
            CausalityRow row;
            row.group = signal.group;
            row.cause = price_causes ? kPriceName : signal.name;
            row.effect = price_causes ? signal.name : kPriceName;
            row.variant = v;
            row.note = attempt([&] {
                const AlignedPair p = apply_variant(pair, v, config.granger_side, config.shift_days);
                const auto cause = price_causes ? p.y() : p.x();
                const auto effect = price_causes ? p.x() : p.y();
                GrangerScan scan = granger_scan(cause, effect, config.maxlag, row.cause, row.effect);
                row.result = scan.headline;
                for (auto& r : scan.per_lag) {
                    rows.lag_scan.push_back({signal.group, row.cause, row.effect, v, std::move(r), {}});
                }
            });
            rows.causality.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

ResultSet analyze(const ExperimentInputs& inputs, const ExperimentConfig& config) {
    config.validate_settings();
    std::vector<std::future<SignalRows>> tasks;
    tasks.reserve(inputs.signals.size());
    for (const auto& signal : inputs.signals) {
        tasks.push_back(std::async(std::launch::async, analyze_signal, std::cref(signal), std::cref(inputs.price),
                                   std::cref(config)));
    }

    ResultSet rs;
    rs.ticker = config.ticker;
    // Activity tables first, then sentiment; signal order within a group is preserved.
    std::vector<SignalRows> collected;
    for (auto& t : tasks) collected.push_back(t.get());
    for (const SignalGroup group : {SignalGroup::Activity, SignalGroup::Sentiment}) {
        for (std::size_t i = 0; i < collected.size(); ++i) {
            if (inputs.signals[i].group != group) continue;
            auto& c = collected[i];
            std::move(c.correlations.begin(), c.correlations.end(), std::back_inserter(rs.correlations));
            std::move(c.causality.begin(), c.causality.end(), std::back_inserter(rs.causality));
            std::move(c.lag_scan.begin(), c.lag_scan.end(), std::back_inserter(rs.lag_scan));
        }
    }

    rs.provenance.settings = canonical_settings(config);
    std::string canonical;
    for (const auto& [k, v] : rs.provenance.settings) canonical += k + " = " + v + "\n";
    rs.provenance.config_hash = sha256_hex(canonical);
    rs.provenance.input_digests = inputs.input_digests;
    return rs;
}

ResultSet run_experiment(const ExperimentConfig& config) { return analyze(load_inputs(config), config); }

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s = buf;
    if (s == "-0.000000") s = "0.000000";
    return s;
}

namespace {

const char* const kCorrelationTitle = "Stock price correlation measurements for ";
const char* const kCausalityTitle = "Granger Causality measurements (p-value) for ";
const char* const kSentimentSuffix = " (sentiment data)";

std::vector<std::string> correlation_header(SignalGroup g) {
    return {"Type", "Shifted", g == SignalGroup::Activity ? "Value" : "Sentiment", "Correlation", "Stationary"};
}

const std::vector<std::string> kCausalityHeader = {"Cause", "Effect", "p", "Stationary", "Shifted", "Lag", "F"};
const std::vector<std::string> kLagScanHeader = {"Cause", "Effect",          "Stationary",        "Shifted", "Lag",
                                                 "F",     "p",               "RSS restricted",    "RSS unrestricted",
                                                 "N"};

std::vector<std::string> correlation_cells(const CorrelationRow& r) {
    return {method_name(r.method), std::string(bool_text(r.variant.shifted)), r.signal,
            r.value ? format_number(*r.value) : r.note, std::string(bool_text(r.variant.stationary))};
}

std::vector<std::string> causality_cells(const CausalityRow& r) {
    std::vector<std::string> cells{r.cause, r.effect, "", std::string(bool_text(r.variant.stationary)),
                                   std::string(bool_text(r.variant.shifted)), "", ""};
    if (r.result) {
        cells[2] = format_number(r.result->p_value);
        cells[5] = std::to_string(r.result->lag);
        cells[6] = format_number(r.result->f_stat);
    } else {
        cells[2] = r.note;
    }
    return cells;
}

std::vector<std::string> lag_scan_cells(const CausalityRow& r) {
    const GrangerResult& g = *r.result;
    return {r.cause,
            r.effect,
            std::string(bool_text(r.variant.stationary)),
            std::string(bool_text(r.variant.shifted)),
            std::to_string(g.lag),
            format_number(g.f_stat),
            format_number(g.p_value),
            format_number(g.rss_restricted),
            format_number(g.rss_unrestricted),
            std::to_string(g.n_effective)};
}

std::string md_cell(std::string_view s) {
    std::string out;
    for (const char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

void md_table(std::ostringstream& os, const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
    os << "|";
    for (const auto& h : header) os << ' ' << md_cell(h) << " |";
    os << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) os << " --- |";
    os << "\n";
    for (const auto& row : rows) {
        os << "|";
        for (const auto& c : row) os << ' ' << md_cell(c) << " |";
        os << "\n";
    }
}

template <class Row, class Cells>
std::vector<std::vector<std::string>> table_rows(const std::vector<Row>& rows, SignalGroup g, Cells cells) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) {
        if (r.group == g) out.push_back(cells(r));
    }
    return out;
}

}  // namespace

std::string render_markdown(const ResultSet& rs) {
    std::ostringstream os;
    os << "# " << rs.ticker << " price, activity and sentiment\n";
    for (const SignalGroup g : {SignalGroup::Activity, SignalGroup::Sentiment}) {
        const std::string suffix = g == SignalGroup::Sentiment ? kSentimentSuffix : "";
        os << "\n## " << kCorrelationTitle << rs.ticker << suffix << "\n\n";
        md_table(os, correlation_header(g), table_rows(rs.correlations, g, correlation_cells));
        os << "\n## " << kCausalityTitle << rs.ticker << suffix << "\n\n";
        md_table(os, kCausalityHeader, table_rows(rs.causality, g, causality_cells));
    }
    for (const SignalGroup g : {SignalGroup::Activity, SignalGroup::Sentiment}) {
        os << "\n## Granger lag scan for " << rs.ticker << (g == SignalGroup::Sentiment ? kSentimentSuffix : "")
           << "\n\n";
        md_table(os, kLagScanHeader, table_rows(rs.lag_scan, g, lag_scan_cells));
    }
    os << "\n## Provenance\n\n";
    std::vector<std::vector<std::string>> prov;
    prov.push_back({"config_hash", rs.provenance.config_hash});
    for (const auto& [k, v] : rs.provenance.settings) prov.push_back({k, v});
    for (const auto& [k, v] : rs.provenance.input_digests) prov.push_back({"sha256:" + k, v});
    md_table(os, {"Item", "Value"}, prov);
    return os.str();
}

namespace {

void csv_row(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) os << ',';
        os << csv_escape(cells[i]);
    }
    os << '\n';
}

void csv_section(std::ostringstream& os, std::string_view name, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    os << '[' << name << "]\n";
    csv_row(os, header);
    for (const auto& r : rows) csv_row(os, r);
    os << '\n';
}

}  // namespace

std::string render_csv(const ResultSet& rs) {
    std::ostringstream os;
    std::vector<std::vector<std::string>> prov;
    prov.push_back({"ticker", rs.ticker});
    prov.push_back({"config_hash", rs.provenance.config_hash});
    for (const auto& [k, v] : rs.provenance.settings) prov.push_back({"setting:" + k, v});
    for (const auto& [k, v] : rs.provenance.input_digests) prov.push_back({"sha256:" + k, v});
    csv_section(os, "provenance", {"key", "value"}, prov);
    for (const SignalGroup g : {SignalGroup::Activity, SignalGroup::Sentiment}) {
        const std::string key = group_key(g);
        csv_section(os, "correlation:" + key, correlation_header(g), table_rows(rs.correlations, g, correlation_cells));
        csv_section(os, "causality:" + key, kCausalityHeader, table_rows(rs.causality, g, causality_cells));
        csv_section(os, "lag-scan:" + key, kLagScanHeader, table_rows(rs.lag_scan, g, lag_scan_cells));
    }
    return os.str();
}

ResultSet parse_csv(std::string_view text) {
    ResultSet rs;
    std::string section;
    bool expect_header = false;
    std::vector<std::string> header;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& what) {
        throw InputError("report csv line " + std::to_string(line_no) + ": " + what);
    };
    auto group_of = [&](std::string_view suffix) {
        if (suffix == "activity") return SignalGroup::Activity;
        if (suffix == "sentiment") return SignalGroup::Sentiment;
        fail("unknown section group '" + std::string(suffix) + "'");
        return SignalGroup::Activity;
    };
    auto to_size = [&](const std::string& s) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
        return v;
    };

    for (const auto raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = std::string(line.substr(1, line.size() - 2));
            expect_header = true;
            continue;
        }
        std::vector<std::string> cells;
        try {
            cells = split_csv_line(line);
        } catch (const InputError& e) {
            fail(e.what());
        }
        if (expect_header) {
            const auto colon = section.find(':');
            const std::string kind = section.substr(0, colon);
            std::vector<std::string> expected;
            if (section == "provenance") {
                expected = {"key", "value"};
            } else if (kind == "correlation") {
                expected = correlation_header(group_of(section.substr(colon + 1)));
            } else if (kind == "causality") {
                expected = kCausalityHeader;
            } else if (kind == "lag-scan") {
                expected = kLagScanHeader;
            } else {
                fail("unknown section '" + section + "'");
            }
            if (cells != expected) fail("unexpected header for section [" + section + "]");
            header = cells;
            expect_header = false;
            continue;
        }
        if (section.empty()) fail("data outside a section");
        if (cells.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");

        const auto colon = section.find(':');
        const std::string kind = section.substr(0, colon);
        if (section == "provenance") {
            const std::string& k = cells[0];
            if (k == "ticker") {
                rs.ticker = cells[1];
            } else if (k == "config_hash") {
                rs.provenance.config_hash = cells[1];
            } else if (k.starts_with("setting:")) {
                rs.provenance.settings.emplace_back(k.substr(8), cells[1]);
            } else if (k.starts_with("sha256:")) {
                rs.provenance.input_digests.emplace_back(k.substr(7), cells[1]);
            } else {
                fail("unknown provenance key '" + k + "'");
            }
        } else if (kind == "correlation") {
            CorrelationRow r;
            r.group = group_of(section.substr(colon + 1));
            if (cells[0] == method_name(CorrelationMethod::Pearson)) {
                r.method = CorrelationMethod::Pearson;
            } else if (cells[0] == method_name(CorrelationMethod::Kendall)) {
                r.method = CorrelationMethod::Kendall;
            } else {
                fail("unknown correlation type '" + cells[0] + "'");
            }
            r.variant.shifted = parse_bool(cells[1]);
            r.signal = cells[2];
            if (cells[3] == kDegenerateCell || cells[3] == kInsufficientCell) {
                r.note = cells[3];
            } else {
                r.value = parse_double(cells[3]);
            }
            r.variant.stationary = parse_bool(cells[4]);
            rs.correlations.push_back(std::move(r));
        } else if (kind == "causality") {
            CausalityRow r;
            r.group = group_of(section.substr(colon + 1));
            r.cause = cells[0];
            r.effect = cells[1];
            r.variant.stationary = parse_bool(cells[3]);
            r.variant.shifted = parse_bool(cells[4]);
            if (cells[2] == kDegenerateCell || cells[2] == kInsufficientCell) {
                r.note = cells[2];
            } else {
                GrangerResult g;
                g.cause = r.cause;
                g.effect = r.effect;
                g.p_value = parse_double(cells[2]);
                g.lag = static_cast<int>(to_size(cells[5]));
                g.f_stat = parse_double(cells[6]);
                r.result = std::move(g);
            }
            rs.causality.push_back(std::move(r));
        } else if (kind == "lag-scan") {
            CausalityRow r;
            r.group = group_of(section.substr(colon + 1));
            r.cause = cells[0];
            r.effect = cells[1];
            r.variant.stationary = parse_bool(cells[2]);
            r.variant.shifted = parse_bool(cells[3]);
            GrangerResult g;
            g.cause = r.cause;
            g.effect = r.effect;
            g.lag = static_cast<int>(to_size(cells[4]));
            g.f_stat = parse_double(cells[5]);
            g.p_value = parse_double(cells[6]);
            g.rss_restricted = parse_double(cells[7]);
            g.rss_unrestricted = parse_double(cells[8]);
            g.n_effective = to_size(cells[9]);
            r.result = std::move(g);
            rs.lag_scan.push_back(std::move(r));
        } else {
            fail("unknown section '" + section + "'");
        }
    }
    return rs;
}

// ---------------------------------------------------------------------------
// Charts
// ---------------------------------------------------------------------------

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf) == "-0.00" ? "0.00" : buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string render_chart(const std::vector<ChartSeries>& series, std::string_view title) {
    if (series.empty()) throw Error("render_chart: no series");
    for (const auto& s : series) {
        if (s.series.empty()) throw Error("render_chart: series '" + s.name + "' is empty");
    }

    constexpr double width = 960, height = 420;
    constexpr double left = 60, right = 760, top = 44, bottom = 360;

    Date first = series.front().series.dates().front();
    Date last = series.front().series.dates().back();
    for (const auto& s : series) {
        first = std::min(first, s.series.dates().front());
        last = std::max(last, s.series.dates().back());
    }
    const auto span_days = (last - first).count();
    auto x_of = [&](Date d) {
        if (span_days == 0) return (left + right) / 2;
        return left + (right - left) * static_cast<double>((d - first).count()) / static_cast<double>(span_days);
    };
    auto y_of = [&](double unit) { return bottom - (bottom - top) * unit; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"420\" viewBox=\"0 0 " << width << ' '
       << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"960\" height=\"420\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n";

    for (int i = 0; i <= 4; ++i) {
        const double unit = i / 4.0;
        const std::string y = fixed2(y_of(unit));
        os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
           << fixed2(unit) << "</text>\n";
    }
    os << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom
       << "\" stroke=\"#000000\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
       << "\" stroke=\"#000000\"/>\n";
    os << "<text x=\"16\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (top + bottom) / 2 << ")\">normalized value</text>\n";

    const auto step = std::max<long>(1, static_cast<long>(std::ceil(static_cast<double>(span_days) / 7.0)));
    for (long offset = 0; offset <= span_days; offset += step) {
        const Date d = first + std::chrono::days{offset};
        const std::string x = fixed2(x_of(d));
        os << "<line x1=\"" << x << "\" y1=\"" << bottom << "\" x2=\"" << x << "\" y2=\"" << bottom + 5
           << "\" stroke=\"#000000\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << bottom + 20 << "\" text-anchor=\"middle\">" << format_iso_date(d)
           << "</text>\n";
    }
    os << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 44 << "\" text-anchor=\"middle\">date</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        const auto values = s.series.values();
        const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
        const double lo = *lo_it;
        const double range = *hi_it - lo;
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double unit = range > 0 ? (values[k] - lo) / range : 0.5;
            if (k > 0) os << ' ';
            os << fixed2(x_of(s.series.dates()[k])) << ',' << fixed2(y_of(unit));
        }
        os << "\"/>\n";

        const double ly = top + 10 + 22.0 * static_cast<double>(i);
        os << "<line x1=\"" << right + 20 << "\" y1=\"" << ly << "\" x2=\"" << right + 44 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
        os << "<text x=\"" << right + 50 << "\" y=\"" << ly << "\" dominant-baseline=\"middle\">" << xml_escape(s.name)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

OutputFiles write_outputs(const ExperimentConfig& config, const ExperimentInputs& inputs, const ResultSet& rs) {
    const std::filesystem::path dir(config.output_dir);
    OutputFiles files;
    files.report_md = (dir / "report.md").string();
    files.report_csv = (dir / "report.csv").string();
    files.provenance_json = (dir / "provenance.json").string();
    write_text_file(files.report_md, render_markdown(rs));
    write_text_file(files.report_csv, render_csv(rs));

    for (const SignalGroup g : {SignalGroup::Activity, SignalGroup::Sentiment}) {
        std::vector<ChartSeries> chart{{kPriceName, inputs.price}};
        for (const auto& s : inputs.signals) {
            if (s.group == g) chart.push_back({s.name, s.series});
        }
        if (chart.size() == 1) continue;
        const std::string name = group_key(g);
        const auto path = (dir / "charts" / (name + ".svg")).string();
        write_text_file(path, render_chart(chart, rs.ticker + ": stock price and " + name + " (min-max normalized)"));
        files.charts.push_back(path);
    }

    nlohmann::ordered_json prov;
    prov["ticker"] = rs.ticker;
    prov["config_hash"] = rs.provenance.config_hash;
    nlohmann::ordered_json settings = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rs.provenance.settings) settings[k] = v;
    prov["settings"] = settings;

    auto path_of = [&](const std::string& role) -> std::string {
        if (role == "posts") return config.posts.value_or("");
        if (role == "prices") return config.prices.value_or("");
        if (role == "trends") return config.trends.value_or("");
        if (role == "lexicon") return config.lexicon.value_or("");
        if (role == "emoji-table") return config.emoji_table.value_or("");
        for (const auto& l : config.labels) {
            if (role == "labels:" + l.name) return l.path;
        }
        return {};
    };
    nlohmann::ordered_json in = nlohmann::ordered_json::array();
    for (const auto& [role, digest] : rs.provenance.input_digests) {
        in.push_back({{"role", role}, {"path", path_of(role)}, {"sha256", digest}});
    }
    prov["inputs"] = in;
    prov["posts_in_window"] = inputs.post_count;
    prov["posts_outside_window"] = inputs.posts_outside_window;
    prov["malformed_posts"] = inputs.malformed_posts;
    nlohmann::ordered_json unlabeled = nlohmann::ordered_json::object();
    for (const auto& [name, n] : inputs.unlabeled_posts) unlabeled[name] = n;
    prov["unlabeled_posts"] = unlabeled;
    write_text_file(files.provenance_json, prov.dump(2) + "\n");
    return files;
}

}  // namespace memestat
