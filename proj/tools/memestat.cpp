#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memestat/annotate.hpp"
#include "memestat/error.hpp"
#include "memestat/ingest.hpp"
#include "memestat/report.hpp"
#include "memestat/sentiment.hpp"
#include "memestat/simgen.hpp"

namespace {

using namespace memestat;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

/// Experiment flags; each one that was given overrides the config file.
struct ExperimentFlags {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> given;

    void add(CLI::App* app) {
        app->add_option("--config", config_file, "Plain key = value settings file (flags win)");
        add_setting(app, "ticker", "Ticker label used in table titles");
        add_setting(app, "posts", "Posts JSONL");
        add_setting(app, "prices", "Price CSV (date,close)");
        add_setting(app, "trends", "Trends CSV (date,interest)");
        add_setting(app, "labels", "Label CSV as [name=]path; repeatable", true);
        add_setting(app, "lexicon", "Lexicon TSV replacing the bundled one");
        add_setting(app, "emoji-table", "Emoji range file replacing the bundled one");
        add_setting(app, "from", "Window start YYYY-MM-DD");
        add_setting(app, "to", "Window end YYYY-MM-DD");
        add_setting(app, "variants", "Comma list of plain,stationary,shifted,shifted-stationary or all");
        add_setting(app, "maxlag", "Largest Granger lag (default 5)");
        add_setting(app, "shift", "Days of lead for shifted variants (default 1)");
        add_setting(app, "align", "inner or ffill");
        add_setting(app, "agg", "Daily aggregation of per-post scores: mean or sum");
        add_setting(app, "correlation-side", "Differencing for correlation: target or both");
        add_setting(app, "granger-side", "Differencing for Granger: target or both");
        add_setting(app, "max-malformed", "Tolerated fraction of malformed post lines");
        add_setting(app, "out", "Output directory");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig config;
        if (!config_file.empty()) apply_config_file(config, config_file);
        bool labels_reset = false;
        for (const auto& [k, v] : given) {
            if (k == "labels" && !labels_reset) {
                config.labels.clear();
                labels_reset = true;
            }
            apply_setting(config, k, v);
        }
        return config;
    }

private:
    void add_setting(CLI::App* app, const std::string& key, const std::string& help, bool repeatable = false) {
        auto* opt = app->add_option_function<std::vector<std::string>>(
            "--" + key,
            [this, key](const std::vector<std::string>& values) {
                for (const auto& v : values) given.emplace_back(key, v);
            },
            help);
        if (repeatable) {
            opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        } else {
            opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    }
};

void print_series_csv(std::ostream& os, const DailySeries& s) {
    os << "date,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) os << format_iso_date(s.dates()[i]) << ',' << format_number(s.values()[i]) << '\n';
}

int cmd_ingest_check(const std::string& posts, const std::string& prices, const std::string& trends,
                     const std::vector<std::string>& labels, double max_malformed) {
    if (posts.empty() && prices.empty() && trends.empty() && labels.empty()) {
        std::cerr << "ingest-check: nothing to check\n";
        return kExitUsage;
    }
    if (!posts.empty()) {
        const auto r = read_posts(posts, ReadOptions{max_malformed});
        std::cout << "posts: " << r.posts.size() << " valid, " << r.malformed << " malformed";
        if (!r.posts.empty()) {
            std::cout << ", " << format_iso_date(utc_day(r.posts.front().timestamp)) << " .. "
                      << format_iso_date(utc_day(r.posts.back().timestamp));
        }
        std::cout << '\n';
        for (const auto line : r.malformed_lines) std::cout << "  malformed line " << line << '\n';
    }
    auto describe = [](const char* what, const DailySeries& s) {
        std::cout << what << ": " << s.size() << " days";
        if (!s.empty()) std::cout << ", " << format_iso_date(s.dates().front()) << " .. " << format_iso_date(s.dates().back());
        std::cout << '\n';
    };
    if (!prices.empty()) describe("prices", read_prices(prices));
    if (!trends.empty()) describe("trends", read_trends(trends));
    for (const auto& path : labels) std::cout << "labels " << path << ": " << read_labels(path).size() << " records\n";
    return kExitOk;
}

int cmd_sentiment(const std::string& posts_path, const std::string& scorer_name, const std::string& labels_path,
                  const std::string& agg, const std::string& out, const std::string& inventory_path) {
    const auto posts = read_posts(posts_path).posts;
    const Aggregation aggregation = agg == "sum" ? Aggregation::Sum : Aggregation::Mean;

    LabelMap labels;
    Scorer scorer = LexiconScorer{};
    if (scorer_name == "emoji") {
        scorer = EmojiCountScorer{};
    } else if (scorer_name == "labels") {
        if (labels_path.empty()) {
            std::cerr << "sentiment: --scorer labels needs --labels\n";
            return kExitUsage;
        }
        labels = to_label_map(read_labels(labels_path));
        scorer = LabelScorer{labels};
    }
    const DailySeries daily = daily_signal(posts, scorer, aggregation);
    if (out.empty()) {
        print_series_csv(std::cout, daily);
    } else {
        std::ostringstream os;
        print_series_csv(os, daily);
        write_text_file(out, os.str());
    }
    if (!inventory_path.empty()) {
        std::string csv = "emoji,occurrences,posts\n";
        for (const auto& row : emoji_inventory(posts)) {
            csv += csv_escape(row.emoji) + ',' + std::to_string(row.occurrences) + ',' + std::to_string(row.post_count) + '\n';
        }
        write_text_file(inventory_path, csv);
    }
    return kExitOk;
}

std::unique_ptr<ChatClient> make_client(const ClientConfig& config, const std::string& replay,
                                        const std::string& transcript, bool redact) {
    if (!replay.empty()) return std::make_unique<ReplayChatClient>(replay);
    std::shared_ptr<TranscriptLog> log;
    if (!transcript.empty()) log = std::make_shared<TranscriptLog>(transcript, redact);
    return std::make_unique<HttpChatClient>(config, log);
}

int cmd_annotate(const std::string& posts_path, const std::string& out, const std::string& rejects_path,
                 const ClientConfig& config, const std::string& replay, const std::string& transcript, bool redact) {
    config.validate();
    const auto posts = read_posts(posts_path).posts;
    auto client = make_client(config, replay, transcript, redact);
    const auto outcome = annotate_corpus(posts, *client, config);
    write_text_file(out, format_labels(outcome.labels));
    std::cerr << "annotate: " << outcome.labels.size() << " labeled, " << outcome.rejects.size() << " rejected, "
              << outcome.requests << " requests, " << outcome.transport_failures << " transport failures\n";
    if (!outcome.rejects.empty()) {
        if (!rejects_path.empty()) {
            std::string text;
            for (const auto& id : outcome.rejects) text += id + '\n';
            write_text_file(rejects_path, text);
        }
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_augment(const std::string& seeds_path, const std::string& out, std::size_t count, const ClientConfig& config,
                const std::string& replay, const std::string& transcript, bool redact) {
    config.validate();
    std::vector<std::string> seeds;
    std::istringstream in(read_text_file(seeds_path));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) seeds.push_back(line);
    }
    if (seeds.empty()) throw InputError("augment: no seed comments in " + seeds_path);
    auto client = make_client(config, replay, transcript, redact);
    const auto outcome = augment_corpus(seeds, *client, config, count);
    std::string text;
    std::size_t generated = 0;
    for (const auto& batch : outcome.batches) {
        for (const auto& g : batch.generated) {
            text += g + '\n';
            ++generated;
        }
    }
    write_text_file(out, text);
    std::cerr << "augment: " << generated << " comments generated, shortfall " << outcome.shortfall << '\n';
    return kExitOk;
}

int cmd_analyze(const ExperimentFlags& flags) {
    ExperimentConfig config;
    try {
        config = flags.resolve();
        config.validate();
    } catch (const Error& e) {
        std::cerr << "analyze: " << e.what() << '\n';
        return kExitUsage;
    }
    const ExperimentInputs inputs = load_inputs(config);
    const ResultSet rs = analyze(inputs, config);
    const OutputFiles files = write_outputs(config, inputs, rs);
    std::cerr << "analyze: " << inputs.signals.size() << " signals, " << rs.correlations.size()
              << " correlation rows, " << rs.causality.size() << " causality rows -> " << files.report_md << '\n';
    return kExitOk;
}

int cmd_simulate(const std::string& kind, const std::string& out, std::uint64_t seed, const VarSpec& base) {
    if (kind == "fixture") {
        const auto m = gen_fixture(out, seed);
        std::cerr << "simulate: " << m.post_count << " posts, " << m.price_days << " price days written to " << out << '\n';
        return kExitOk;
    }
    VarSpec spec = base;
    spec.seed = seed;
    const auto pair = gen_pair(spec);
    std::string csv = "date,x,y\n";
    for (std::size_t i = 0; i < pair.x.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", pair.x.values()[i], pair.y.values()[i]);
        csv += format_iso_date(pair.x.dates()[i]) + buf;
    }
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(out, csv);
    }
    return kExitOk;
}

int cmd_report(const std::string& csv_path, const std::string& out) {
    const ResultSet rs = parse_csv(read_text_file(csv_path));
    const std::string md = render_markdown(rs);
    if (out.empty()) {
        std::cout << md;
    } else {
        write_text_file(out, md);
    }
    return kExitOk;
}

void add_client_options(CLI::App* app, ClientConfig& config, std::string& replay, std::string& transcript,
                        bool& redact) {
    app->add_option("--base-url", config.base_url, "Chat-completion server")->capture_default_str();
    app->add_option("--endpoint", config.path, "Request path")->capture_default_str();
    app->add_option("--model", config.model, "Model name")->capture_default_str();
    app->add_option("--token-env", config.token_env, "Environment variable holding the bearer token")
        ->capture_default_str();
    app->add_option("--max-in-flight", config.max_in_flight, "Concurrent requests")->capture_default_str();
    app->add_option("--retries", config.retry_limit, "Extra requests per batch")->capture_default_str();
    app->add_option("--replay", replay, "Answer from a recorded transcript instead of the network");
    app->add_option("--transcript", transcript, "Append request/response pairs to this JSONL file");
    app->add_flag("--redact", redact, "Omit prompt and response text from the transcript");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social-media activity and sentiment versus stock price"};
    app.require_subcommand(1);

    std::string posts, prices, trends, labels_path, scorer = "lexicon", agg = "mean", out, inventory, rejects,
                                                       replay, transcript, seeds, csv, kind = "fixture";
    std::vector<std::string> labels;
    double max_malformed = 0.01;
    bool redact = false;
    std::size_t count = kDefaultAugmentationCount;
    std::uint64_t seed = 20210104;
    VarSpec spec;
    ClientConfig client;
    ExperimentFlags experiment;

    auto* check = app.add_subcommand("ingest-check", "Validate input files and summarize them");
    check->add_option("--posts", posts, "Posts JSONL");
    check->add_option("--prices", prices, "Price CSV");
    check->add_option("--trends", trends, "Trends CSV");
    check->add_option("--labels", labels, "Label CSV (repeatable)");
    check->add_option("--max-malformed", max_malformed, "Tolerated fraction of malformed post lines");

    auto* sent = app.add_subcommand("sentiment", "Daily sentiment signal as CSV");
    sent->add_option("--posts", posts, "Posts JSONL")->required();
    sent->add_option("--scorer", scorer, "lexicon, emoji or labels")
        ->check(CLI::IsMember({"lexicon", "emoji", "labels"}))
        ->capture_default_str();
    sent->add_option("--labels", labels_path, "Label CSV for --scorer labels");
    sent->add_option("--agg", agg, "mean or sum")->check(CLI::IsMember({"mean", "sum"}))->capture_default_str();
    sent->add_option("--out", out, "Output CSV (stdout if omitted)");
    sent->add_option("--inventory", inventory, "Also write the emoji inventory CSV here");

    auto* ann = app.add_subcommand("annotate", "Label posts through a chat-completion endpoint");
    ann->add_option("--posts", posts, "Posts JSONL")->required();
    ann->add_option("--out", out, "Label CSV to write")->required();
    ann->add_option("--rejects", rejects, "Write ids that stayed unlabeled here");
    add_client_options(ann, client, replay, transcript, redact);

    auto* aug = app.add_subcommand("augment", "Generate comments from seed comments");
    aug->add_option("--seeds", seeds, "Seed comments, one per line")->required();
    aug->add_option("--out", out, "Generated comments, one per line")->required();
    aug->add_option("--count", count, "Comments requested per batch")->capture_default_str();
    add_client_options(aug, client, replay, transcript, redact);

    auto* ana = app.add_subcommand("analyze", "Run the correlation and causality experiment");
    experiment.add(ana);

    auto* sim = app.add_subcommand("simulate", "Write synthetic data");
    sim->add_option("--kind", kind, "fixture (directory) or pair (CSV)")
        ->check(CLI::IsMember({"fixture", "pair"}))
        ->capture_default_str();
    sim->add_option("--out", out, "Output directory (fixture) or CSV file (pair)");
    sim->add_option("--seed", seed, "Random seed")->capture_default_str();
    sim->add_option("--n", spec.n, "Pair length")->capture_default_str();
    sim->add_option("--coupling", spec.coupling, "x -> y coupling")->capture_default_str();
    sim->add_option("--lag", spec.lag, "Coupling lag")->capture_default_str();
    sim->add_option("--ar-x", spec.ar_x, "x autoregression")->capture_default_str();
    sim->add_option("--ar-y", spec.ar_y, "y autoregression")->capture_default_str();
    sim->add_option("--noise", spec.noise_std, "Noise standard deviation")->capture_default_str();

    auto* rep = app.add_subcommand("report", "Render Markdown tables from a report CSV");
    rep->add_option("--csv", csv, "report.csv from analyze")->required();
    rep->add_option("--out", out, "Markdown file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_ingest_check(posts, prices, trends, labels, max_malformed);
        if (sent->parsed()) return cmd_sentiment(posts, scorer, labels_path, agg, out, inventory);
        if (ann->parsed()) return cmd_annotate(posts, out, rejects, client, replay, transcript, redact);
        if (aug->parsed()) return cmd_augment(seeds, out, count, client, replay, transcript, redact);
        if (ana->parsed()) return cmd_analyze(experiment);
        if (sim->parsed()) {
            if (kind == "fixture" && out.empty()) {
                std::cerr << "simulate: --out is required for --kind fixture\n";
                return kExitUsage;
            }
            return cmd_simulate(kind, out, seed, spec);
        }
        if (rep->parsed()) return cmd_report(csv, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitUsage;
}
