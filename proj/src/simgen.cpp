#include "memestat/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "memestat/error.hpp"
#include "memestat/ingest.hpp"
#include "memestat/rng.hpp"

namespace memestat {

void validate(const VarSpec& spec) {
    if (spec.lag < 1) throw Error("VarSpec: lag must be >= 1");
    if (!(std::abs(spec.ar_x) < 1.0) || !(std::abs(spec.ar_y) < 1.0)) {
        throw Error("VarSpec: autoregression coefficients must lie in (-1, 1)");
    }
    if (!(spec.noise_std > 0.0) || !std::isfinite(spec.noise_std)) throw Error("VarSpec: noise_std must be > 0");
    if (!std::isfinite(spec.coupling)) throw Error("VarSpec: coupling must be finite");
    if (spec.n <= 10 * static_cast<std::size_t>(spec.lag)) throw Error("VarSpec: n must exceed 10 * lag");
}

SeriesPair gen_pair(const VarSpec& spec, Date start) {
    validate(spec);
    GaussianSource noise(spec.seed);
    const auto lag = static_cast<std::size_t>(spec.lag);
    std::vector<double> x(spec.n);
    std::vector<double> y(spec.n);
    std::vector<Date> dates(spec.n);
    for (std::size_t t = 0; t < spec.n; ++t) {
        const double eps = spec.noise_std * noise.next();
        const double eta = spec.noise_std * noise.next();
        x[t] = (t > 0 ? spec.ar_x * x[t - 1] : 0.0) + eps;
        y[t] = (t > 0 ? spec.ar_y * y[t - 1] : 0.0) + (t >= lag ? spec.coupling * x[t - lag] : 0.0) + eta;
        dates[t] = start + std::chrono::days{static_cast<int>(t)};
    }
    return {DailySeries(dates, std::move(x)), DailySeries(dates, std::move(y))};
}

namespace {

constexpr const char* kPositiveWords[] = {"moon",  "tendies", "gains", "bullish", "rocket", "hold",   "diamond",
                                    "great", "love",    "squeeze", "strong", "buy",   "winning"};
constexpr const char* kNegativeWords[] = {"crash", "dump",  "loss", "bagholder", "scam", "bearish", "worst",
                                    "sell",  "rekt",  "clown", "tanking",  "paper", "idiot"};
constexpr const char* kFillerWords[] = {"gme",    "stock", "today", "market", "price", "shares", "guys",   "what",
                                  "the",    "is",    "this",  "i",      "just",  "we",     "are",    "going",
                                  "to",     "hedge", "funds", "retail", "robinhood", "apes", "together", "amc"};
constexpr const char* kEmojiPool[] = {"🚀", "💎", "🙌", "🦍", "📈", "📉", "🤡", "🙄", "😂",          "🔥",
                                "💰", "🌙", "🤔", "👍🏽", "🇺🇸", "1️⃣", "❤️", "👨‍👩‍👧‍👦", "🏳️‍🌈", "😭"};

template <std::size_t N>
const char* pick(Xoshiro256StarStar& rng, const char* const (&pool)[N]) {
    return pool[rng.below(N)];
}

enum class Tone { Positive, Neutral, Negative };

std::string make_body(Xoshiro256StarStar& rng, Tone tone, std::size_t emoji_count) {
    std::string body;
    const std::size_t words = 3 + rng.below(8);
    for (std::size_t w = 0; w < words; ++w) {
        if (!body.empty()) body.push_back(' ');
        const auto roll = rng.below(10);
        if (roll < 4 && tone != Tone::Neutral) {
            if (rng.below(12) == 0) body += "not ";
            body += tone == Tone::Positive ? pick(rng, kPositiveWords) : pick(rng, kNegativeWords);
        } else {
            body += pick(rng, kFillerWords);
        }
    }
    if (rng.below(6) == 0) body += tone == Tone::Negative ? "..." : "!";
    for (std::size_t e = 0; e < emoji_count; ++e) {
        if (e == 0 || rng.below(3) == 0) body.push_back(' ');
        body += pick(rng, kEmojiPool);
    }
    if (rng.below(20) == 0) body += " \xE2\x9D\xA4";  // U+2764 without a variation selector
    return body;
}

std::string post_id(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%06zu", n);
    return buf;
}

}  // namespace

FixtureManifest gen_fixture(const std::filesystem::path& dir, std::uint64_t seed) {
    const Date first = Date{std::chrono::year{2021} / 1 / 4};
    const Date last = Date{std::chrono::year{2021} / 3 / 31};
    const auto days = static_cast<std::size_t>((last - first).count() + 1);

    GaussianSource gauss(derive_seed(seed, 0));
    Xoshiro256StarStar rng(derive_seed(seed, 1));

    std::vector<double> hype(days);
    for (std::size_t t = 0; t < days; ++t) hype[t] = (t > 0 ? 0.7 * hype[t - 1] : 0.0) + gauss.next();

    std::vector<Date> price_dates;
    std::vector<double> closes;
    std::vector<Date> trend_dates;
    std::vector<double> interest;
    double log_price = std::log(20.0);
    for (std::size_t t = 0; t < days; ++t) {
        const Date d = first + std::chrono::days{static_cast<int>(t)};
        if (t > 0) log_price += 0.04 * hype[t - 1] + 0.02 * gauss.next();
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
            price_dates.push_back(d);
            closes.push_back(std::round(std::exp(log_price) * 100.0) / 100.0);
        }
        const double level = std::round(50.0 + 12.0 * hype[t] + 4.0 * gauss.next());
        trend_dates.push_back(d);
        interest.push_back(std::clamp(level, 0.0, 100.0));
    }

    std::vector<Post> posts;
    std::vector<LabelRecord> labels;
    for (std::size_t t = 0; t < days; ++t) {
        const double h = hype[t];
        const auto volume = static_cast<std::size_t>(std::max(3.0, std::round(20.0 + 6.0 * h)));
        const double p_positive = 1.0 / (1.0 + std::exp(-h));
        const auto day_start = std::chrono::sys_seconds{first + std::chrono::days{static_cast<int>(t)}};
        for (std::size_t k = 0; k < volume; ++k) {
            const double u = rng.uniform();
            const Tone tone = u < 0.8 * p_positive ? Tone::Positive
                              : u < 0.8 * p_positive + 0.2 ? Tone::Neutral
                                                           : Tone::Negative;
            const std::size_t emojis = rng.below(2 + static_cast<std::uint64_t>(std::max(0.0, 2.0 * h + 2.0)));
            Post p;
            p.id = post_id(posts.size() + 1);
            p.timestamp = day_start.time_since_epoch().count() + static_cast<std::int64_t>(rng.below(86400));
            p.text = make_body(rng, tone, emojis);
            SentimentLabel label = tone == Tone::Positive   ? SentimentLabel::Positive
                                   : tone == Tone::Negative ? SentimentLabel::Negative
                                                            : SentimentLabel::Neutral;
            if (rng.below(100) < 15) label = static_cast<SentimentLabel>(rng.below(3));
            labels.push_back({p.id, label});
            posts.push_back(std::move(p));
        }
    }
    std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
        return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.id < b.id);
    });

    const DailySeries prices(std::move(price_dates), std::move(closes));
    const DailySeries trends(std::move(trend_dates), std::move(interest));

    std::filesystem::create_directories(dir);
    write_text_file((dir / FixtureLayout::posts).string(), format_posts(posts));
    write_text_file((dir / FixtureLayout::prices).string(), format_prices(prices));
    write_text_file((dir / FixtureLayout::trends).string(), format_trends(trends));
    write_text_file((dir / FixtureLayout::labels).string(), format_labels(labels));

    FixtureManifest manifest{seed, posts.size(), prices.size(), trends.size(), labels.size()};
    nlohmann::ordered_json m;
    m["seed"] = manifest.seed;
    m["post_count"] = manifest.post_count;
    m["price_days"] = manifest.price_days;
    m["trend_days"] = manifest.trend_days;
    m["label_count"] = manifest.label_count;
    write_text_file((dir / FixtureLayout::manifest).string(), m.dump(2) + "\n");
    return manifest;
}

}  // namespace memestat
