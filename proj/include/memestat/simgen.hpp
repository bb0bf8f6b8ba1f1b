#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memestat/series.hpp"

namespace memestat {

/// Bivariate AR(1) system with a planted lagged coupling from x to y:
///
///   x_t = ar_x * x_{t-1} + eps_t
///   y_t = ar_y * y_{t-1} + coupling * x_{t-lag} + eta_t
///
/// eps, eta ~ N(0, noise_std^2). Terms with negative time index are zero.
struct VarSpec {
    std::size_t n = 200;
    double coupling = 0.0;
    int lag = 1;
    double ar_x = 0.0;
    double ar_y = 0.0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
};

/// Throws memestat::Error when the spec violates |ar| < 1, noise_std > 0, lag >= 1 or n > 10 * lag.
void validate(const VarSpec& spec);

struct SeriesPair {
    DailySeries x;
    DailySeries y;
};

/// First date attached to generated series.
inline const Date kSimulationStart = Date{std::chrono::year{2021} / 1 / 4};

SeriesPair gen_pair(const VarSpec& spec, Date start = kSimulationStart);

/// Files written by gen_fixture, relative to the fixture directory.
struct FixtureLayout {
    static constexpr const char* posts = "posts.jsonl";
    static constexpr const char* prices = "prices.csv";
    static constexpr const char* trends = "trends.csv";
    static constexpr const char* labels = "labels.csv";
    static constexpr const char* manifest = "manifest.json";
};

struct FixtureManifest {
    std::uint64_t seed = 0;
    std::size_t post_count = 0;
    std::size_t price_days = 0;
    std::size_t trend_days = 0;
    std::size_t label_count = 0;
};

/// Writes a miniature dataset covering 2021-01-04 .. 2021-03-31:
///
/// - posts.jsonl: daily volume follows a latent "hype" AR(1) process; bodies
///   mix lexicon words with emoji, and emoji density rises with hype.
/// - prices.csv: weekday closes whose log-returns load on the previous day's hype.
/// - trends.csv: calendar-daily interest (0..100) tracking hype with noise.
/// - labels.csv: one label per post drawn from the post's latent tone.
/// - manifest.json: seed and record counts.
///
/// Output is a pure function of `seed`.
FixtureManifest gen_fixture(const std::filesystem::path& dir, std::uint64_t seed = 20210104);

}  // namespace memestat
