#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memestat {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Returns nullopt on anything else, including invalid calendar dates.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date d);

/// UTC calendar day containing the given epoch second.
Date utc_day(std::int64_t epoch_seconds);

/// Date-indexed daily values. Dates are strictly increasing and every value is finite.
class DailySeries {
public:
    DailySeries() = default;
    /// Throws memestat::Error if the invariants do not hold.
    DailySeries(std::vector<Date> dates, std::vector<double> values);

    std::span<const Date> dates() const { return dates_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }

    std::optional<double> at(Date d) const;

    friend bool operator==(const DailySeries&, const DailySeries&) = default;

private:
    std::vector<Date> dates_;
    std::vector<double> values_;
};

/// Predictor `x` and target `y` over a shared, strictly increasing date index.
class AlignedPair {
public:
    AlignedPair() = default;
    AlignedPair(std::vector<Date> dates, std::vector<double> x, std::vector<double> y);

    std::span<const Date> dates() const { return dates_; }
    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }
    std::size_t size() const { return dates_.size(); }

    friend bool operator==(const AlignedPair&, const AlignedPair&) = default;

private:
    std::vector<Date> dates_;
    std::vector<double> x_;
    std::vector<double> y_;
};

enum class AlignPolicy { InnerJoin, ForwardFill };

/// Pairs `a` (as x) with `b` (as y).
///
/// InnerJoin keeps dates present in both. ForwardFill walks the dates of the
/// denser series (the one with more points; `a` on a tie) and carries the last
/// known value of the sparser one forward; dates before the sparser series
/// starts are dropped.
AlignedPair align(const DailySeries& a, const DailySeries& b, AlignPolicy policy = AlignPolicy::InnerJoin);

/// Row i pairs x[i] with y[i+k]; the date index is x's, truncated at the tail. Requires k >= 1.
AlignedPair shift_target(const AlignedPair& p, int k = 1);

/// Signed shift. k > 0 is shift_target(p, k); k < 0 pairs x[i+|k|] with y[i]
/// (target leads) and keeps the predictor's dates; k == 0 is the identity.
AlignedPair shift_pair(const AlignedPair& p, int k);

/// First difference; output[i] = values[i+1] - values[i], dated at dates[i+1].
DailySeries difference(const DailySeries& s);

struct Variant {
    bool shifted = false;
    bool stationary = false;

    friend bool operator==(const Variant&, const Variant&) = default;
};

/// The four legal variants in report order: plain, stationary, shifted, shifted+stationary.
inline constexpr Variant kAllVariants[] = {{false, false}, {false, true}, {true, false}, {true, true}};

std::string variant_name(Variant v);
/// Accepts plain, shifted, stationary, shifted-stationary (or stationary-shifted).
std::optional<Variant> parse_variant(std::string_view name);

enum class DifferenceSide { TargetOnly, Both };

/// Differencing (if stationary) followed by a shift by `shift_days` (if shifted).
AlignedPair apply_variant(const AlignedPair& p, Variant v, DifferenceSide side, int shift_days = 1);

}  // namespace memestat
