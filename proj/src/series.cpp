#include "memestat/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "memestat/error.hpp"

namespace memestat {

namespace {

void check_increasing(std::span<const Date> dates, const char* what) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw Error(std::string(what) + ": dates must be strictly increasing (at " + format_iso_date(dates[i]) +
                        ")");
        }
    }
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite value");
    }
}

template <typename T>
std::vector<T> slice(std::span<const T> s, std::size_t from, std::size_t count) {
    return {s.begin() + static_cast<std::ptrdiff_t>(from), s.begin() + static_cast<std::ptrdiff_t>(from + count)};
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        return ec == std::errc{} && ptr == first + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_iso_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

Date utc_day(std::int64_t epoch_seconds) {
    return std::chrono::floor<std::chrono::days>(std::chrono::sys_seconds{std::chrono::seconds{epoch_seconds}});
}

DailySeries::DailySeries(std::vector<Date> dates, std::vector<double> values)
    : dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size()) throw Error("DailySeries: dates and values differ in length");
    check_increasing(dates_, "DailySeries");
    check_finite(values_, "DailySeries");
}

std::optional<double> DailySeries::at(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return values_[static_cast<std::size_t>(it - dates_.begin())];
}

AlignedPair::AlignedPair(std::vector<Date> dates, std::vector<double> x, std::vector<double> y)
    : dates_(std::move(dates)), x_(std::move(x)), y_(std::move(y)) {
    if (dates_.size() != x_.size() || dates_.size() != y_.size()) {
        throw Error("AlignedPair: dates, x and y differ in length");
    }
    check_increasing(dates_, "AlignedPair");
}

AlignedPair align(const DailySeries& a, const DailySeries& b, AlignPolicy policy) {
    if (a.empty() || b.empty()) throw InsufficientDataError("cannot align an empty series");

    std::vector<Date> dates;
    std::vector<double> xs;
    std::vector<double> ys;

    if (policy == AlignPolicy::InnerJoin) {
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < a.size() && j < b.size()) {
            if (a.dates()[i] < b.dates()[j]) {
                ++i;
            } else if (b.dates()[j] < a.dates()[i]) {
                ++j;
            } else {
                dates.push_back(a.dates()[i]);
                xs.push_back(a.values()[i]);
                ys.push_back(b.values()[j]);
                ++i;
                ++j;
            }
        }
        if (dates.empty()) throw InsufficientDataError("no overlapping dates");
        return {std::move(dates), std::move(xs), std::move(ys)};
    }

    const bool a_is_dense = a.size() >= b.size();
    const DailySeries& dense = a_is_dense ? a : b;
    const DailySeries& sparse = a_is_dense ? b : a;
    std::size_t j = 0;
    std::optional<double> last;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const Date d = dense.dates()[i];
        while (j < sparse.size() && sparse.dates()[j] <= d) {
            last = sparse.values()[j];
            ++j;
        }
        if (!last) continue;
        dates.push_back(d);
        xs.push_back(a_is_dense ? dense.values()[i] : *last);
        ys.push_back(a_is_dense ? *last : dense.values()[i]);
    }
    if (dates.empty()) throw InsufficientDataError("no overlapping dates");
    return {std::move(dates), std::move(xs), std::move(ys)};
}

AlignedPair shift_target(const AlignedPair& p, int k) {
    if (k < 1) throw Error("shift_target requires k >= 1");
    return shift_pair(p, k);
}

AlignedPair shift_pair(const AlignedPair& p, int k) {
    if (k == 0) return p;
    const auto lag = static_cast<std::size_t>(k > 0 ? k : -k);
    if (p.size() < lag + 1) throw InsufficientDataError("series too short to shift");
    const std::size_t n = p.size() - lag;
    if (k > 0) {
        return {slice(p.dates(), 0, n), slice(p.x(), 0, n), slice(p.y(), lag, n)};
    }
    return {slice(p.dates(), lag, n), slice(p.x(), lag, n), slice(p.y(), 0, n)};
}

namespace {

std::vector<double> diff_values(std::span<const double> v) {
    std::vector<double> out(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = v[i + 1] - v[i];
    return out;
}

}  // namespace

DailySeries difference(const DailySeries& s) {
    if (s.size() < 2) throw InsufficientDataError("series too short to difference");
    return {slice(s.dates(), 1, s.size() - 1), diff_values(s.values())};
}

std::string variant_name(Variant v) {
    if (v.shifted && v.stationary) return "shifted-stationary";
    if (v.shifted) return "shifted";
    if (v.stationary) return "stationary";
    return "plain";
}

std::optional<Variant> parse_variant(std::string_view name) {
    if (name == "plain") return Variant{false, false};
    if (name == "shifted") return Variant{true, false};
    if (name == "stationary") return Variant{false, true};
    if (name == "shifted-stationary" || name == "stationary-shifted") return Variant{true, true};
    return std::nullopt;
}

AlignedPair apply_variant(const AlignedPair& p, Variant v, DifferenceSide side, int shift_days) {
    AlignedPair out = p;
    if (v.stationary) {
        if (p.size() < 2) throw InsufficientDataError("series too short to difference");
        const std::size_t n = p.size() - 1;
        std::vector<double> xs = side == DifferenceSide::Both ? diff_values(p.x()) : slice(p.x(), 1, n);
        out = AlignedPair(slice(p.dates(), 1, n), std::move(xs), diff_values(p.y()));
    }
    if (v.shifted) out = shift_pair(out, shift_days);
    return out;
}

}  // namespace memestat
