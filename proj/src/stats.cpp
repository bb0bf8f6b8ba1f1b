#include "memestat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "memestat/error.hpp"

namespace memestat {

namespace {

void require_paired(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("inputs differ in length");
    if (x.size() < 2) throw InsufficientDataError("need at least two observations");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("non-finite observation");
    }
}

bool all_equal(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Number of pairs (i < j) tied within each run of equal values of a sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq&& same_as_previous) {
    std::int64_t pairs = 0;
    std::int64_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (same_as_previous(i)) {
            ++run;
        } else {
            pairs += run * (run - 1) / 2;
            run = 1;
        }
    }
    return pairs + run * (run - 1) / 2;
}

// Sorts `v` ascending and returns the number of strict inversions.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

}  // namespace

std::string method_name(CorrelationMethod m) {
    return m == CorrelationMethod::Pearson ? "Pearson" : "Kendall/Tau";
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require_paired(x, y);
    if (all_equal(x) || all_equal(y)) throw DegenerateSeriesError();

    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw DegenerateSeriesError();
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    require_paired(x, y);
    if (all_equal(x) || all_equal(y)) throw DegenerateSeriesError();

    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    const std::int64_t x_ties = tied_pairs(n, [&](std::size_t i) { return x[order[i]] == x[order[i - 1]]; });
    const std::int64_t joint_ties = tied_pairs(n, [&](std::size_t i) {
        return x[order[i]] == x[order[i - 1]] && y[order[i]] == y[order[i - 1]];
    });

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    std::vector<double> scratch(n);
    const std::int64_t discordant = merge_count(ys, scratch, 0, n);
    const std::int64_t y_ties = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

    const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t numerator = total - x_ties - y_ties + joint_ties - 2 * discordant;
    const double denom = std::sqrt(static_cast<double>(total - x_ties) * static_cast<double>(total - y_ties));
    return std::clamp(static_cast<double>(numerator) / denom, -1.0, 1.0);
}

OlsFit ols_fit(const Matrix& design, std::span<const double> y) {
    const std::size_t n = design.rows();
    const std::size_t k = design.cols();
    if (y.size() != n) throw Error("ols_fit: response length does not match design rows");
    if (k == 0 || n <= k) throw InsufficientDataError("ols_fit: need more observations than regressors");

    Matrix a = design;
    std::vector<double> qtb(y.begin(), y.end());
    std::vector<double> diag(k);
    std::vector<double> v(n);

    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm = std::hypot(norm, a(i, j));
        if (norm == 0.0) {
            diag[j] = 0.0;
            continue;
        }
        const double alpha = a(j, j) > 0.0 ? -norm : norm;
        double vtv = 0.0;
        for (std::size_t i = j; i < n; ++i) {
            v[i] = a(i, j) - (i == j ? alpha : 0.0);
            vtv += v[i] * v[i];
        }
        diag[j] = alpha;
        if (vtv == 0.0) continue;
        for (std::size_t c = j + 1; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i] * a(i, c);
            const double s = 2.0 * dot / vtv;
            for (std::size_t i = j; i < n; ++i) a(i, c) -= s * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = j; i < n; ++i) dot += v[i] * qtb[i];
        const double s = 2.0 * dot / vtv;
        for (std::size_t i = j; i < n; ++i) qtb[i] -= s * v[i];
    }

    double largest = 0.0;
    for (double d : diag) largest = std::max(largest, std::abs(d));
    for (double d : diag) {
        if (largest == 0.0 || std::abs(d) < kRankTolerance * largest) throw SingularMatrixError();
    }

    OlsFit fit;
    fit.n = n;
    fit.k = k;
    fit.coefficients.assign(k, 0.0);
    for (std::size_t jj = k; jj-- > 0;) {
        double acc = qtb[jj];
        for (std::size_t c = jj + 1; c < k; ++c) acc -= a(jj, c) * fit.coefficients[c];
        fit.coefficients[jj] = acc / diag[jj];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double fitted = 0.0;
        for (std::size_t c = 0; c < k; ++c) fitted += design(i, c) * fit.coefficients[c];
        const double r = y[i] - fitted;
        fit.rss += r * r;
    }
    return fit;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIterations = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) return h;
    }
    throw Error("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta requires x in [0, 1]");
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("reg_inc_beta requires a > 0 and b > 0");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    double result;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        result = front * beta_continued_fraction(x, a, b) / a;
    } else {
        result = 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
    }
    return std::clamp(result, 0.0, 1.0);
}

namespace {

void check_f_args(double f, double d1, double d2) {
    if (std::isnan(f) || f < 0.0) throw DomainError("F statistic must be >= 0");
    if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("F degrees of freedom must be positive");
}

}  // namespace

double f_cdf(double f, double d1, double d2) {
    check_f_args(f, d1, d2);
    if (f == 0.0) return 0.0;
    if (std::isinf(f)) return 1.0;
    const double df = d1 * f;
    return reg_inc_beta(df / (df + d2), d1 / 2.0, d2 / 2.0);
}

double f_sf(double f, double d1, double d2) {
    check_f_args(f, d1, d2);
    if (f == 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return reg_inc_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

int max_feasible_lag(std::size_t n) {
    return n < 2 ? 0 : static_cast<int>((n - 2) / 3);
}

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag, std::string cause,
                           std::string effect) {
    if (x.size() != y.size()) throw Error("granger_test: inputs differ in length");
    if (lag < 1) throw Error("granger_test: lag must be positive");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("non-finite observation");
    }
    const auto lags = static_cast<std::size_t>(lag);
    const std::size_t n = x.size();
    if (n <= lags || n - lags <= 2 * lags + 1) throw InsufficientDataError("too few observations for lag");

    const std::size_t rows = n - lags;
    Matrix restricted(rows, lags + 1);
    Matrix unrestricted(rows, 2 * lags + 1);
    std::vector<double> response(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lags;
        response[r] = y[t];
        restricted(r, 0) = 1.0;
        unrestricted(r, 0) = 1.0;
        for (std::size_t i = 1; i <= lags; ++i) {
            restricted(r, i) = y[t - i];
            unrestricted(r, i) = y[t - i];
            unrestricted(r, lags + i) = x[t - i];
        }
    }

    const OlsFit fit_r = ols_fit(restricted, response);
    const OlsFit fit_u = ols_fit(unrestricted, response);

    GrangerResult out;
    out.cause = std::move(cause);
    out.effect = std::move(effect);
    out.lag = lag;
    out.rss_restricted = fit_r.rss;
    out.rss_unrestricted = fit_u.rss;
    out.n_effective = rows;
    if (fit_u.rss > fit_r.rss + 1e-9 * fit_r.rss) {
        throw std::logic_error("granger_test: unrestricted RSS exceeds restricted RSS");
    }

    const double df_num = static_cast<double>(lags);
    const double df_den = static_cast<double>(rows - 2 * lags - 1);
    if (fit_u.rss == 0.0) {
        out.f_stat = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
    }
    const double gain = std::max(0.0, fit_r.rss - fit_u.rss);
    out.f_stat = (gain / df_num) / (fit_u.rss / df_den);
    out.p_value = f_sf(out.f_stat, df_num, df_den);
    return out;
}

double granger_aic(const GrangerResult& r) {
    const auto n_eff = static_cast<double>(r.n_effective);
    const double k = 2.0 * r.lag + 1.0;
    if (r.rss_unrestricted <= 0.0) return -std::numeric_limits<double>::infinity();
    return n_eff * std::log(r.rss_unrestricted / n_eff) + 2.0 * k;
}

GrangerScan granger_scan(std::span<const double> x, std::span<const double> y, int maxlag, std::string cause,
                         std::string effect) {
    if (maxlag < 1) throw Error("granger_scan: maxlag must be positive");
    const int top = std::min(maxlag, max_feasible_lag(x.size()));
    if (top < 1) throw InsufficientDataError("no feasible lag");

    GrangerScan scan;
    double best = std::numeric_limits<double>::infinity();
    for (int lag = 1; lag <= top; ++lag) {
        scan.per_lag.push_back(granger_test(x, y, lag, cause, effect));
        const double aic = granger_aic(scan.per_lag.back());
        if (scan.per_lag.size() == 1 || aic < best) {
            best = aic;
            scan.headline = scan.per_lag.back();
        }
    }
    return scan;
}

}  // namespace memestat
