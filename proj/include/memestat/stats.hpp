#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace memestat {

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

enum class CorrelationMethod { Pearson, Kendall };

/// Display name used in report tables ("Pearson", "Kendall/Tau").
std::string method_name(CorrelationMethod m);

struct CorrelationResult {
    CorrelationMethod method = CorrelationMethod::Pearson;
    bool shifted = false;
    bool stationary = false;
    double value = 0.0;
};

/// Pearson product-moment correlation, clamped to [-1, 1].
/// Throws DegenerateSeriesError if either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b. Uses Knight's O(n log n) merge-sort count with tie
/// corrections. Throws DegenerateSeriesError if either input is all tied.
double kendall_tau(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

/// Dense row-major matrix, just enough for regression designs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct OlsFit {
    std::vector<double> coefficients;
    double rss = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;
};

/// Relative tolerance on |R_jj| / max|R_ii| below which a design is rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Least squares by Householder QR. The caller supplies the intercept column.
/// Throws SingularMatrixError for rank-deficient designs and
/// InsufficientDataError unless rows > cols.
OlsFit ols_fit(const Matrix& design, std::span<const double> y);

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double reg_inc_beta(double x, double a, double b);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double f, double d1, double d2);

/// Upper tail 1 - f_cdf(f, d1, d2), evaluated without cancellation.
double f_sf(double f, double d1, double d2);

// ---------------------------------------------------------------------------
// Granger causality
// ---------------------------------------------------------------------------

struct GrangerResult {
    std::string cause;
    std::string effect;
    int lag = 0;
    double f_stat = 0.0;
    double p_value = 1.0;
    double rss_restricted = 0.0;
    double rss_unrestricted = 0.0;
    std::size_t n_effective = 0;
};

/// Largest lag with at least one residual degree of freedom for a series of length n.
int max_feasible_lag(std::size_t n);

/// Bivariate Granger F-test of "x helps predict y" at a fixed lag.
///
/// Restricted:   y_t = a0 + sum_i a_i y_{t-i}
/// Unrestricted: restricted + sum_j b_j x_{t-j}
///
/// A perfect unrestricted fit (RSS_u == 0) reports p = 0.
GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int lag,
                           std::string cause = "x", std::string effect = "y");

struct GrangerScan {
    std::vector<GrangerResult> per_lag;
    GrangerResult headline;
};

/// Unrestricted-model AIC: n_eff * ln(RSS_u / n_eff) + 2k with k = 2*lag + 1.
double granger_aic(const GrangerResult& r);

/// granger_test for every feasible lag in 1..maxlag; the headline is the
/// lag with the lowest unrestricted AIC (first wins on ties).
GrangerScan granger_scan(std::span<const double> x, std::span<const double> y, int maxlag,
                         std::string cause = "x", std::string effect = "y");

}  // namespace memestat
