#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace toklab::stats {

/// Correlations at or beyond this magnitude are rejected by the Fisher-z tests.
inline constexpr double kMaxAbsCorrelation = 0.999999;

/// Minimum sample size for the Fisher-z based tests.
inline constexpr std::size_t kMinSignificanceN = 4;

/// Paired observations of a metric (x) and a human signal (y).
class PairedSample {
 public:
  /// Throws DataError on length mismatch or non-finite entries.
  PairedSample(std::span<const double> x, std::span<const double> y);

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::size_t n_obs() const { return x_.size(); }

 private:
  std::span<const double> x_;
  std::span<const double> y_;
};

/// Product-moment correlation. Throws DataError when either variance is zero.
double pearson(const PairedSample& sample);
double pearson(std::span<const double> x, std::span<const double> y);

/// Ranks with ties replaced by their mean rank (1-based).
std::vector<double> midranks(std::span<const double> v);

/// Pearson correlation of midranks.
double spearman(const PairedSample& sample);
double spearman(std::span<const double> x, std::span<const double> y);

enum class SignificanceTest { independent_fisher, dependent_overlapping };
std::string_view test_name(SignificanceTest test);

struct SignificanceResult {
  double statistic = 0.0;  // z
  double p_value = 1.0;    // two-tailed
  SignificanceTest test = SignificanceTest::dependent_overlapping;
  double r1 = 0.0;
  double r2 = 0.0;
  std::optional<double> r12;  // dependent test only
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Standard normal CDF.
double normal_cdf(double z);
/// Two-tailed p-value of a standard normal statistic.
double two_tailed_p(double z);

/// Steiger's z for two correlations r1 = corr(y, a) and r2 = corr(y, b) that
/// share y on the same n observations, with r12 = corr(a, b). Uses Fisher z
/// transforms and the back-transformed mean of the two z values.
SignificanceResult compare_dependent_correlations(double r1, double r2, double r12,
                                                  std::size_t n_obs);

/// z = (atanh r1 - atanh r2) / sqrt(1/(n1-3) + 1/(n2-3)).
SignificanceResult compare_independent_correlations(double r1, std::size_t n1, double r2,
                                                    std::size_t n2);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

/// (v - min) / (max - min). Throws DataError for a constant vector.
std::vector<double> minmax_scale(std::span<const double> v, Range* range = nullptr);
std::vector<double> minmax_unscale(std::span<const double> scaled, Range range);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Closed-form single-feature least squares. Throws DataError when x is constant.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

double mean_squared_error(std::span<const double> truth, std::span<const double> pred);
/// 1 - Var(truth - pred) / Var(truth), population variances.
double explained_variance(std::span<const double> truth, std::span<const double> pred);

/// Fisher-Yates permutation of 0..n-1 driven by mt19937_64. Bounded draws use
/// rejection sampling, so the result is identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Test part has ceil((1 - train_fraction) * n) items.
TrainTestSplit split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double mse = 0.0;                 // held-out split
  double explained_variance = 0.0;  // held-out split
  std::uint64_t split_seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

/// OLS on a seeded random train split, evaluated on the remainder.
RegressionResult linreg_holdout(std::span<const double> x, std::span<const double> y,
                                double train_fraction = 0.8, std::uint64_t seed = 0);

}  // namespace toklab::stats
