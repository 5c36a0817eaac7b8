#include "toklab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/erf.hpp>

#include "toklab/error.hpp"

namespace toklab::stats {

PairedSample::PairedSample(std::span<const double> x, std::span<const double> y) : x_(x), y_(y) {
  if (x.size() != y.size()) throw DataError("paired sample has unequal lengths");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw DataError("paired sample contains non-finite values");
  }
}

double pearson(const PairedSample& sample) {
  const auto x = sample.x();
  const auto y = sample.y();
  if (x.size() < 2) throw DataError("correlation needs at least two observations");
  // Single-pass co-moment update (Welford) on data shifted by the first pair,
  // so a large common offset does not erode the deviations.
  const double x0 = x[0], y0 = y[0];
  double mean_x = 0.0, mean_y = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double count = static_cast<double>(i + 1);
    const double xi = x[i] - x0;
    const double yi = y[i] - y0;
    const double dx = xi - mean_x;
    const double dy = yi - mean_y;
    mean_x += dx / count;
    mean_y += dy / count;
    sxx += dx * (xi - mean_x);
    syy += dy * (yi - mean_y);
    sxy += dx * (yi - mean_y);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DataError("undefined correlation: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  return pearson(PairedSample(x, y));
}

std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

double spearman(const PairedSample& sample) {
  const auto rx = midranks(sample.x());
  const auto ry = midranks(sample.y());
  return pearson(rx, ry);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  return spearman(PairedSample(x, y));
}

std::string_view test_name(SignificanceTest test) {
  return test == SignificanceTest::independent_fisher ? "independent-fisher"
                                                       : "dependent-overlapping";
}

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

double two_tailed_p(double z) {
  return std::min(1.0, boost::math::erfc(std::abs(z) / std::sqrt(2.0)));
}

namespace {

void check_correlation(double r, const char* name) {
  if (!std::isfinite(r) || std::abs(r) >= kMaxAbsCorrelation) {
    throw DataError(std::string("correlation ") + name +
                    " is too close to +/-1 for the Fisher z-transformation");
  }
}

// Asymptotic covariance of atanh(r1) and atanh(r2) for correlations sharing a variable.
double overlap_covariance(double r1, double r2, double r12) {
  const double psi =
      r12 * (1.0 - r1 * r1 - r2 * r2) - 0.5 * r1 * r2 * (1.0 - r1 * r1 - r2 * r2 - r12 * r12);
  return psi / ((1.0 - r1 * r1) * (1.0 - r2 * r2));
}

}  // namespace

SignificanceResult compare_dependent_correlations(double r1, double r2, double r12,
                                                  std::size_t n_obs) {
  if (n_obs < kMinSignificanceN) {
    throw UsageError("dependent correlation test needs at least 4 observations");
  }
  check_correlation(r1, "r1");
  check_correlation(r2, "r2");

  SignificanceResult res;
  res.test = SignificanceTest::dependent_overlapping;
  res.r1 = r1;
  res.r2 = r2;
  res.r12 = r12;
  res.n1 = res.n2 = n_obs;
  if (r1 == r2) {
    res.statistic = 0.0;
    res.p_value = 1.0;
    return res;
  }
  check_correlation(r12, "r12");
  const double z1 = std::atanh(r1);
  const double z2 = std::atanh(r2);
  const double rbar = std::tanh((z1 + z2) / 2.0);
  double denom = 2.0 - 2.0 * overlap_covariance(rbar, rbar, r12);
  if (!(denom > 0.0)) {
    // Pooled null covariance is not positive definite; use the observed pair.
    const double det = 1.0 - r1 * r1 - r2 * r2 - r12 * r12 + 2.0 * r1 * r2 * r12;
    if (det < 0.0) {
      throw DataError("inconsistent correlation triple (r1=" + std::to_string(r1) + ", r2=" +
                      std::to_string(r2) + ", r12=" + std::to_string(r12) + ")");
    }
    denom = 2.0 - 2.0 * overlap_covariance(r1, r2, r12);
  }
  if (!(denom > 0.0)) throw DataError("degenerate correlation triple");
  res.statistic = (z1 - z2) * std::sqrt(static_cast<double>(n_obs) - 3.0) / std::sqrt(denom);
  res.p_value = two_tailed_p(res.statistic);
  return res;
}

SignificanceResult compare_independent_correlations(double r1, std::size_t n1, double r2,
                                                    std::size_t n2) {
  if (n1 < kMinSignificanceN || n2 < kMinSignificanceN) {
    throw UsageError("independent correlation test needs at least 4 observations per sample");
  }
  check_correlation(r1, "r1");
  check_correlation(r2, "r2");
  SignificanceResult res;
  res.test = SignificanceTest::independent_fisher;
  res.r1 = r1;
  res.r2 = r2;
  res.n1 = n1;
  res.n2 = n2;
  const double se =
      std::sqrt(1.0 / (static_cast<double>(n1) - 3.0) + 1.0 / (static_cast<double>(n2) - 3.0));
  res.statistic = (std::atanh(r1) - std::atanh(r2)) / se;
  res.p_value = r1 == r2 ? 1.0 : two_tailed_p(res.statistic);
  return res;
}

std::vector<double> minmax_scale(std::span<const double> v, Range* range) {
  if (v.empty()) throw DataError("cannot scale an empty vector");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) throw DataError("cannot min-max scale a constant vector");
  std::vector<double> out;
  out.reserve(v.size());
  for (const double x : v) {
    // Endpoints map exactly to 0 and 1.
    out.push_back(x == min ? 0.0 : x == max ? 1.0 : (x - min) / (max - min));
  }
  if (range) *range = {min, max};
  return out;
}

std::vector<double> minmax_unscale(std::span<const double> scaled, Range range) {
  std::vector<double> out;
  out.reserve(scaled.size());
  for (const double s : scaled) out.push_back(range.min + s * (range.max - range.min));
  return out;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("OLS needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
  }
  if (!(sxx > 0.0)) throw DataError("degenerate regression: feature is constant");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  return fit;
}

double mean_squared_error(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) throw DataError("MSE needs paired values");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  return sum / static_cast<double>(truth.size());
}

namespace {

double population_variance(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double sum = 0.0;
  for (const double x : v) sum += (x - mean) * (x - mean);
  return sum / n;
}

}  // namespace

double explained_variance(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw DataError("explained variance needs paired values");
  }
  std::vector<double> resid(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) resid[i] = truth[i] - pred[i];
  const double num = population_variance(resid);
  const double den = population_variance(truth);
  if (num == 0.0) return 1.0;
  if (den == 0.0) return 0.0;
  return 1.0 - num / den;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto below = [&rng](std::uint64_t bound) {
    // Largest multiple of bound representable; reject draws above it.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    return draw % bound;
  };
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[below(i)]);
  return perm;
}

TrainTestSplit split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::ceil((1.0 - train_fraction) * static_cast<double>(n) - 1e-9));
  if (n_test < 1 || n_test + 2 > n) throw DataError("degenerate train/test split");
  const auto perm = seeded_permutation(n, seed);
  TrainTestSplit split;
  split.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  return split;
}

RegressionResult linreg_holdout(std::span<const double> x, std::span<const double> y,
                                double train_fraction, std::uint64_t seed) {
  PairedSample sample(x, y);
  if (sample.n_obs() < 10) throw DataError("regression needs at least 10 observations");
  const auto split = split_indices(sample.n_obs(), train_fraction, seed);
  const auto gather = [](std::span<const double> v, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(v[i]);
    return out;
  };
  const auto x_train = gather(x, split.train), y_train = gather(y, split.train);
  const auto x_test = gather(x, split.test), y_test = gather(y, split.test);

  const LinearFit fit = ols_fit(x_train, y_train);
  std::vector<double> pred;
  pred.reserve(x_test.size());
  for (const double v : x_test) pred.push_back(fit.slope * v + fit.intercept);

  RegressionResult res;
  res.slope = fit.slope;
  res.intercept = fit.intercept;
  res.mse = mean_squared_error(y_test, pred);
  res.explained_variance = explained_variance(y_test, pred);
  res.split_seed = seed;
  res.n_train = split.train.size();
  res.n_test = split.test.size();
  return res;
}

}  // namespace toklab::stats
