#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bellqmc {

inline constexpr std::size_t default_block_size = 5000;
inline constexpr std::size_t min_bins = 8;

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Non-overlapping block means of a Monte Carlo series.
struct BinnedSeries {
  std::size_t block_size = 1;
  std::vector<double> bins;
  double mean = 0.0;
  double error = 0.0;  // standard error from the bins only

  std::size_t n_bins() const { return bins.size(); }
  Estimate estimate() const { return {mean, error}; }
};

/// Drops the trailing partial block. Throws InsufficientData below min_bins.
BinnedSeries bin(std::span<const double> series, std::size_t block_size);
/// Wraps already-formed block means.
BinnedSeries from_bins(std::vector<double> bins, std::size_t block_size);

/// Streaming binner; also keeps raw first and second moments.
class BinAccumulator {
 public:
  explicit BinAccumulator(std::size_t block_size = default_block_size);

  void push(double x);
  /// Appends the complete bins and moments of another stream (same block size).
  void absorb(const BinAccumulator& other);
  BinnedSeries series() const { return from_bins(bins_, block_size_); }
  const std::vector<double>& bins() const { return bins_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t count() const { return count_; }
  double raw_mean() const;
  /// Population variance of the raw stream.
  double raw_variance() const;

 private:
  std::size_t block_size_;
  std::vector<double> bins_;
  double partial_ = 0.0;
  std::size_t in_block_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0, sum2_ = 0.0;
};

/// Sample variance (n - 1 normalization).
double variance(std::span<const double> xs);

/// -ln(mean of bins) with a delete-one jackknife error. The value is the
/// direct estimate. Throws EstimatorExhausted when the mean (or a
/// delete-one mean) is not positive.
Estimate jackknife_log(std::span<const double> bins);

/// Delete-one values of -ln(mean), for correlated combinations.
std::vector<double> jackknife_log_samples(std::span<const double> bins);

/// Jackknife error from delete-one samples.
double jackknife_error(std::span<const double> samples);

struct LinearFit {
  double slope = 0.0, intercept = 0.0;
  double slope_error = 0.0, intercept_error = 0.0;
  double chi2_per_dof = 0.0;
  double r_squared = 0.0;  // weighted
};

/// Weighted least squares y = slope x + intercept; needs >= 3 points and
/// positive errors.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys, std::span<const double> errs);

}  // namespace bellqmc
