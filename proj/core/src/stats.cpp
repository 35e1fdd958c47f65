#include "bellqmc/stats.hpp"

#include <cmath>
#include <numeric>

#include "bellqmc/errors.hpp"

namespace bellqmc {

BinnedSeries from_bins(std::vector<double> bins, std::size_t block_size) {
  if (bins.size() < min_bins)
    throw InsufficientData("need at least " + std::to_string(min_bins) + " bins, have " +
                           std::to_string(bins.size()));
  BinnedSeries out;
  out.block_size = block_size;
  out.bins = std::move(bins);
  const double n = static_cast<double>(out.bins.size());
  out.mean = std::accumulate(out.bins.begin(), out.bins.end(), 0.0) / n;
  out.error = std::sqrt(variance(out.bins) / n);
  return out;
}

BinnedSeries bin(std::span<const double> series, std::size_t block_size) {
  if (block_size == 0) throw ConfigError("block size must be positive");
  const std::size_t n_bins = series.size() / block_size;
  if (n_bins < min_bins)
    throw InsufficientData("series of length " + std::to_string(series.size()) +
                           " too short for block size " + std::to_string(block_size));
  std::vector<double> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto first = series.begin() + b * block_size;
    bins[b] = std::accumulate(first, first + block_size, 0.0) / block_size;
  }
  return from_bins(std::move(bins), block_size);
}

BinAccumulator::BinAccumulator(std::size_t block_size) : block_size_(block_size) {
  if (block_size == 0) throw ConfigError("block size must be positive");
}

void BinAccumulator::push(double x) {
  partial_ += x;
  sum_ += x;
  sum2_ += x * x;
  ++count_;
  if (++in_block_ == block_size_) {
    bins_.push_back(partial_ / block_size_);
    partial_ = 0.0;
    in_block_ = 0;
  }
}

void BinAccumulator::absorb(const BinAccumulator& other) {
  if (other.block_size_ != block_size_) throw ConfigError("merging streams with different block sizes");
  bins_.insert(bins_.end(), other.bins_.begin(), other.bins_.end());
  count_ += other.count_;
  sum_ += other.sum_;
  sum2_ += other.sum2_;
}

double BinAccumulator::raw_mean() const {
  if (count_ == 0) throw InsufficientData("empty accumulator");
  return sum_ / count_;
}

double BinAccumulator::raw_variance() const {
  const double m = raw_mean();
  return std::max(0.0, sum2_ / count_ - m * m);
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientData("variance needs two values");
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / (xs.size() - 1);
}

std::vector<double> jackknife_log_samples(std::span<const double> bins) {
  if (bins.size() < 2) throw InsufficientData("jackknife needs two bins");
  const double total = std::accumulate(bins.begin(), bins.end(), 0.0);
  const double n = static_cast<double>(bins.size());
  if (total <= 0.0) throw EstimatorExhausted("non-positive mean", total / n);
  std::vector<double> out(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double m = (total - bins[k]) / (n - 1);
    if (m <= 0.0) throw EstimatorExhausted("non-positive delete-one mean", total / n);
    out[k] = -std::log(m);
  }
  return out;
}

double jackknife_error(std::span<const double> samples) {
  const double n = static_cast<double>(samples.size());
  const double m = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double acc = 0.0;
  for (double s : samples) acc += (s - m) * (s - m);
  return std::sqrt((n - 1) / n * acc);
}

Estimate jackknife_log(std::span<const double> bins) {
  const auto samples = jackknife_log_samples(bins);
  const double mean = std::accumulate(bins.begin(), bins.end(), 0.0) / bins.size();
  return {-std::log(mean), jackknife_error(samples)};
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys, std::span<const double> errs) {
  const std::size_t n = xs.size();
  if (ys.size() != n || errs.size() != n) throw ConfigError("fit inputs differ in length");
  if (n < 3) throw InsufficientData("fit needs at least 3 points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errs[i] > 0.0)) throw ConfigError("fit errors must be positive");
    const double w = 1.0 / (errs[i] * errs[i]);
    s += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const double det = s * sxx - sx * sx;
  if (std::abs(det) <= 1e-12 * s * sxx) throw Error("degenerate fit design");
  LinearFit fit;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_error = std::sqrt(s / det);
  fit.intercept_error = std::sqrt(sxx / det);
  double chi2 = 0, ss_tot = 0;
  const double ybar = sy / s;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (errs[i] * errs[i]);
    const double r = ys[i] - fit.slope * xs[i] - fit.intercept;
    chi2 += w * r * r;
    ss_tot += w * (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.chi2_per_dof = chi2 / (n - 2);
  fit.r_squared = ss_tot > 0 ? 1.0 - chi2 / ss_tot : 1.0;
  return fit;
}

}  // namespace bellqmc
