#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "backbone/types.hpp"

namespace backbone {

struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1) sample variance
  double stddev = 0.0;
  double std_error = 0.0;
};

inline SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) {
      double d = x - s.mean;
      ss += d * d;
    }
    s.variance = ss / static_cast<double>(xs.size() - 1);
    s.stddev = std::sqrt(s.variance);
    s.std_error = s.stddev / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

/// Standard error of the mean of an autocorrelated series via batch means:
/// split into `batches` contiguous batches and use the SE of batch averages.
inline double batch_means_se(std::span<const double> xs, std::size_t batches = 32) {
  if (xs.size() < 2 * batches || batches < 2) return sample_stats(xs).std_error;
  std::size_t len = xs.size() / batches;
  std::vector<double> means;
  means.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) sum += xs[i];
    means.push_back(sum / static_cast<double>(len));
  }
  return sample_stats(means).std_error;
}

/// log of the binomial coefficient, stable for large n.
inline double log_choose(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Binomial pmf P[Bin(n, p) = k].
inline double binom_pmf(int n, double p, int k) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace backbone
