#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cavreg {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

// standard normal pdf
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

// standard normal cdf
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// upper tail Q(z) = P(Z > z), accurate far into the tail
inline double normal_tail(double z) { return 0.5 * std::erfc(z / kSqrt2); }

// Fixed-order pairwise sum: reproducible across runs and independent of
// threading, and far more accurate than naive left-to-right accumulation.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

inline double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// sample standard deviation (n-1 denominator); 0 for fewer than 2 points
inline double sample_stddev(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(n - 1));
}

// linear-interpolation quantile (the common "type 7" rule); v must be sorted
inline double quantile_sorted(std::span<const double> v, double p) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return v[n - 1];
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace cavreg
