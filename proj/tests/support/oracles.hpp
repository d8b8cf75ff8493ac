#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Smallest r with cdf(r) >= p, by bisection on a nondecreasing CDF.
inline double invert_cdf(const std::function<double(double)>& cdf, double p,
                         double hi) {
  double lo = 0.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) >= p ? hi : lo) = mid;
  }
  return hi;
}

// Radial CDFs as written in closed form for the catalog families.
inline double haar_sum_cdf(double k, double r) {
  return r * r >= k ? 1.0 : (k - 1.0) * r * r / (k * k - r * r);
}
inline double compressed_unitary_cdf(double l, double r) {
  return r * r >= l ? 1.0 : (1.0 - l) / l * r * r / (1.0 - r * r);
}
inline double kac_derivative_cdf(double t, double r) {
  return r >= 1.0 - t ? 1.0 : t / (1.0 - t) * r / (1.0 - r);
}
inline double commutator_circulars_cdf(double r) {
  return r * r >= 2.0 ? 1.0 : (-1.0 + std::sqrt(1.0 + 4.0 * r * r)) / 2.0;
}

// Uniform points of (0,1), avoiding the endpoints.
inline std::vector<double> uniform_probs(int n) {
  std::vector<double> out;
  for (int i = 1; i < n; ++i) out.push_back(static_cast<double>(i) / n);
  return out;
}

}  // namespace oracle
