#pragma once

#include <span>

#include "rootflow/measure.hpp"

namespace rootflow {

/// Fractional free convolution power of a Brown measure of an R-diagonal
/// element: the Brown measure of (a_1 + ... + a_k) for integer k, extended
/// to real k >= 1. With lambda = 1/k,
///   Q_k(x) = sqrt(x / (lambda (1 + lambda (x - 1)))) * Q((x - 1) lambda + 1),
/// and the origin atom becomes max{0, 1 - k (1 - atom0)}. k = 1 returns the
/// input unchanged.
RadialQuantile oplus_power(const RadialQuantile& brown, double k);

/// Brown measure of x y for *-free R-diagonal x, y: quantiles multiply.
/// Both inputs must be atomless.
RadialQuantile product(const RadialQuantile& x, const RadialQuantile& y);

/// Brown measure of x y - y x (and of x y + y x): product followed by the
/// second free convolution power.
RadialQuantile commutator(const RadialQuantile& x, const RadialQuantile& y);

/// sup over `grid` of the quantile distance between
/// oplus_power(oplus_power(brown, j), l) and oplus_power(brown, j l).
double semigroup_residual(const RadialQuantile& brown, double j, double l,
                          std::span<const double> grid);

/// alpha-stable Brown measure whose a a* has S-transform
/// theta (-z)^(2/alpha - 1) / (1 + z):
///   Q(p) = sqrt(p / (theta (1 - p)^(2/alpha - 1))).
RadialQuantile stable_quantile(double alpha, double theta = 1.0);

/// Checks oplus_power(brown, m) == dilate(brown, m^(1/alpha)) for m = 2, 3
/// on the measure's grid, within `tol` in quantile distance.
bool is_stable(const RadialQuantile& brown, double alpha, double tol = 1e-9);

}  // namespace rootflow
