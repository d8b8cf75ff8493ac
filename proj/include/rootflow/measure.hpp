#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rootflow/family.hpp"

namespace rootflow {

using QuantileFn = std::function<double(double)>;

/// Evaluator that also receives pc = 1 - p. Callers that know the complement
/// more accurately than 1 - p (maps that shrink toward p = 1) pass it along,
/// so quantiles with a pole at p = 1 keep full relative precision.
using TailQuantileFn = std::function<double(double p, double pc)>;

/// Rotationally invariant probability measure on the complex plane, stored
/// through its radial quantile function Q(p) = inf{r : F(r) >= p}.
///
/// Values are tabulated on a strictly increasing grid of probability nodes.
/// A measure may additionally carry an evaluator that is used between (and
/// beyond) the nodes; closed-form families and everything derived from them
/// by the quantile maps in this library carry one, so their identities hold
/// to rounding error rather than interpolation error. Without an evaluator
/// the quantile is piecewise linear in p between nodes, constant below the
/// first node and linearly extrapolated above the last.
///
/// An atom of weight atom0 at the origin is stored separately: Q(p) = 0 for
/// every p <= atom0.
///
/// Instances are immutable and cheap to copy (shared state).
class RadialQuantile {
 public:
  /// Piecewise-linear measure from a quantile table.
  static RadialQuantile from_table(std::vector<double> probs,
                                   std::vector<double> radii,
                                   double atom0 = 0.0);

  /// Measure evaluated through `q` on (atom0, 1) and tabulated at `probs`.
  /// `exact` records whether `q` is exact or itself interpolates.
  static RadialQuantile from_function(QuantileFn q, double atom0,
                                      std::vector<double> probs, bool exact,
                                      std::optional<FamilyTag> tag = {});
  static RadialQuantile from_tail_function(TailQuantileFn q, double atom0,
                                           std::vector<double> probs, bool exact,
                                           std::optional<FamilyTag> tag = {});

  double quantile(double p) const;
  /// Same, with the complement 1 - p supplied by the caller.
  double quantile(double p, double pc) const;
  double cdf(double r) const;

  std::span<const double> probs() const;
  std::span<const double> radii() const;
  double atom0() const;
  std::size_t size() const { return probs().size(); }

  bool has_evaluator() const;
  bool is_exact() const;
  const std::optional<FamilyTag>& closed_form() const;

  /// True when quantile(p) would extrapolate past the last node of a
  /// measure that has no evaluator.
  bool extrapolates(double p) const;

  /// Same measure re-tabulated on another grid (evaluator kept).
  RadialQuantile on_grid(std::vector<double> probs) const;

  /// Quantile evaluated at every p in `ps`.
  std::vector<double> quantiles(std::span<const double> ps) const;

 private:
  struct Impl;
  explicit RadialQuantile(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Roots (or bare moduli) of one polynomial.
struct RootSample {
  std::vector<std::complex<double>> roots;
  std::uint64_t seed = 0;

  static RootSample from_moduli(std::span<const double> moduli,
                                std::uint64_t seed = 0);
  std::size_t size() const { return roots.size(); }
  std::vector<double> moduli() const;
  double max_modulus() const;
};

// Grids ---------------------------------------------------------------------

/// Default node count; the ROOTFLOW_GRID environment variable overrides it.
std::size_t default_grid_size();

/// Nodes on [p_min, p_max] clustered at both ends with a cosine map.
std::vector<double> chebyshev_grid(std::size_t n = default_grid_size(),
                                   double p_min = 1e-6,
                                   double p_max = 1.0 - 1e-6);

/// Nodes uniform in logit(p) on [logit(eps), logit(1 - eps)]; relative
/// spacing near both ends is constant.
std::vector<double> logit_grid(std::size_t n, double eps = 1e-6);

// Operations ----------------------------------------------------------------

double quantile_at(const RadialQuantile& measure, double p);
double cdf_at(const RadialQuantile& measure, double r);

/// Push-forward under z -> z|z|: squares the quantile.
RadialQuantile sq(const RadialQuantile& measure);
/// Inverse of sq: square root of the quantile.
RadialQuantile sq_inv(const RadialQuantile& measure);
/// Push-forward under z -> c z.
RadialQuantile dilate(const RadialQuantile& measure, double c);

/// Empirical quantile (order statistics) of the sample moduli at `grid`.
RadialQuantile from_samples(const RootSample& sample,
                            std::span<const double> grid);
RadialQuantile from_samples(const RootSample& sample);

/// sup over `radii` of |F_a(r) - F_b(r)|. With an empty grid the union of
/// both node sets is used, each radius together with its left limit.
double ks_distance(const RadialQuantile& a, const RadialQuantile& b,
                   std::span<const double> radii = {});

/// Exact Kolmogorov-Smirnov statistic of the sample moduli against `theory`.
double ks_distance(const RootSample& sample, const RadialQuantile& theory);

/// sup over `probs` of |Q_a(p) - Q_b(p)| / max(1, |Q_b(p)|). Absolute for
/// bounded measures, relative where quantiles grow large.
double quantile_distance(const RadialQuantile& a, const RadialQuantile& b,
                         std::span<const double> probs);

// CSV -----------------------------------------------------------------------

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

void write_quantile_csv(std::ostream& out, const RadialQuantile& measure);
void write_cdf_csv(std::ostream& out, const RadialQuantile& measure,
                   std::span<const double> radii);
/// Reads a `p,q` table. An origin atom is recovered from leading zero radii.
RadialQuantile read_quantile_csv(std::istream& in);

}  // namespace rootflow
