#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rootflow/measure.hpp"

namespace rootflow {

/// S-transform of a*a for an R-diagonal element a, restricted to the real
/// interval (-1 + atom0, 0) where it is positive and decreasing.
class STransform {
 public:
  enum class Source { from_quantile, user_supplied };

  STransform(std::function<double(double)> fn, double left, Source source);

  /// Wraps a user function defined on (-1, 0).
  static STransform user(std::function<double(double)> fn);

  /// Evaluates at z in (left(), 0). Throws ErrorCode::singularity at or left
  /// of the singular point and ErrorCode::domain outside (-1, 0).
  double operator()(double z) const;

  double left() const { return left_; }
  Source source() const { return source_; }

 private:
  std::function<double(double)> fn_;
  double left_;
  Source source_;
};

/// z -> Q(1+z)^-2, the S-transform whose Brown measure has quantile Q.
STransform s_from_quantile(const RadialQuantile& brown);

/// Q(p) = 1/sqrt(s(p-1)) on `grid`. Throws ErrorCode::invalid_transform when
/// s is not positive at a node.
RadialQuantile quantile_from_s(const STransform& s, std::vector<double> grid);

struct SupportEndpoints {
  double inner;  // lambda_1
  double outer;  // lambda_2
};

/// Inner and outer radius of the ring carrying the measure (outside the
/// origin atom).
SupportEndpoints support_endpoints(const RadialQuantile& brown);

}  // namespace rootflow
