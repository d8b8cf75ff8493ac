#include "rootflow/transforms.hpp"

#include <cmath>

#include "rootflow/errors.hpp"

namespace rootflow {

STransform::STransform(std::function<double(double)> fn, double left,
                       Source source)
    : fn_(std::move(fn)), left_(left), source_(source) {
  require(static_cast<bool>(fn_), ErrorCode::invalid_transform,
          "empty S-transform");
  require(left_ >= -1.0 && left_ < 0.0, ErrorCode::invalid_transform,
          "S-transform interval must be (left, 0) with left in [-1, 0)");
}

STransform STransform::user(std::function<double(double)> fn) {
  return STransform(std::move(fn), -1.0, Source::user_supplied);
}

double STransform::operator()(double z) const {
  require(z > -1.0 && z < 0.0, ErrorCode::domain,
          "S-transform argument must lie in (-1, 0)");
  require(z > left_, ErrorCode::singularity,
          "S-transform evaluated at or beyond its singularity");
  return fn_(z);
}

STransform s_from_quantile(const RadialQuantile& brown) {
  const double a = brown.atom0();
  return STransform(
      [brown](double z) {
        const double q = brown.quantile(1.0 + z, -z);
        require(q > 0.0, ErrorCode::singularity,
                "S-transform is singular where the quantile vanishes");
        return 1.0 / (q * q);
      },
      -1.0 + a, STransform::Source::from_quantile);
}

RadialQuantile quantile_from_s(const STransform& s, std::vector<double> grid) {
  auto q = [s](double p) {
    const double v = s(p - 1.0);
    require(v > 0.0 && std::isfinite(v), ErrorCode::invalid_transform,
            "S-transform must be positive and finite on (-1, 0)");
    return 1.0 / std::sqrt(v);
  };
  // An origin atom shows up as the singular left end of the interval.
  const double atom0 = s.left() + 1.0;
  return RadialQuantile::from_function(q, atom0, std::move(grid), true);
}

SupportEndpoints support_endpoints(const RadialQuantile& brown) {
  const double a = brown.atom0();
  if (brown.has_evaluator()) {
    return {brown.quantile(std::nextafter(a, 1.0)),
            brown.quantile(std::nextafter(1.0, 0.0))};
  }
  const auto ps = brown.probs();
  const auto rs = brown.radii();
  double inner = rs.back();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i] > a) {
      inner = rs[i];
      break;
    }
  }
  return {inner, rs.back()};
}

}  // namespace rootflow
