#include "rootflow/freeops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rootflow/errors.hpp"

namespace rootflow {

namespace {

std::vector<double> grid_of(const RadialQuantile& m) {
  return {m.probs().begin(), m.probs().end()};
}

}  // namespace

RadialQuantile oplus_power(const RadialQuantile& brown, double k) {
  require(k >= 1.0 && std::isfinite(k), ErrorCode::domain,
          "free convolution power requires k >= 1");
  if (k == 1.0) return brown;
  const double lambda = 1.0 / k;
  const double atom = std::max(0.0, 1.0 - k * (1.0 - brown.atom0()));
  auto q = [brown, lambda](double x, double xc) {
    // Probe Q at 1 - lambda (1 - x), keeping the complement exact.
    const double inner_c = lambda * xc;
    const double inner = std::min(1.0 - inner_c, std::nextafter(1.0, 0.0));
    if (!(inner > 0.0)) return 0.0;
    const double base = brown.quantile(inner, inner_c);
    if (base == 0.0) return 0.0;
    return std::sqrt(x / (lambda * (1.0 - inner_c))) * base;
  };
  return RadialQuantile::from_tail_function(q, atom, grid_of(brown),
                                            brown.is_exact());
}

RadialQuantile product(const RadialQuantile& x, const RadialQuantile& y) {
  require(x.atom0() == 0.0 && y.atom0() == 0.0, ErrorCode::unsupported,
          "product is defined here for atomless Brown measures only");
  auto q = [x, y](double p, double pc) {
    return x.quantile(p, pc) * y.quantile(p, pc);
  };
  return RadialQuantile::from_tail_function(q, 0.0, grid_of(x),
                                            x.is_exact() && y.is_exact());
}

RadialQuantile commutator(const RadialQuantile& x, const RadialQuantile& y) {
  return oplus_power(product(x, y), 2.0);
}

double semigroup_residual(const RadialQuantile& brown, double j, double l,
                          std::span<const double> grid) {
  const auto twice = oplus_power(oplus_power(brown, j), l);
  const auto once = oplus_power(brown, j * l);
  return quantile_distance(twice, once, grid);
}

RadialQuantile stable_quantile(double alpha, double theta) {
  require(alpha > 0.0 && alpha <= 2.0, ErrorCode::domain,
          "stability index must lie in (0,2]");
  require(theta > 0.0 && std::isfinite(theta), ErrorCode::domain,
          "stable scale must be positive");
  const double beta = 2.0 / alpha - 1.0;
  return RadialQuantile::from_tail_function(
      [beta, theta](double p, double pc) {
        return std::sqrt(p / (theta * std::pow(pc, beta)));
      },
      0.0, chebyshev_grid(), true);
}

bool is_stable(const RadialQuantile& brown, double alpha, double tol) {
  require(alpha > 0.0 && alpha <= 2.0, ErrorCode::domain,
          "stability index must lie in (0,2]");
  for (double m : {2.0, 3.0}) {
    const auto lhs = oplus_power(brown, m);
    const auto rhs = dilate(brown, std::pow(m, 1.0 / alpha));
    if (quantile_distance(lhs, rhs, brown.probs()) > tol) return false;
  }
  return true;
}

}  // namespace rootflow
