#include "rootflow/diffflow.hpp"

#include <algorithm>
#include <cmath>

#include "rootflow/errors.hpp"
#include "rootflow/freeops.hpp"

namespace rootflow {

namespace {

std::vector<double> grid_of(const RadialQuantile& m) {
  return {m.probs().begin(), m.probs().end()};
}

void require_time(double t) {
  require(t >= 0.0 && t < 1.0 && std::isfinite(t), ErrorCode::domain,
          "flow time must lie in [0,1)");
}

}  // namespace

RescaleMode parse_rescale_mode(std::string_view name) {
  if (name == "none") return RescaleMode::none;
  if (name == "gauss_lucas" || name == "gauss-lucas") return RescaleMode::gauss_lucas;
  if (name == "stable") return RescaleMode::stable;
  fail(ErrorCode::config, "unknown rescale mode '" + std::string(name) + "'");
}

void FlowParams::validate() const {
  require_time(t);
  if (alpha) {
    require(*alpha > 0.0 && *alpha <= 2.0, ErrorCode::domain,
            "alpha must lie in (0,2]");
  }
  require(rescale_mode != RescaleMode::stable || alpha.has_value(),
          ErrorCode::config, "stable rescaling needs alpha");
}

double FlowParams::rescale_factor() const {
  switch (rescale_mode) {
    case RescaleMode::none:
      return 1.0;
    case RescaleMode::gauss_lucas:
      return 1.0 / (1.0 - t);
    case RescaleMode::stable: {
      const double gv = g ? g(1.0 / (1.0 - t)) : 1.0;
      return 1.0 / (gv * std::pow(1.0 - t, 2.0 - 2.0 / *alpha));
    }
  }
  return 1.0;
}

RadialQuantile flow(const RadialQuantile& roots, double t) {
  require_time(t);
  require(roots.atom0() == 0.0, ErrorCode::unsupported,
          "the differentiation flow is defined for measures without an origin atom");
  if (t == 0.0) return roots;
  const double lambda = 1.0 - t;
  auto q = [roots, lambda, t](double x, double xc) {
    // 1 - (lambda x + t) = lambda (1 - x); pass that instead of rounding.
    const double uc = lambda * xc;
    const double u = std::min(lambda * x + t, std::nextafter(1.0, 0.0));
    return x * lambda * (roots.quantile(u, uc) / (x * lambda + t));
  };
  return RadialQuantile::from_tail_function(q, 0.0, grid_of(roots),
                                            roots.is_exact());
}

RadialQuantile flow(const RadialQuantile& roots, const FlowParams& params) {
  params.validate();
  return dilate(flow(roots, params.t), params.rescale_factor());
}

double flow_compose_residual(const RadialQuantile& roots, double s, double t,
                             std::span<const double> grid) {
  const auto twice = flow(flow(roots, t), s);
  const auto once = flow(roots, t + s - t * s);
  return quantile_distance(twice, once, grid);
}

RadialQuantile bridge_route(const RadialQuantile& roots, double t) {
  require(t > 0.0 && t < 1.0, ErrorCode::domain, "bridge time must lie in (0,1)");
  require(roots.atom0() == 0.0, ErrorCode::unsupported,
          "the bridge is defined for measures without an origin atom");
  const double lambda = 1.0 - t;
  return dilate(sq(oplus_power(sq_inv(roots), 1.0 / lambda)), lambda * lambda);
}

double bridge_residual(const RadialQuantile& roots, double t,
                       std::span<const double> grid) {
  return quantile_distance(flow(roots, t), bridge_route(roots, t), grid);
}

double stable_flow_residual(double alpha, double theta, double t,
                            std::span<const double> grid) {
  require(t > 0.0 && t < 1.0, ErrorCode::domain, "time must lie in (0,1)");
  require(alpha > 0.0 && alpha <= 2.0, ErrorCode::domain, "alpha must lie in (0,2]");
  const auto base = RadialQuantile::from_tail_function(
      [beta = 2.0 / alpha - 1.0, theta](double p, double pc) {
        return theta * p / std::pow(pc, beta);
      },
      0.0, {grid.begin(), grid.end()}, true);
  const auto lhs = flow(base, t);
  const auto rhs = dilate(base, std::pow(1.0 - t, 2.0 - 2.0 / alpha));
  return quantile_distance(lhs, rhs, grid);
}

double clt_error(const RadialQuantile& roots, const FlowParams& params, double t,
                 std::span<const double> grid, double p_min, double p_max) {
  require(params.alpha.has_value(), ErrorCode::config, "clt_error needs alpha");
  FlowParams p = params;
  p.t = t;
  p.rescale_mode = RescaleMode::stable;
  p.validate();
  const double scale = p.rescale_factor();
  const double beta = 2.0 / *p.alpha - 1.0;
  const auto qt = flow(roots, t);
  double worst = 0.0;
  for (double x : grid) {
    if (x < p_min || x > p_max) continue;
    const double limit = x / std::pow(1.0 - x, beta);
    worst = std::max(worst, std::abs(scale * qt.quantile(x) - limit));
  }
  return worst;
}

TailFit tail_fit(const RadialQuantile& roots) {
  const auto ps = roots.probs();
  const double y_max = 1.0 / (1.0 - ps.back());
  std::vector<double> lx, ly, ys;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double y = 1.0 / (1.0 - ps[i]);
    if (y < y_max / 10.0 || y < 2.0) continue;
    const double q = roots.quantile(ps[i]);
    if (!(q > 0.0)) continue;
    ys.push_back(y);
    lx.push_back(std::log(y));
    ly.push_back(std::log(q));
  }
  require(lx.size() >= 3 && lx.back() - lx.front() > 1.0, ErrorCode::insufficient_data,
          "tail fit needs nodes spanning a decade in 1/(1-p)");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  TailFit fit;
  fit.slope = slope;
  // A bounded quantile has slope ~0; anything at or below 0 reads as alpha = 2.
  fit.alpha = slope <= 0.0 ? 2.0 : std::min(2.0, 2.0 / (slope + 1.0));
  fit.y = ys;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    fit.g.push_back(std::exp(ly[i] - slope * lx[i]));
  }
  return fit;
}

}  // namespace rootflow
