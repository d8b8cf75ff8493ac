#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rootflow/measure.hpp"

namespace rootflow {

enum class RescaleMode {
  none,
  gauss_lucas,  // divide radii by (1 - t)
  stable,       // divide radii by g(1/(1-t)) (1-t)^(2 - 2/alpha)
};

RescaleMode parse_rescale_mode(std::string_view name);

struct FlowParams {
  double t = 0.0;
  RescaleMode rescale_mode = RescaleMode::none;
  std::optional<double> alpha;
  /// Slowly varying correction; empty means g == 1.
  std::function<double(double)> g;

  /// Throws ErrorCode::domain / ErrorCode::config on violated invariants.
  void validate() const;
  /// Radius scale applied after the flow (1 for RescaleMode::none).
  double rescale_factor() const;
};

/// Root measure of the ceil(tn)-th derivative in the large-n limit:
///   Q_t(x) = x (1-t) Q_0((1-t) x + t) / (x (1-t) + t).
RadialQuantile flow(const RadialQuantile& roots, double t);

/// flow followed by the radius rescaling selected in `params`.
RadialQuantile flow(const RadialQuantile& roots, const FlowParams& params);

/// sup over `grid` of the quantile distance between flow(flow(mu, t), s)
/// and flow(mu, t + s - t s).
double flow_compose_residual(const RadialQuantile& roots, double s, double t,
                             std::span<const double> grid);

/// With lambda = 1 - t, compares flow(mu, t) with
/// lambda^2 sq((sq_inv mu)^{oplus 1/lambda}).
double bridge_residual(const RadialQuantile& roots, double t,
                       std::span<const double> grid);

/// The measure on the bridge side, already scaled by (1 - t)^2.
RadialQuantile bridge_route(const RadialQuantile& roots, double t);

/// flow(Stable(alpha, theta), t) against its dilation by (1-t)^(2 - 2/alpha).
double stable_flow_residual(double alpha, double theta, double t,
                            std::span<const double> grid);

/// sup over grid nodes with p in [p_min, p_max] of
///   |f(t) (1-t)^-(2 - 2/alpha) Q_t(x) - x / (1-x)^(2/alpha - 1)|,
/// f = 1/g(1/(1-t)). `params.alpha` is required; `params.t` is ignored.
double clt_error(const RadialQuantile& roots, const FlowParams& params, double t,
                 std::span<const double> grid, double p_min = 0.05,
                 double p_max = 0.95);

struct TailFit {
  double alpha;            // clamped to (0, 2]
  double slope;            // fitted (2 - alpha)/alpha
  std::vector<double> y;   // 1/(1-p) at the fitted nodes
  std::vector<double> g;   // Q(1 - 1/y) / y^slope
};

/// Least-squares tail index from the last decade of nodes in y = 1/(1-p).
TailFit tail_fit(const RadialQuantile& roots);

}  // namespace rootflow
