#include "rootflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rootflow/errors.hpp"

namespace rootflow {

namespace {

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

void check_nodes(std::span<const double> x) {
  require(x.size() >= 3, ErrorCode::insufficient_data, "PDE grid needs at least 3 nodes");
  require(x.front() == 0.0, ErrorCode::domain, "PDE grid must start at x = 0");
  for (std::size_t i = 1; i < x.size(); ++i) {
    require(x[i] > x[i - 1] && std::isfinite(x[i]), ErrorCode::domain,
            "PDE grid must be strictly increasing");
  }
}

// d log phi / d log x at nodes 1..M-1 by upwind (right-sided) differences in
// log space. Node M is an inflow boundary: it takes the slope of the cell
// below it, since a slope involving its own value would be downwind and
// unstable. Index 0 is unused.
std::vector<double> log_slopes(std::span<const double> x, std::span<const double> phi,
                               bool second_order) {
  const std::size_t n = x.size();
  std::vector<double> s(n), l(n), d(n, 0.0), g(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    s[i] = std::log(x[i]);
    l[i] = std::log(phi[i]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (l[i + 1] - l[i]) / (s[i + 1] - s[i]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g[i] = d[i];
    if (second_order && i >= 2 && i + 2 < n) {
      const double w = (s[i + 1] - s[i]) / (s[i + 2] - s[i]);
      g[i] -= w * minmod(d[i + 1] - d[i], d[i] - d[i - 1]);
    }
  }
  g[n - 1] = d[n - 3];
  return g;
}

void check_positive(std::span<const double> phi, ErrorCode code) {
  for (std::size_t i = 1; i < phi.size(); ++i) {
    require(phi[i] > 0.0 && std::isfinite(phi[i]), code,
            "CDF must stay positive on (x_0, x_M]");
  }
}

// Characteristic speed in log x at node i, per unit time.
double log_speed(const PdeState& s, PdeForm form, std::size_t i) {
  const double lam = 1.0 - s.t;
  const double p = s.phi[i];
  return form == PdeForm::cdf ? 1.0 / (lam * p) : (1.0 / p - 1.0) / lam;
}

bool at_top(double v) { return v >= 1.0; }

std::vector<double> rhs_values(std::span<const double> x, std::span<const double> phi,
                               PdeForm form, bool second_order) {
  const std::size_t n = x.size();
  const auto g = log_slopes(x, phi, second_order);
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    // A node at Phi = 1 with nothing above it cannot move.
    if (i == n - 1 && at_top(phi[i])) continue;
    r[i] = form == PdeForm::cdf ? g[i] - 1.0 + phi[i] : (g[i] - 1.0) * (1.0 - phi[i]);
  }
  return r;
}

PdeState rk4_step(const PdeState& state, double dt, PdeForm form) {
  state.validate();
  require(dt > 0.0, ErrorCode::domain, "time step must be positive");
  require(state.t + dt < 1.0, ErrorCode::domain, "t + dt must stay below 1");
  check_positive(state.phi, ErrorCode::domain);
  const double limit = stable_dt(state, form);
  if (dt > limit) {
    fail(ErrorCode::step_rejected, "time step " + format_double(dt) +
                                       " breaks the CFL limit " + format_double(limit));
  }

  const std::size_t n = state.x.size();
  const bool so = state.scheme.second_order;
  auto f = [&](const std::vector<double>& phi, double t) {
    for (std::size_t i = 1; i < n; ++i) {
      if (!(phi[i] > 0.0)) fail(ErrorCode::step_rejected, "intermediate stage lost positivity");
    }
    auto r = rhs_values(state.x, phi, form, so);
    for (double& v : r) v /= 1.0 - t;
    return r;
  };
  auto axpy = [n](const std::vector<double>& a, double h, const std::vector<double>& k) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + h * k[i];
    return out;
  };
  const auto& y = state.phi;
  const double t = state.t;
  const auto k1 = f(y, t);
  const auto k2 = f(axpy(y, 0.5 * dt, k1), t + 0.5 * dt);
  const auto k3 = f(axpy(y, 0.5 * dt, k2), t + 0.5 * dt);
  const auto k4 = f(axpy(y, dt, k3), t + dt);

  PdeState out = state;
  out.t = t + dt;
  for (std::size_t i = 1; i < n; ++i) {
    out.phi[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  // Monotone projection onto nondecreasing values in [0, 1].
  double running = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = std::clamp(std::max(out.phi[i], running), 0.0, 1.0);
    const double moved = std::abs(v - out.phi[i]);
    if (moved > 0.0) {
      ++out.projections;
      out.max_projection = std::max(out.max_projection, moved);
    }
    out.phi[i] = v;
    running = v;
  }
  check_positive(out.phi, ErrorCode::step_rejected);
  return out;
}

}  // namespace

void PdeState::validate() const {
  check_nodes(x);
  require(phi.size() == x.size(), ErrorCode::domain, "CDF values and grid differ in length");
  require(t >= 0.0 && t < 1.0, ErrorCode::domain, "PDE time must lie in [0,1)");
  require(scheme.cfl > 0.0, ErrorCode::config, "CFL limit must be positive");
}

double PdeState::cdf(double r) const {
  if (r <= x.front()) return 0.0;
  if (r >= x.back()) return phi.back();
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double w = (r - x[i]) / (x[i + 1] - x[i]);
  return phi[i] + w * (phi[i + 1] - phi[i]);
}

std::vector<double> uniform_nodes(std::size_t m, double x_max) {
  require(m >= 2, ErrorCode::insufficient_data, "need at least 2 cells");
  require(x_max > 0.0 && std::isfinite(x_max), ErrorCode::domain, "grid end must be positive");
  std::vector<double> x(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    x[i] = x_max * static_cast<double>(i) / static_cast<double>(m);
  }
  x[m] = x_max;
  return x;
}

std::vector<double> stretched_nodes(std::size_t m, double scale, double x_max) {
  require(m >= 2, ErrorCode::insufficient_data, "need at least 2 cells");
  require(scale > 0.0 && x_max > scale && std::isfinite(x_max), ErrorCode::domain,
          "need 0 < scale < x_max");
  const double b = std::log1p(x_max / scale);
  std::vector<double> x(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    x[i] = scale * std::expm1(b * static_cast<double>(i) / static_cast<double>(m));
  }
  x[m] = x_max;
  return x;
}

PdeState make_state(std::function<double(double)> cdf, std::vector<double> nodes, double t,
                    PdeScheme scheme) {
  check_nodes(nodes);
  PdeState s;
  s.t = t;
  s.scheme = scheme;
  s.phi.resize(nodes.size());
  s.phi[0] = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) s.phi[i] = std::clamp(cdf(nodes[i]), 0.0, 1.0);
  s.x = std::move(nodes);
  s.validate();
  return s;
}

PdeState make_state(const RadialQuantile& measure, std::vector<double> nodes, double t,
                    PdeScheme scheme) {
  require(measure.atom0() == 0.0, ErrorCode::unsupported,
          "the PDE needs a radial density; atoms at the origin are not supported");
  auto state = make_state([&measure](double r) { return measure.cdf(r); }, std::move(nodes), t,
                          scheme);
  // An atom off the origin leaves Phi = 0 on an interval.
  check_positive(state.phi, ErrorCode::domain);
  return state;
}

std::vector<double> pde_rhs(const PdeState& state, PdeForm form) {
  state.validate();
  check_positive(state.phi, ErrorCode::domain);
  return rhs_values(state.x, state.phi, form, state.scheme.second_order);
}

double stable_dt(const PdeState& state, PdeForm form) {
  double dt = std::numeric_limits<double>::infinity();
  const std::size_t n = state.x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double v = log_speed(state, form, i);
    if (!(v > 0.0)) continue;
    const double ds = std::log(state.x[i + 1] / state.x[i]);
    dt = std::min(dt, state.scheme.cfl * ds / v);
  }
  return dt;
}

PdeState step_cdf(const PdeState& state, double dt) { return rk4_step(state, dt, PdeForm::cdf); }

PdeState step_rescaled(const PdeState& state, double dt) {
  return rk4_step(state, dt, PdeForm::rescaled);
}

PdeState integrate(PdeState state, double t_end, PdeForm form, const IntegrateOptions& options,
                   std::vector<PdeState>* trajectory) {
  state.validate();
  require(t_end >= state.t && t_end < 1.0, ErrorCode::domain,
          "t_end must lie in [t, 1)");
  require(options.dt > 0.0, ErrorCode::config, "time step must be positive");
  if (trajectory) trajectory->push_back(state);
  std::size_t steps = 0;
  bool last_recorded = true;
  while (t_end - state.t > 1e-14 * (1.0 + t_end)) {
    double dt = std::min({options.dt, t_end - state.t, 0.95 * stable_dt(state, form)});
    // Stage values can raise the speed beyond the start-of-step estimate.
    for (int attempt = 0;; ++attempt) {
      try {
        state = rk4_step(state, dt, form);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::step_rejected || attempt >= 40) throw;
        dt *= 0.5;
      }
    }
    ++steps;
    last_recorded = false;
    if (trajectory && options.record_every > 0 && steps % options.record_every == 0) {
      trajectory->push_back(state);
      last_recorded = true;
    }
  }
  if (trajectory && !last_recorded) trajectory->push_back(state);
  return state;
}

double ode_residual(std::span<const double> x, std::span<const double> f) {
  require(x.size() == f.size() && x.size() >= 3, ErrorCode::insufficient_data,
          "need matching grids with at least 3 nodes");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    require(x[i + 1] > x[i] && x[i] > x[i - 1], ErrorCode::domain, "grid must increase");
    if (f[i] == 0.0) continue;
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    // Three-point derivative, second order on uneven spacing.
    const double d = (f[i + 1] - f[i]) * h0 / (h1 * (h0 + h1)) +
                     (f[i] - f[i - 1]) * h1 / (h0 * (h0 + h1));
    const double xd = x[i] * d;
    worst = std::max(worst, std::abs(xd - xd / f[i] + 1.0 - f[i]));
  }
  return worst;
}

MassTrajectory density_mass_check(std::function<double(double)> psi0, double support,
                                  double t_end, std::size_t cells, double dt,
                                  std::size_t samples) {
  require(support > 0.0 && std::isfinite(support), ErrorCode::domain,
          "support must be positive");
  require(t_end >= 0.0 && t_end < 1.0, ErrorCode::domain, "t_end must lie in [0,1)");
  require(cells >= 2 && dt > 0.0 && samples >= 2, ErrorCode::config,
          "need cells >= 2, dt > 0 and at least 2 samples");
  const std::size_t m = cells;
  const double h = support / static_cast<double>(m);

  // Cell averages by Simpson's rule, renormalised to unit mass.
  std::vector<double> psi(m);
  double mass = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double a = h * static_cast<double>(j);
    psi[j] = (psi0(a) + 4.0 * psi0(a + 0.5 * h) + psi0(a + h)) / 6.0;
    require(psi[j] >= 0.0 && std::isfinite(psi[j]), ErrorCode::domain,
            "initial density must be finite and nonnegative");
    mass += h * psi[j];
  }
  require(mass > 0.0, ErrorCode::domain, "initial density has no mass");
  for (double& v : psi) v /= mass;
  require(psi[0] > 0.0, ErrorCode::domain, "initial density must be positive at the origin");
  std::vector<double> phi = psi;

  // Upwind fluxes x rho / R at the faces; mass leaves through x = 0 at the
  // limiting rate x rho / R -> 1 estimated from the first cell.
  auto flux_div = [m, h](const std::vector<double>& rho, double& max_speed) {
    std::vector<double> face(m + 1, 0.0);
    double cum = h * rho[0];
    face[0] = rho[0] > 0.0 ? h * rho[0] / cum : 0.0;
    max_speed = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      const double x = h * static_cast<double>(k);
      if (rho[k] > 0.0 && cum > 0.0) {
        face[k] = x * rho[k] / cum;
        max_speed = std::max(max_speed, x / cum);
      }
      cum += h * rho[k];
    }
    std::vector<double> div(m);
    for (std::size_t j = 0; j < m; ++j) div[j] = (face[j + 1] - face[j]) / h;
    return div;
  };
  auto rate = [&](const std::vector<double>& rho, double t, bool renormalised,
                  double& speed) {
    auto d = flux_div(rho, speed);
    if (renormalised) {
      for (std::size_t j = 0; j < m; ++j) d[j] = (d[j] + rho[j]) / (1.0 - t);
      speed /= 1.0 - t;
    }
    return d;
  };
  // Strong-stability-preserving RK3 keeps the upwind step positive.
  auto ssp3 = [&](std::vector<double>& rho, double t, double step, bool renorm) {
    double sp = 0.0;
    const auto k1 = rate(rho, t, renorm, sp);
    std::vector<double> u1(m), u2(m);
    for (std::size_t j = 0; j < m; ++j) u1[j] = std::max(0.0, rho[j] + step * k1[j]);
    const auto k2 = rate(u1, t + step, renorm, sp);
    for (std::size_t j = 0; j < m; ++j) {
      u2[j] = std::max(0.0, 0.75 * rho[j] + 0.25 * (u1[j] + step * k2[j]));
    }
    const auto k3 = rate(u2, t + 0.5 * step, renorm, sp);
    for (std::size_t j = 0; j < m; ++j) {
      rho[j] = std::max(0.0, rho[j] / 3.0 + 2.0 / 3.0 * (u2[j] + step * k3[j]));
    }
  };
  auto total = [h](const std::vector<double>& rho) {
    double s = 0.0;
    for (double v : rho) s += h * v;
    return s;
  };

  MassTrajectory out;
  out.t.push_back(0.0);
  out.psi_mass.push_back(total(psi));
  out.phi_mass.push_back(total(phi));
  double t = 0.0;
  for (std::size_t k = 1; k < samples; ++k) {
    const double target = t_end * static_cast<double>(k) / static_cast<double>(samples - 1);
    while (target - t > 1e-14) {
      double sp_psi = 0.0, sp_phi = 0.0;
      rate(psi, t, false, sp_psi);
      rate(phi, t, true, sp_phi);
      const double sp = std::max({sp_psi, sp_phi, 1e-300});
      const double step = std::min({dt, target - t, 0.4 * h / sp});
      ssp3(psi, t, step, false);
      ssp3(phi, t, step, true);
      t += step;
    }
    out.t.push_back(target);
    out.psi_mass.push_back(total(psi));
    out.phi_mass.push_back(total(phi));
  }
  return out;
}

double brown_cdf_residual(const PdeState& state, double dt) {
  const PdeState next = step_cdf(state, dt);
  const std::size_t n = state.x.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::sqrt(state.x[i]);
  // F(r, t) = Phi(r^2, t) lives on the r grid; its log-slope is taken there.
  auto brown_rhs = [&](const std::vector<double>& f) {
    const auto g = log_slopes(r, f, state.scheme.second_order);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) out[i] = 0.5 * g[i] - 1.0 + f[i];
    return out;
  };
  const auto r0 = brown_rhs(state.phi);
  const auto r1 = brown_rhs(next.phi);
  const double lam = 1.0 - (state.t + 0.5 * dt);
  double worst = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (state.phi[i] >= 1.0 && next.phi[i] >= 1.0) continue;
    const double lhs = lam * (next.phi[i] - state.phi[i]) / dt;
    worst = std::max(worst, std::abs(lhs - 0.5 * (r0[i] + r1[i])));
  }
  return worst;
}

void write_trajectory_csv(std::ostream& out, std::span<const PdeState> states) {
  out << "t,x,phi\n";
  for (const auto& s : states) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << format_double(s.t) << ',' << format_double(s.x[i]) << ','
          << format_double(s.phi[i]) << '\n';
    }
  }
}

}  // namespace rootflow
