#include "rootflow/kz.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rootflow/errors.hpp"

namespace rootflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
long double xlogx_l(long double x) { return x > 0.0L ? x * std::log(x) : 0.0L; }

// Indices of the lower convex hull of the finite points (x increasing).
std::vector<std::size_t> lower_hull(std::span<const double> x, std::span<const double> y) {
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    while (h.size() >= 2) {
      const std::size_t a = h[h.size() - 2], b = h.back();
      // Drop b when it lies on or above the chord a-i.
      const double lhs = (y[b] - y[a]) * (x[i] - x[a]);
      const double rhs = (y[i] - y[a]) * (x[b] - x[a]);
      if (lhs >= rhs) {
        h.pop_back();
      } else {
        break;
      }
    }
    h.push_back(i);
  }
  return h;
}

void require_increasing(std::span<const double> x, const char* what) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    require(x[i] > x[i - 1], ErrorCode::domain, std::string(what) + " must be increasing");
  }
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

GridFunction legendre_fenchel(const GridFunction& f, std::span<const double> dual) {
  require(f.x.size() == f.y.size(), ErrorCode::domain, "grid function size mismatch");
  require_increasing(f.x, "grid nodes");
  const auto hull = lower_hull(f.x, f.y);
  require(!hull.empty(), ErrorCode::domain, "conjugate of a function that is +inf everywhere");

  std::vector<std::size_t> order(dual.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dual[a] < dual[b]; });

  GridFunction g;
  g.x.assign(dual.begin(), dual.end());
  g.y.assign(dual.size(), 0.0);
  std::size_t j = 0;
  for (std::size_t idx : order) {
    const double s = dual[idx];
    // The maximiser moves right along the hull as the slope s grows.
    while (j + 1 < hull.size()) {
      const std::size_t a = hull[j], b = hull[j + 1];
      if ((f.y[b] - f.y[a]) <= s * (f.x[b] - f.x[a])) {
        ++j;
      } else {
        break;
      }
    }
    g.y[idx] = s * f.x[hull[j]] - f.y[hull[j]];
  }
  return g;
}

GridFunction convex_envelope(const GridFunction& f) {
  require(f.x.size() == f.y.size(), ErrorCode::domain, "grid function size mismatch");
  require_increasing(f.x, "grid nodes");
  const auto hull = lower_hull(f.x, f.y);
  require(!hull.empty(), ErrorCode::domain, "envelope of a function that is +inf everywhere");
  GridFunction g{f.x, std::vector<double>(f.x.size(), kInf)};
  std::size_t j = 0;
  for (std::size_t i = hull.front(); i <= hull.back(); ++i) {
    while (j + 1 < hull.size() && hull[j + 1] < i) ++j;
    if (i == hull[j]) {
      g.y[i] = f.y[i];
      continue;
    }
    const std::size_t a = hull[j], b = hull[j + 1];
    if (i == b) {
      g.y[i] = f.y[b];
      continue;
    }
    const double w = (f.x[i] - f.x[a]) / (f.x[b] - f.x[a]);
    g.y[i] = f.y[a] + w * (f.y[b] - f.y[a]);
  }
  return g;
}

double CoefProfile::operator()(double s) const {
  if (s > mass) return kInf;
  if (exact && s >= 0.0) return exact(s, mass - s);
  require(!t.empty(), ErrorCode::domain, "empty profile");
  if (t.size() == 1) return u.front();
  auto it = std::upper_bound(t.begin(), t.end(), s);
  std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  i = std::min(i, t.size() - 2);
  const double w = (s - t[i]) / (t[i + 1] - t[i]);
  return u[i] + w * (u[i + 1] - u[i]);
}

std::vector<double> profile_grid(std::size_t n, double eps, double mass) {
  require(mass > 0.0 && mass <= 1.0, ErrorCode::domain, "profile mass must lie in (0,1]");
  auto g = logit_grid(n, eps);
  if (mass != 1.0) {
    for (auto& x : g) x *= mass;
  }
  return g;
}

CoefProfile profile_from_tail_function(ProfileFn u, std::vector<double> nodes,
                                       double mass) {
  require(static_cast<bool>(u), ErrorCode::domain, "empty profile function");
  if (nodes.empty()) nodes = profile_grid(32768, 1e-7, mass);
  require_increasing(nodes, "profile nodes");
  CoefProfile p;
  p.mass = mass;
  p.t = std::move(nodes);
  p.u.resize(p.t.size());
  // Nodes sit in [mass/2, mass] near the right end, so mass - t is exact there.
  for (std::size_t i = 0; i < p.t.size(); ++i) p.u[i] = u(p.t[i], mass - p.t[i]);
  p.exact = std::move(u);
  return p;
}

CoefProfile profile_from_function(std::function<double(double)> u,
                                  std::vector<double> nodes, double mass) {
  require(static_cast<bool>(u), ErrorCode::domain, "empty profile function");
  return profile_from_tail_function([u = std::move(u)](double s, double) { return u(s); },
                                    std::move(nodes), mass);
}

CoefProfile kac_profile() {
  return profile_from_function([](double) { return 0.0; });
}

CoefProfile taylor_profile() {
  return profile_from_function([](double t) { return xlogx(t) - t; });
}

CoefProfile elliptic_profile(double w) {
  require(w >= 0.0 && std::isfinite(w), ErrorCode::domain, "elliptic exponent must be >= 0");
  return profile_from_tail_function(
      [w](double t, double tc) { return w * (xlogx(t) + xlogx(tc)); });
}

CoefProfile stable_profile(double l) {
  require(l >= 0.0 && std::isfinite(l), ErrorCode::domain, "stable exponent must be >= 0");
  // Stirling limit of (1/n) log P_{k,n} with k = tn, negated.
  return profile_from_tail_function([l](double t, double tc) {
    return (1.0 - l) * (xlogx(t) - t) + l * (xlogx(t) + xlogx(tc));
  });
}

CoefProfile profile_sum(const CoefProfile& a, const CoefProfile& b) {
  require(a.mass == b.mass, ErrorCode::domain, "profiles live on different domains");
  CoefProfile out;
  out.mass = a.mass;
  out.t = a.t;
  out.u.resize(a.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) out.u[i] = a.u[i] + b(a.t[i]);
  if (a.exact && b.exact) {
    out.exact = [ea = a.exact, eb = b.exact](double s, double sc) {
      return ea(s, sc) + eb(s, sc);
    };
  }
  return out;
}

CoefProfile convexify(const CoefProfile& profile) {
  CoefProfile out = profile;
  const auto env = convex_envelope({profile.t, profile.u});
  bool moved = false;
  for (std::size_t i = 0; i < env.y.size(); ++i) {
    if (std::abs(env.y[i] - profile.u[i]) > 1e-12 * (1.0 + std::abs(profile.u[i]))) {
      moved = true;
    }
  }
  out.u = env.y;
  // The analytic form no longer describes a profile that had to be changed.
  if (moved) out.exact = nullptr;
  out.convexified = true;
  return out;
}

RadialQuantile profile_to_measure(const CoefProfile& profile) {
  const CoefProfile c = profile.convexified ? profile : convexify(profile);
  require(c.t.size() >= 2, ErrorCode::insufficient_data, "profile needs two nodes");
  std::vector<double> probs, logq;
  for (std::size_t i = 0; i + 1 < c.t.size(); ++i) {
    if (!std::isfinite(c.u[i]) || !std::isfinite(c.u[i + 1])) continue;
    const double slope = (c.u[i + 1] - c.u[i]) / (c.t[i + 1] - c.t[i]);
    const double p = 0.5 * (c.t[i] + c.t[i + 1]) / c.mass;
    if (!(p > 0.0 && p < 1.0)) continue;
    probs.push_back(p);
    // Convexity makes slopes nondecreasing; guard against rounding.
    logq.push_back(logq.empty() ? slope : std::max(slope, logq.back()));
  }
  require(!probs.empty(), ErrorCode::insufficient_data, "profile has no finite cell");

  std::vector<double> z(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) z[i] = logit(probs[i]);
  auto q = [z, logq](double p) {
    if (z.size() == 1) return std::exp(logq.front());
    const double zp = logit(p);
    auto it = std::upper_bound(z.begin(), z.end(), zp);
    std::size_t i = it == z.begin() ? 0 : static_cast<std::size_t>(it - z.begin()) - 1;
    i = std::min(i, z.size() - 2);
    const double w = (zp - z[i]) / (z[i + 1] - z[i]);
    return std::exp(logq[i] + w * (logq[i + 1] - logq[i]));
  };
  return RadialQuantile::from_function(q, 0.0, std::move(probs), false);
}

ProfileAndCoeffs measure_to_profile(const RadialQuantile& measure, std::size_t n,
                                    std::size_t nodes, double eps) {
  require(measure.atom0() == 0.0, ErrorCode::unsupported,
          "measures with an atom at the origin have no coefficient profile");
  require(n >= 1, ErrorCode::domain, "degree must be at least 1");
  const auto grid = logit_grid(nodes, eps);

  // s_j = log Q(p_j); equal radii collapse to the largest p, which is F there.
  std::vector<double> ps, ss;
  for (double p : grid) {
    const double q = measure.quantile(p);
    require(q > 0.0 && std::isfinite(q), ErrorCode::unsupported,
            "quantile must be positive and finite to build a profile");
    const double s = std::log(q);
    if (!ss.empty() && s == ss.back()) {
      ps.back() = p;
    } else {
      ps.push_back(p);
      ss.push_back(s);
    }
  }

  // Trapezoid rule for I(s) = int F(e^r) dr, anchored at I(s_0) = 0.
  std::vector<double> integral(ss.size(), 0.0);
  for (std::size_t j = 1; j < ss.size(); ++j) {
    integral[j] = integral[j - 1] + (ss[j] - ss[j - 1]) * 0.5 * (ps[j] + ps[j - 1]);
  }

  // The conjugate kinks at the p-midpoints. Extra nodes mirrored around the
  // end probabilities make every slope's cell centred on its own p_j.
  std::vector<double> dual{0.0};
  const std::size_t k = ps.size();
  if (k >= 2) {
    const double lead = 2.0 * ps.front() - 0.5 * (ps[0] + ps[1]);
    if (lead > 0.0) dual.push_back(lead);
    for (std::size_t j = 0; j + 1 < k; ++j) dual.push_back(0.5 * (ps[j] + ps[j + 1]));
    const double trail = 2.0 * ps.back() - 0.5 * (ps[k - 2] + ps[k - 1]);
    if (trail < 1.0) dual.push_back(trail);
  }
  dual.push_back(1.0);

  ProfileAndCoeffs out;
  out.profile.t = dual;
  out.profile.u = legendre_fenchel({ss, integral}, dual).y;
  out.profile.mass = 1.0;
  out.profile.convexified = true;
  out.log_coeffs.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    out.log_coeffs[i] = -static_cast<double>(n) * out.profile(t);
  }
  return out;
}

CoefProfile derivative_profile(const CoefProfile& profile, double t) {
  require(t >= 0.0 && t < 1.0, ErrorCode::domain, "derivative time must lie in [0,1)");
  require(profile.mass == 1.0, ErrorCode::domain,
          "derivative profiles start from a probability profile");
  if (t == 0.0) return profile;
  const double shift = xlogx(1.0 - t);
  auto correction = [t, shift](double x) { return -xlogx(x + t) + xlogx(x) - shift; };

  CoefProfile out;
  out.mass = 1.0 - t;
  if (profile.exact) {
    // 1 - (x + t) = (1 - t - mass) + (mass - x); the first part is the
    // rounding left in mass. The correction cancels heavily near the end,
    // hence the wider accumulator.
    const long double lead = (1.0L - static_cast<long double>(t)) - out.mass;
    const long double lshift = xlogx_l(1.0L - static_cast<long double>(t));
    auto u = [base = profile.exact, t, lead, lshift](double x, double xc) {
      const long double s = static_cast<long double>(x) + t;
      const long double sc = lead + xc;
      const long double c = -xlogx_l(s) + xlogx_l(x) - lshift;
      return static_cast<double>(base(static_cast<double>(s), static_cast<double>(sc)) + c);
    };
    return profile_from_tail_function(u, profile_grid(profile.t.size(), 1e-7, out.mass),
                                      out.mass);
  }
  // Sampled profile: reuse the nodes beyond t so no interpolation enters.
  if (profile.t.front() < t) {
    out.t.push_back(0.0);
    out.u.push_back(profile(t) + correction(0.0));
  }
  for (std::size_t i = 0; i < profile.t.size(); ++i) {
    if (profile.t[i] < t) continue;
    const double x = profile.t[i] - t;
    if (!out.t.empty() && x <= out.t.back()) continue;
    out.t.push_back(std::min(x, out.mass));
    out.u.push_back(profile.u[i] + correction(x));
  }
  require(out.t.size() >= 2, ErrorCode::insufficient_data,
          "too few profile nodes beyond t");
  return out;
}

std::vector<double> stable_poly_coeffs(std::size_t n, double l) {
  require(n >= 1, ErrorCode::domain, "degree must be at least 1");
  require(l >= 0.0 && std::isfinite(l), ErrorCode::domain, "stable exponent must be >= 0");
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  const double lg_n1 = std::lgamma(nn + 1.0);
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double lg_k1 = std::lgamma(kk + 1.0);
    const double log_binom = lg_n1 - lg_k1 - std::lgamma(nn - kk + 1.0);
    out[k] = (l - 1.0) * (lg_k1 - kk * log_n) + l * log_binom;
  }
  return out;
}

RadialQuantile elliptic_root_measure(double w, std::vector<double> grid) {
  require(w >= 0.0 && std::isfinite(w), ErrorCode::domain, "elliptic exponent must be >= 0");
  return RadialQuantile::from_tail_function(
      [w](double p, double pc) { return std::pow(p / pc, w); }, 0.0, std::move(grid), true);
}

RadialQuantile elliptic_rescaled_limit(double w, std::span<const double> d_over_n) {
  require(w >= 0.0 && std::isfinite(w), ErrorCode::domain, "elliptic exponent must be >= 0");
  for (double r : d_over_n) {
    require(r > 0.0 && r <= 1.0, ErrorCode::domain, "D_n/n ratios must lie in (0,1]");
  }
  // -log P_w(x) with log P_w(x) = -x log x - w(1-x)log(1-x) + (1-w)x + w - 1.
  const auto profile = profile_from_tail_function([w](double x, double xc) {
    return xlogx(x) + w * xlogx(xc) - (1.0 - w) * x - w + 1.0;
  });
  return profile_to_measure(profile);
}

CoefProfile profile_from_coeffs(std::span<const double> log_coeffs) {
  require(log_coeffs.size() >= 2, ErrorCode::insufficient_data,
          "need at least two coefficients");
  const double n = static_cast<double>(log_coeffs.size() - 1);
  CoefProfile p;
  for (std::size_t k = 0; k < log_coeffs.size(); ++k) {
    p.t.push_back(static_cast<double>(k) / n);
    p.u.push_back(-log_coeffs[k] / n);
  }
  return p;
}

void write_coeff_csv(std::ostream& out, std::span<const double> log_coeffs) {
  out << "k,log_magnitude\n";
  for (std::size_t k = 0; k < log_coeffs.size(); ++k) {
    out << k << ',' << format_double(log_coeffs[k]) << '\n';
  }
}

std::vector<double> read_coeff_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, "empty coefficient file");
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorCode::io, "bad coefficient row: " + line);
    std::size_t k = 0;
    double v = 0.0;
    const char* b = line.data();
    const auto r1 = std::from_chars(b, b + comma, k);
    const auto r2 = std::from_chars(b + comma + 1, b + line.size(), v);
    require(r1.ec == std::errc() && r2.ec == std::errc() && r2.ptr == b + line.size(),
            ErrorCode::io, "bad coefficient row: " + line);
    require(k == out.size(), ErrorCode::io, "coefficient rows must be k = 0, 1, 2, ...");
    out.push_back(v);
  }
  return out;
}

}  // namespace rootflow
