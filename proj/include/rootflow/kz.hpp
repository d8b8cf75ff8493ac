#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rootflow/measure.hpp"

namespace rootflow {

/// Samples of a real function on an increasing grid. +infinity marks points
/// outside the effective domain.
struct GridFunction {
  std::vector<double> x;
  std::vector<double> y;
};

/// Discrete convex conjugate g(s) = sup_i (s x_i - y_i) at every s in `dual`,
/// via a lower-hull sweep (O(n + m log m)). Throws when no y_i is finite.
GridFunction legendre_fenchel(const GridFunction& f, std::span<const double> dual);

/// Largest convex minorant of f evaluated at f's own nodes.
GridFunction convex_envelope(const GridFunction& f);

/// Analytic profile u(s) with the complement sc = mass - s supplied
/// separately, so terms like log(mass - s) stay accurate near the right end.
using ProfileFn = std::function<double(double s, double sc)>;

/// Exponential growth profile u(t) = -log P(t) of the coefficients
/// P_{k,n} ~ exp(-n u(k/n)), defined on [0, mass] (u = +inf beyond).
/// `exact`, when set, evaluates u analytically anywhere in [0, mass].
struct CoefProfile {
  std::vector<double> t;
  std::vector<double> u;
  double mass = 1.0;
  bool convexified = false;
  ProfileFn exact;

  /// u at s: the analytic form when present, else linear in the samples.
  double operator()(double s) const;
};

/// Logit-clustered nodes on (0, mass), dense near both ends.
std::vector<double> profile_grid(std::size_t n = 32768, double eps = 1e-7,
                                 double mass = 1.0);

/// Profile from an analytic u sampled on `nodes` (default profile_grid()).
CoefProfile profile_from_function(std::function<double(double)> u,
                                  std::vector<double> nodes = {}, double mass = 1.0);
CoefProfile profile_from_tail_function(ProfileFn u, std::vector<double> nodes = {},
                                       double mass = 1.0);

// Closed-form profiles.
CoefProfile kac_profile();                 // u = 0
CoefProfile taylor_profile();              // u = t log t - t
CoefProfile elliptic_profile(double w);    // u = w (t log t + (1-t) log(1-t))
CoefProfile stable_profile(double l);      // limit of stable_poly_coeffs(n, l)

/// Pointwise sum u_a + u_b on a's nodes (coefficient-wise product of the
/// polynomials).
CoefProfile profile_sum(const CoefProfile& a, const CoefProfile& b);

/// Convex envelope of the samples.
CoefProfile convexify(const CoefProfile& profile);

/// Root measure of the profile: Q(x) = exp(u'(x / mass)), with u' taken
/// per cell (left derivative of the convexified samples) and placed at the
/// cell midpoint. The result is renormalised to mass 1. Between those points
/// log Q is interpolated linearly in logit(p), which follows power-law ends
/// far better than linear interpolation in p.
RadialQuantile profile_to_measure(const CoefProfile& profile);

struct ProfileAndCoeffs {
  CoefProfile profile;
  std::vector<double> log_coeffs;  // log P_{k,n}, k = 0..n
};

/// Inverse direction: I(s) = int_{-inf}^s F(e^r) dr by the trapezoid rule on
/// s_j = log Q(p_j) over a logit grid of `nodes` points in [eps, 1-eps];
/// u = conjugate of I; P_{k,n} = exp(-n u(k/n)). Rejects origin atoms.
ProfileAndCoeffs measure_to_profile(const RadialQuantile& measure, std::size_t n,
                                    std::size_t nodes = 32768, double eps = 1e-6);

/// Profile of the ceil(tn)-th derivative:
///   u_t(x) = u(x+t) - (x+t) log(x+t) + x log x - (1-t) log(1-t), x in [0, 1-t].
/// Analytic profiles are resampled exactly; sampled ones reuse their nodes.
CoefProfile derivative_profile(const CoefProfile& profile, double t);

/// log P_{k,n} = (l-1) log(k!/n^k) + l log binom(n,k), k = 0..n.
std::vector<double> stable_poly_coeffs(std::size_t n, double l);

/// Measure with Q(x) = (x/(1-x))^w, the root measure of elliptic_profile(w).
RadialQuantile elliptic_root_measure(double w, std::vector<double> grid = chebyshev_grid());

/// Rescaled limit of the elliptic family with exponent w = 2/alpha - 1:
/// the measure with Q(x) = exp(-d/dx log P_w(x)) = x/(1-x)^w, computed from
/// the profile -log P_w. `d_over_n` (ratios D_n/n, each in (0,1]) only
/// affect the finite-n scaling, not the limit, and are validated.
RadialQuantile elliptic_rescaled_limit(double w, std::span<const double> d_over_n = {});

/// Coefficient profile from log-magnitudes L_k, k = 0..n: u(k/n) = -L_k/n.
CoefProfile profile_from_coeffs(std::span<const double> log_coeffs);

void write_coeff_csv(std::ostream& out, std::span<const double> log_coeffs);
std::vector<double> read_coeff_csv(std::istream& in);

}  // namespace rootflow
