#include "rootflow/verify.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/freeops.hpp"
#include "rootflow/kz.hpp"
#include "rootflow/measure.hpp"
#include "rootflow/pde.hpp"

namespace rootflow {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string label(double v) { return format_double(v); }

struct Context {
  std::vector<double> grid;
  RadialQuantile make(const FamilyTag& tag) const { return catalog::make(tag, grid); }
};

void bridge(ExperimentReport& r, const Context& c) {
  double slowest = 0.0;
  for (const auto& tag : {FamilyTag::unit_circle(), FamilyTag::taylor_disk(),
                          FamilyTag::stable(1.0, 1.0), FamilyTag::elliptic_limit(0.5)}) {
    for (double t : {0.25, 0.5, 0.75}) {
      const auto start = Clock::now();
      const double res = bridge_residual(c.make(tag), t, c.grid);
      slowest = std::max(slowest, since(start));
      r.metric("bridge." + tag.to_string() + ".t=" + label(t), res, 1e-9);
    }
  }
  r.metric("max_case_seconds", slowest, 1.0, Bound::below);
}

void kac_closed_form(ExperimentReport& r, const Context& c) {
  const auto circle = c.make(FamilyTag::unit_circle());
  for (double t : {0.25, 0.5, 0.75}) {
    const auto f = flow(circle, t);
    const auto kac = c.make(FamilyTag::kac_derivative(t));
    r.metric("flow_vs_kac.t=" + label(t), quantile_distance(f, kac, c.grid), 1e-12);
    // The flow's quantiles must also sit on the closed-form CDF.
    double cdf_err = 0.0;
    for (double p : c.grid) {
      cdf_err = std::max(cdf_err, std::abs(catalog::family_cdf(FamilyTag::kac_derivative(t),
                                                               f.quantile(p)) - p));
    }
    r.metric("kac_cdf_at_flow_quantiles.t=" + label(t), cdf_err, 1e-12);
  }
}

void haar_sums(ExperimentReport& r, const Context& c) {
  const auto circle = c.make(FamilyTag::unit_circle());
  for (double k : {2.0, 3.0, 6.0}) {
    const auto sum = oplus_power(circle, k);
    r.metric("oplus_vs_closed_form.k=" + label(k),
             quantile_distance(sum, c.make(FamilyTag::haar_sum(k)), c.grid), 1e-9);
    double cdf_err = 0.0;
    for (double p : c.grid) {
      cdf_err = std::max(cdf_err,
                         std::abs(catalog::family_cdf(FamilyTag::haar_sum(k), sum.quantile(p)) - p));
    }
    r.metric("closed_form_cdf_at_quantiles.k=" + label(k), cdf_err, 1e-9);
  }
  r.metric("semigroup.2x3", semigroup_residual(circle, 2.0, 3.0, c.grid), 1e-9);
  r.metric("semigroup.3x2", semigroup_residual(circle, 3.0, 2.0, c.grid), 1e-9);
}

void compressed_unitary(ExperimentReport& r, const Context& c) {
  const auto circle = c.make(FamilyTag::unit_circle());
  for (double lambda : {0.25, 0.5}) {
    const auto target = c.make(FamilyTag::compressed_unitary(lambda));
    // Root side: undo sq on the derivative measure.
    const auto from_flow = sq_inv(flow(circle, 1.0 - lambda));
    r.metric("sq_inv_flow.lambda=" + label(lambda), quantile_distance(from_flow, target, c.grid),
             1e-9);
    // Brown side: the free power of the Haar unitary, with radii scaled by
    // lambda (lambda^2 before taking square roots).
    const auto from_power = dilate(oplus_power(sq_inv(circle), 1.0 / lambda), lambda);
    r.metric("scaled_free_power.lambda=" + label(lambda),
             quantile_distance(from_power, target, c.grid), 1e-9);
  }
}

void commutator_check(ExperimentReport& r, const Context& c) {
  const auto circ = c.make(FamilyTag::circular_brown());
  const auto comm = commutator(circ, circ);
  double err = 0.0;
  const int n = 2000;
  for (int i = 1; i < n; ++i) {
    const double radius = std::sqrt(2.0) * i / n;
    const double exact = (-1.0 + std::sqrt(1.0 + 4.0 * radius * radius)) / 2.0;
    err = std::max(err, std::abs(comm.cdf(radius) - exact));
  }
  r.metric("cdf_sup_error", err, 1e-9);
  r.metric("quantile_vs_catalog",
           quantile_distance(comm, c.make(FamilyTag::commutator_circulars()), c.grid), 1e-9);
}

void stability(ExperimentReport& r, const Context& c) {
  for (double alpha : {0.5, 1.0, 4.0 / 3.0, 2.0}) {
    const auto s = stable_quantile(alpha, 1.0).on_grid(c.grid);
    for (double m : {2.0, 3.0}) {
      r.metric("oplus_dilation.alpha=" + label(alpha) + ".m=" + label(m),
               quantile_distance(oplus_power(s, m), dilate(s, std::pow(m, 1.0 / alpha)), c.grid),
               1e-9);
    }
    for (double t : {0.3, 0.9}) {
      r.metric("flow_invariance.alpha=" + label(alpha) + ".t=" + label(t),
               stable_flow_residual(alpha, 1.0, t, c.grid), 1e-10);
    }
  }
}

void clt(ExperimentReport& r, const Context& c) {
  struct Input {
    std::string name;
    RadialQuantile measure;
    double alpha;
  };
  const std::vector<Input> inputs{{"pareto_alpha=1", catalog::pareto_tail(1.0, c.grid), 1.0},
                                  {"unit-circle", c.make(FamilyTag::unit_circle()), 2.0}};
  for (const auto& in : inputs) {
    FlowParams params;
    params.alpha = in.alpha;
    std::vector<double> errs;
    for (double t : {0.9, 0.99, 0.999}) {
      errs.push_back(clt_error(in.measure, params, t, c.grid));
      r.diagnostic("clt_error." + in.name + ".t=" + label(t), errs.back());
    }
    r.metric("clt_error." + in.name + ".t=0.99", errs[1], 0.02);
    r.metric("largest_step_change." + in.name, std::max(errs[1] - errs[0], errs[2] - errs[1]),
             0.0, Bound::below);
  }
}

void legendre_fenchel(ExperimentReport& r, const Context& c) {
  for (const auto& tag :
       {FamilyTag::unit_circle(), FamilyTag::taylor_disk(), FamilyTag::circular_brown(),
        FamilyTag::haar_sum(2), FamilyTag::compressed_unitary(0.5),
        FamilyTag::kac_derivative(0.5), FamilyTag::stable(1.0),
        FamilyTag::commutator_circulars(), FamilyTag::elliptic_limit(0.5)}) {
    const auto m = c.make(tag);
    const auto back = profile_to_measure(measure_to_profile(m, 100).profile);
    r.metric("measure_round_trip." + tag.to_string(), quantile_distance(back, m, c.grid), 1e-6);
  }

  struct Case {
    std::string name;
    CoefProfile profile;
    RadialQuantile measure;
  };
  const std::vector<Case> cases{
      {"kac", kac_profile(), c.make(FamilyTag::unit_circle())},
      {"taylor", taylor_profile(), c.make(FamilyTag::taylor_disk())},
      {"elliptic:0.5", elliptic_profile(0.5), elliptic_root_measure(0.5, c.grid)}};
  for (const auto& k : cases) {
    r.metric("profile_to_measure." + k.name,
             quantile_distance(profile_to_measure(k.profile), k.measure, c.grid), 1e-6);
    for (double t : {0.25, 0.5, 0.75}) {
      const auto route = profile_to_measure(derivative_profile(k.profile, t));
      r.metric("derivative_vs_flow." + k.name + ".t=" + label(t),
               quantile_distance(route, flow(k.measure, t), c.grid), 1e-6);
    }
  }

  for (double w : {0.0, 0.5, 1.0, 3.0}) {
    // Q(x) = x / (1-x)^w written out directly.
    const auto exact = RadialQuantile::from_tail_function(
        [w](double p, double pc) { return p / std::pow(pc, w); }, 0.0, c.grid, true);
    r.metric("elliptic_rescaled_limit.w=" + label(w),
             quantile_distance(elliptic_rescaled_limit(w), exact, c.grid), 1e-6);
  }
}

void pde_checks(ExperimentReport& r) {
  {
    const auto s0 = make_state([](double x) { return x / (1.0 + x); },
                               stretched_nodes(2000, 1.0, 1e6));
    std::vector<PdeState> traj;
    integrate(s0, 0.5, PdeForm::cdf, {1e-4, 250}, &traj);
    double err = 0.0;
    for (const auto& s : traj) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        err = std::max(err, std::abs(s.phi[i] - s.x[i] / (1.0 + s.x[i])));
      }
    }
    r.metric("stationary_drift", err, 1e-3);
  }
  {
    const auto taylor = catalog::make(FamilyTag::taylor_disk());
    const auto s = integrate(make_state(taylor, uniform_nodes(2000, 1.0)), 0.5, PdeForm::cdf,
                             {1e-4});
    const auto oracle = flow(taylor, 0.5);
    double err = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      err = std::max(err, std::abs(s.phi[i] - oracle.cdf(s.x[i])));
    }
    r.metric("taylor_vs_flow.t=0.5", err, 1e-2);
    r.diagnostic("taylor.max_projection", s.max_projection);
  }
  {
    const auto m = density_mass_check([](double x) { return x <= 1.0 ? 1.0 : 0.0; }, 1.0, 0.5,
                                      2000, 1e-4, 11);
    double psi = 0.0, phi = 0.0;
    for (std::size_t k = 0; k < m.t.size(); ++k) {
      psi = std::max(psi, std::abs(m.psi_mass[k] - (1.0 - m.t[k])));
      phi = std::max(phi, std::abs(m.phi_mass[k] - 1.0));
    }
    r.metric("psi_mass_vs_1-t", psi, 1e-2);
    r.metric("phi_mass_vs_1", phi, 1e-2);
  }
  {
    const auto x = uniform_nodes(2000, 1.0);
    r.metric("ode_residual.identity", ode_residual(x, x), 1e-10);
  }
}

void root_finder(ExperimentReport& r, const std::vector<DerivativeReport>& mc) {
  {
    std::vector<std::complex<double>> a(65, 0.0);
    a[0] = -1.0;
    a[64] = 1.0;
    const auto roots = aberth_roots(LogCoeffPoly::from_coefficients(a)).roots;
    double res = 0.0;
    for (const auto& z : roots) res = std::max(res, std::abs(std::pow(z, 64) - 1.0));
    r.metric("z^64-1.root_count_missing", 64.0 - static_cast<double>(roots.size()), 0.0);
    r.metric("z^64-1.residual", res, 1e-10);
  }
  struct Fixed {
    std::string name;
    std::vector<std::complex<double>> roots;
  };
  using namespace std::complex_literals;
  const std::vector<Fixed> fixed{{"(z-2)(z-3)(z+1)", {2.0, 3.0, -1.0}},
                                 {"z^2+1", {1i, -1i}},
                                 {"(z-0.5)(z+2i)(z-1-i)", {0.5, -2i, 1.0 + 1i}}};
  for (const auto& f : fixed) {
    // Expand prod (z - r).
    std::vector<std::complex<double>> a{1.0};
    for (const auto& root : f.roots) {
      std::vector<std::complex<double>> next(a.size() + 1, 0.0);
      for (std::size_t k = 0; k < a.size(); ++k) {
        next[k + 1] += a[k];
        next[k] -= root * a[k];
      }
      a = std::move(next);
    }
    const auto found = aberth_roots(LogCoeffPoly::from_coefficients(a)).roots;
    double err = found.size() == f.roots.size() ? 0.0 : INFINITY;
    for (const auto& want : f.roots) {
      double best = INFINITY;
      for (const auto& z : found) best = std::min(best, std::abs(z - want));
      err = std::max(err, best);
    }
    r.metric(f.name + ".error", err, 1e-10);
  }
  double violations = 0.0, trials = 0.0;
  for (const auto& rep : mc) {
    violations += static_cast<double>(rep.gauss_lucas_violations);
    trials += static_cast<double>(rep.trials.size());
  }
  r.diagnostic("monte_carlo_trials", trials);
  r.metric("gauss_lucas_violations", violations, 0.0);
}

}  // namespace

Verifier::Verifier(VerifyOptions options) : options_(options) {}

std::string Verifier::criterion_id(int number) {
  static const char* names[] = {"bridge",          "kac-closed-form", "haar-sums",
                                "compressed-unitary", "commutator",   "stability",
                                "clt",             "legendre-fenchel", "monte-carlo",
                                "pde",             "root-finder"};
  require(number >= 1 && number <= kCriteria, ErrorCode::config,
          "criterion number must be in 1.." + std::to_string(kCriteria));
  return std::to_string(number) + "-" + names[number - 1];
}

std::vector<std::string> Verifier::suite_names() {
  return {"all", "closed-form", "bridge", "clt", "kz", "montecarlo", "pde", "rootfinder"};
}

std::vector<int> Verifier::suite_criteria(std::string_view suite) {
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  if (suite == "closed-form") return {2, 3, 4, 5, 6};
  if (suite == "bridge") return {1};
  if (suite == "clt") return {7};
  if (suite == "kz") return {8};
  if (suite == "montecarlo") return {9};
  if (suite == "pde") return {10};
  if (suite == "rootfinder") return {11};
  fail(ErrorCode::config, "unknown suite '" + std::string(suite) + "'");
}

const std::vector<DerivativeReport>& Verifier::monte_carlo() {
  if (!mc_) {
    std::vector<DerivativeReport> out;
    for (const auto& [profile, n] : {std::pair{"kac", 800}, {"taylor", 800}, {"stable:1", 600}}) {
      ExperimentConfig cfg;
      cfg.profile = PolyProfile::parse(profile);
      cfg.n = n;
      cfg.t = 0.5;
      cfg.trials = 20;
      cfg.seed = options_.seed;
      cfg.threads = options_.threads;
      out.push_back(derivative_experiment(cfg));
    }
    mc_ = std::move(out);
  }
  return *mc_;
}

ExperimentReport Verifier::criterion(int number) {
  ExperimentReport r;
  r.id = criterion_id(number);
  const auto start = Clock::now();
  try {
    Context c{chebyshev_grid(options_.grid)};
    if (number != 9 && number != 10 && number != 11) r.param("grid", std::to_string(options_.grid));
    switch (number) {
      case 1: bridge(r, c); break;
      case 2: kac_closed_form(r, c); break;
      case 3: haar_sums(r, c); break;
      case 4: compressed_unitary(r, c); break;
      case 5: commutator_check(r, c); break;
      case 6: stability(r, c); break;
      case 7: clt(r, c); break;
      case 8: legendre_fenchel(r, c); break;
      case 9: {
        r.seed = options_.seed;
        r.param("t", 0.5);
        r.param("trials", "20");
        const auto& mc = monte_carlo();
        double total = 0.0;
        for (const auto& rep : mc) {
          const std::string name = rep.config.profile.to_string();
          const double tol = rep.config.profile.kind == PolyProfile::Kind::kac ? 0.05 : 0.06;
          r.param("n." + name, std::to_string(rep.config.n));
          r.metric("mean_ks_flow." + name, rep.mean_ks_flow, tol);
          r.metric("mean_ks_bridge." + name, rep.mean_ks_bridge, tol);
          r.diagnostic("max_ks_flow." + name, rep.max_ks_flow);
          r.diagnostic("max_ks_bridge." + name, rep.max_ks_bridge);
          total += rep.seconds;
        }
        r.metric("total_seconds", total, 300.0);
        break;
      }
      case 10: pde_checks(r); break;
      case 11:
        r.seed = options_.seed;
        root_finder(r, monte_carlo());
        break;
    }
  } catch (const Error& e) {
    r.error = std::string(code_name(e.code()));
    r.error_message = e.what();
  } catch (const std::exception& e) {
    r.error = "internal";
    r.error_message = e.what();
  }
  r.seconds = since(start);
  return r;
}

std::vector<ExperimentReport> Verifier::run_suite(std::string_view suite) {
  std::vector<ExperimentReport> out;
  for (int n : suite_criteria(suite)) out.push_back(criterion(n));
  return out;
}

}  // namespace rootflow
