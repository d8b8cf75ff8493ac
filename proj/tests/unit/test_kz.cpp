#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/kz.hpp"

using namespace rootflow;

namespace {

// O(n m) supremum, the reference for the hull sweep.
std::vector<double> brute_conjugate(const GridFunction& f, const std::vector<double>& s) {
  std::vector<double> out;
  for (double si : s) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      if (std::isfinite(f.y[i])) best = std::max(best, si * f.x[i] - f.y[i]);
    }
    out.push_back(best);
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

const std::vector<double> kGrid = chebyshev_grid(4096);

}  // namespace

TEST_CASE("legendre_fenchel closed forms") {
  const auto t = linspace(0, 1, 1001);
  GridFunction zero{t, std::vector<double>(t.size(), 0.0)};
  const auto s = linspace(-3, 3, 61);
  const auto g = legendre_fenchel(zero, s);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(g.y[i] == doctest::Approx(std::max(s[i], 0.0)));

  // Taylor profile: I(s) = e^s for s <= 0, against a dense brute-force sup.
  const auto fine = linspace(0, 1, 200001);
  GridFunction taylor{fine, {}};
  for (double x : fine) taylor.y.push_back(x > 0 ? x * std::log(x) - x : 0.0);
  const auto sn = linspace(-5, 0, 21);
  const auto gt = legendre_fenchel(taylor, sn);
  const auto bt = brute_conjugate(taylor, sn);
  for (std::size_t i = 0; i < sn.size(); ++i) {
    CHECK(gt.y[i] == doctest::Approx(bt[i]).epsilon(1e-12));
    CHECK(gt.y[i] == doctest::Approx(std::exp(sn[i])).epsilon(1e-8));
  }
  CHECK_THROWS_AS(legendre_fenchel({{0, 1}, {INFINITY, INFINITY}}, s), Error);
}

TEST_CASE("legendre_fenchel matches brute force on random data") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 10; ++rep) {
    GridFunction f{linspace(-1, 2, 1000), {}};
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      f.y.push_back(rep % 2 ? nd(rng) : f.x[i] * f.x[i] + 0.01 * nd(rng));
    }
    f.y[3] = INFINITY;
    std::vector<double> s;
    for (int i = 0; i < 300; ++i) s.push_back(5 * nd(rng));  // unsorted
    const auto g = legendre_fenchel(f, s);
    const auto b = brute_conjugate(f, s);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(g.y[i] == doctest::Approx(b[i]).epsilon(1e-12));

    // Double conjugate is the convex envelope on the nodes; the envelope's
    // secant slopes form a dual grid on which the identity is exact.
    const auto env = convex_envelope(f);
    std::vector<double> slopes;
    std::size_t prev = 0;
    while (!std::isfinite(env.y[prev])) ++prev;
    for (std::size_t i = prev + 1; i < f.x.size(); ++i) {
      if (!std::isfinite(env.y[i])) continue;
      const double slope = (env.y[i] - env.y[prev]) / (f.x[i] - f.x[prev]);
      if (slopes.empty() || slope > slopes.back()) slopes.push_back(slope);
      prev = i;
    }
    const auto conj = legendre_fenchel(f, slopes);
    const auto back = legendre_fenchel(conj, f.x);
    for (std::size_t i = 0; i < f.x.size(); ++i) {
      if (std::isfinite(env.y[i])) CHECK(std::abs(back.y[i] - env.y[i]) <= 1e-8);
      CHECK(back.y[i] <= f.y[i] + 1e-12);
    }
  }
}

TEST_CASE("double conjugate of a convex function returns it") {
  GridFunction f{linspace(0, 1, 1001), {}};
  for (double x : f.x) f.y.push_back(std::exp(x) - 2 * x);
  std::vector<double> slopes;
  // Slopes of f span [-1, e - 2]; the dual grid covers them with the kinks
  // exactly at f's secant slopes.
  for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
    slopes.push_back((f.y[i + 1] - f.y[i]) / (f.x[i + 1] - f.x[i]));
  }
  const auto conj = legendre_fenchel(f, slopes);
  const auto back = legendre_fenchel(conj, f.x);
  for (std::size_t i = 0; i < f.x.size(); ++i) CHECK(std::abs(back.y[i] - f.y[i]) <= 1e-8);
  // Order reversal: a larger function has a smaller conjugate.
  GridFunction g = f;
  for (auto& y : g.y) y += 0.1 * std::sin(y) + 0.2;
  const auto cg = legendre_fenchel(g, slopes);
  for (std::size_t i = 0; i < slopes.size(); ++i) CHECK(cg.y[i] <= conj.y[i]);
}

TEST_CASE("profile_to_measure closed forms") {
  CHECK(quantile_distance(profile_to_measure(kac_profile()),
                          catalog::make(FamilyTag::unit_circle(), kGrid), kGrid) <= 1e-12);
  CHECK(quantile_distance(profile_to_measure(taylor_profile()),
                          catalog::make(FamilyTag::taylor_disk(), kGrid), kGrid) <= 1e-6);
  for (double w : {0.5, 1.0, 2.0}) {
    CHECK(quantile_distance(profile_to_measure(elliptic_profile(w)),
                            elliptic_root_measure(w, kGrid), kGrid) <= 1e-6);
  }
  // Coefficient-wise products multiply quantiles.
  const auto check_product = [](const CoefProfile& a, const CoefProfile& b) {
    const auto lhs = profile_to_measure(profile_sum(a, b));
    const auto qa = profile_to_measure(a);
    const auto qb = profile_to_measure(b);
    const auto prod = RadialQuantile::from_function(
        [qa, qb](double p) { return qa.quantile(p) * qb.quantile(p); }, 0.0, kGrid, false);
    CHECK(quantile_distance(lhs, prod, kGrid) <= 1e-6);
  };
  check_product(kac_profile(), taylor_profile());
  check_product(taylor_profile(), taylor_profile());
  check_product(elliptic_profile(0.5), elliptic_profile(1.5));
}

TEST_CASE("stable profile limit has the stable shape") {
  for (double l : {0.0, 1.0, 2.0, 3.0}) {
    const double alpha = 2.0 / (l + 1.0);
    CHECK(quantile_distance(profile_to_measure(stable_profile(l)),
                            catalog::make(FamilyTag::stable(alpha, 1.0), kGrid), kGrid) <= 1e-4);
  }
  // Stirling oracle: (1/n) log P_{tn, n} approaches -u(t).
  const std::size_t n = 20000;
  const auto coeffs = stable_poly_coeffs(n, 2.0);
  const auto prof = stable_profile(2.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const auto k = static_cast<std::size_t>(t * n);
    CHECK(coeffs[k] / n == doctest::Approx(-prof(t)).epsilon(1e-3));
  }
}

TEST_CASE("stable_poly_coeffs") {
  const auto c = stable_poly_coeffs(4, 2.0);
  CHECK(std::exp(c[2]) == doctest::Approx(4.5).epsilon(1e-13));
  const auto b = stable_poly_coeffs(10, 1.0);
  const double binom[] = {1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1};
  for (int k = 0; k <= 10; ++k) CHECK(std::exp(b[k]) == doctest::Approx(binom[k]).epsilon(1e-12));
  // l = 0: n^k/k! exactly.
  const auto t = stable_poly_coeffs(6, 0.0);
  double fact = 1;
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) fact *= k;
    CHECK(std::exp(t[k]) == doctest::Approx(std::pow(6.0, k) / fact).epsilon(1e-12));
  }
}

TEST_CASE("measure_to_profile") {
  const auto circle = measure_to_profile(catalog::make(FamilyTag::unit_circle(), kGrid), 50);
  for (double x = 0; x <= 1.0; x += 0.05) CHECK(std::abs(circle.profile(x)) <= 1e-12);
  for (double l : circle.log_coeffs) CHECK(std::abs(l) <= 1e-9);

  const auto taylor = measure_to_profile(catalog::make(FamilyTag::taylor_disk(), kGrid), 10);
  for (double x = 0.01; x < 1.0; x += 0.01) {
    CHECK(taylor.profile(x) == doctest::Approx(x * std::log(x) - x).epsilon(1e-6));
  }

  const auto atomic = RadialQuantile::from_function([](double p) { return p; }, 0.2, kGrid, true);
  CHECK_THROWS_AS(measure_to_profile(atomic, 10), Error);
}

TEST_CASE("round trip measure -> profile -> measure") {
  for (const auto& tag :
       {FamilyTag::unit_circle(), FamilyTag::taylor_disk(), FamilyTag::circular_brown(),
        FamilyTag::haar_sum(2), FamilyTag::compressed_unitary(0.5),
        FamilyTag::kac_derivative(0.5), FamilyTag::stable(1.0),
        FamilyTag::commutator_circulars(), FamilyTag::elliptic_limit(0.5)}) {
    const auto m = catalog::make(tag, kGrid);
    const auto back = profile_to_measure(measure_to_profile(m, 100).profile);
    CAPTURE(tag.to_string());
    CHECK(quantile_distance(back, m, kGrid) <= 1e-6);
  }
}

TEST_CASE("derivative profiles agree with the flow") {
  struct Case {
    CoefProfile profile;
    RadialQuantile measure;
  };
  const std::vector<Case> cases{
      {kac_profile(), catalog::make(FamilyTag::unit_circle(), kGrid)},
      {taylor_profile(), catalog::make(FamilyTag::taylor_disk(), kGrid)},
      {elliptic_profile(0.5), elliptic_root_measure(0.5, kGrid)}};
  for (const auto& c : cases) {
    for (double t : {0.25, 0.5, 0.75}) {
      const auto route = profile_to_measure(derivative_profile(c.profile, t));
      CHECK(quantile_distance(route, flow(c.measure, t), kGrid) <= 1e-6);
    }
    CHECK(quantile_distance(profile_to_measure(derivative_profile(c.profile, 0.0)),
                            c.measure, kGrid) <= 1e-6);
  }
  CHECK(quantile_distance(profile_to_measure(derivative_profile(kac_profile(), 0.5)),
                          catalog::make(FamilyTag::kac_derivative(0.5), kGrid), kGrid) <= 1e-6);
  // Sampled profile (no analytic form) still follows the flow.
  const auto sampled = measure_to_profile(catalog::make(FamilyTag::taylor_disk(), kGrid), 10);
  CHECK(quantile_distance(profile_to_measure(derivative_profile(sampled.profile, 0.5)),
                          flow(catalog::make(FamilyTag::taylor_disk(), kGrid), 0.5),
                          chebyshev_grid(512, 1e-3, 1 - 1e-3)) <= 1e-5);
  CHECK_THROWS_AS(derivative_profile(kac_profile(), 1.0), Error);
}

TEST_CASE("elliptic rescaled limit") {
  const std::vector<double> ratios{0.5, 0.1, 0.01};
  for (double w : {0.0, 0.5, 1.0, 3.0}) {
    const auto m = elliptic_rescaled_limit(w, ratios);
    const auto exact = catalog::make(FamilyTag::elliptic_limit(w), kGrid);
    CAPTURE(w);
    CHECK(quantile_distance(m, exact, kGrid) <= 1e-6);
  }
  CHECK(quantile_distance(elliptic_rescaled_limit(1.0),
                          catalog::make(FamilyTag::stable(1.0, 1.0), kGrid), kGrid) <= 1e-6);
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(elliptic_rescaled_limit(1.0, bad), Error);
}

TEST_CASE("coefficient csv") {
  const auto c = stable_poly_coeffs(8, 1.5);
  std::stringstream ss;
  write_coeff_csv(ss, c);
  CHECK(ss.str().rfind("k,log_magnitude\n", 0) == 0);
  const auto back = read_coeff_csv(ss);
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(back[i] == c[i]);
  const auto prof = profile_from_coeffs(back);
  CHECK(prof.t.back() == 1.0);
}
