#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/freeops.hpp"

using namespace rootflow;

namespace {
const std::vector<double> kGrid = chebyshev_grid(4096);
RadialQuantile make(const FamilyTag& tag) { return catalog::make(tag, kGrid); }

const std::vector<FamilyTag> kFamilies{
    FamilyTag::unit_circle(),        FamilyTag::taylor_disk(),
    FamilyTag::circular_brown(),     FamilyTag::haar_sum(2),
    FamilyTag::compressed_unitary(0.5), FamilyTag::kac_derivative(0.3),
    FamilyTag::stable(1.0),          FamilyTag::commutator_circulars(),
    FamilyTag::elliptic_limit(0.5)};
}  // namespace

TEST_CASE("flow closed forms") {
  const auto taylor = make(FamilyTag::taylor_disk());
  const auto f = flow(taylor, 0.5);
  for (double p : kGrid) CHECK(f.quantile(p) == doctest::Approx(0.5 * p).epsilon(1e-14));

  const auto circle = make(FamilyTag::unit_circle());
  for (double t : {0.25, 0.5, 0.75}) {
    const auto k = flow(circle, t);
    for (double p : oracle::uniform_probs(50)) {
      const double ref = oracle::invert_cdf(
          [t](double r) { return oracle::kac_derivative_cdf(t, r); }, p, 1.0 - t);
      CHECK(k.quantile(p) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(quantile_distance(k, make(FamilyTag::kac_derivative(t)), kGrid) <= 1e-12);
  }
  CHECK(quantile_distance(flow(circle, 0.0), circle, kGrid) == 0.0);
  CHECK_THROWS_AS(flow(circle, 1.0), Error);
  CHECK_THROWS_AS(flow(circle, -0.1), Error);
  const auto atomic = RadialQuantile::from_function([](double p) { return p; }, 0.2,
                                                    kGrid, true);
  CHECK_THROWS_AS(flow(atomic, 0.5), Error);
}

TEST_CASE("flow invariants: shrinkage and collapse at the origin") {
  for (const auto& tag : kFamilies) {
    const auto m = make(tag);
    for (double t : {0.1, 0.5, 0.9}) {
      const auto f = flow(m, t);
      CHECK(f.atom0() == 0.0);
      CHECK(f.quantile(1e-12) < 1e-9 * std::max(1.0, m.quantile(t)));
      for (double x : oracle::uniform_probs(20)) {
        CHECK(f.quantile(x) <= m.quantile((1 - t) * x + t) * (1 + 1e-15));
      }
    }
  }
}

TEST_CASE("flow composition") {
  const auto circle = make(FamilyTag::unit_circle());
  const auto twice = flow(flow(circle, 0.5), 0.5);
  CHECK(twice.quantile(0.5) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(flow_compose_residual(circle, 0.0, 0.3, kGrid) == 0.0);
  for (const auto& tag : kFamilies) {
    for (double s : {0.1, 0.3, 0.5, 0.7}) {
      for (double t : {0.1, 0.3, 0.5, 0.7}) {
        CHECK(flow_compose_residual(make(tag), s, t, kGrid) <= 1e-9);
      }
    }
  }
}

TEST_CASE("bridge") {
  for (const auto& tag : kFamilies) {
    for (double t : {0.25, 0.5, 0.75}) {
      CHECK(bridge_residual(make(tag), t, kGrid) <= 1e-9);
    }
  }
  // Scaled Kac derivative through the compressed-unitary route.
  const auto route = bridge_route(make(FamilyTag::unit_circle()), 0.5);
  CHECK(quantile_distance(route, make(FamilyTag::kac_derivative(0.5)), kGrid) <= 1e-12);
  CHECK_THROWS_AS(bridge_residual(make(FamilyTag::unit_circle()), 0.0, kGrid), Error);
}

TEST_CASE("stable flow invariance") {
  for (double t : {0.1, 0.5, 0.9}) CHECK(stable_flow_residual(2, 1, t, kGrid) == 0.0);
  CHECK(stable_flow_residual(1, 1, 0.5, kGrid) <= 1e-10);
  CHECK(stable_flow_residual(0.5, 2, 0.9, kGrid) <= 1e-10);
  for (double a : {0.5, 1.0, 4.0 / 3.0, 2.0}) {
    for (double t : {0.3, 0.9}) CHECK(stable_flow_residual(a, 1, t, kGrid) <= 1e-10);
  }
}

TEST_CASE("clt error") {
  FlowParams two;
  two.alpha = 2.0;
  const auto circle = make(FamilyTag::unit_circle());
  // Exact error x(1-x)(1-t)/(x(1-t)+t), maximised over [0.05, 0.95].
  for (double t : {0.9, 0.99, 0.999}) {
    double expected = 0;
    for (double x : kGrid) {
      if (x < 0.05 || x > 0.95) continue;
      expected = std::max(expected, x * (1 - x) * (1 - t) / (x * (1 - t) + t));
    }
    CHECK(clt_error(circle, two, t, kGrid) == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(clt_error(circle, two, 0.999, kGrid) <= 2e-3);
  CHECK(clt_error(make(FamilyTag::taylor_disk()), two, 0.7, kGrid) <= 1e-15);

  FlowParams one;
  one.alpha = 1.0;
  const auto pareto = catalog::pareto_tail(1.0, kGrid);
  double prev = INFINITY;
  for (double t : {0.9, 0.99, 0.999}) {
    const double e = clt_error(pareto, one, t, kGrid);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(clt_error(pareto, one, 0.99, kGrid) <= 0.02);
  CHECK_THROWS_AS(clt_error(circle, FlowParams{}, 0.5, kGrid), Error);
}

TEST_CASE("rescale modes") {
  const auto circle = make(FamilyTag::unit_circle());
  FlowParams gl;
  gl.t = 0.75;
  gl.rescale_mode = RescaleMode::gauss_lucas;
  const auto f = flow(circle, gl);
  CHECK(f.quantile(0.5) == doctest::Approx(flow(circle, 0.75).quantile(0.5) * 4.0));
  FlowParams st;
  st.t = 0.5;
  st.rescale_mode = RescaleMode::stable;
  CHECK_THROWS_AS(flow(circle, st), Error);
  st.alpha = 1.0;
  st.g = [](double) { return 2.0; };
  CHECK(st.rescale_factor() == doctest::Approx(0.5));
  CHECK(parse_rescale_mode("gauss_lucas") == RescaleMode::gauss_lucas);
  CHECK_THROWS_AS(parse_rescale_mode("bogus"), Error);
}

TEST_CASE("tail fit") {
  CHECK(tail_fit(make(FamilyTag::stable(1, 1))).alpha == doctest::Approx(1.0).epsilon(0.02));
  CHECK(tail_fit(make(FamilyTag::stable(0.5, 1))).alpha ==
        doctest::Approx(0.5).epsilon(0.04));
  CHECK(tail_fit(make(FamilyTag::taylor_disk())).alpha == doctest::Approx(2.0));
  const auto fit = tail_fit(catalog::pareto_tail(1.0, kGrid));
  for (double g : fit.g) CHECK(g == doctest::Approx(1.0).epsilon(1e-6));
  const auto coarse =
      RadialQuantile::from_table({0.1, 0.5, 0.9}, {1, 2, 3});
  CHECK_THROWS_AS(tail_fit(coarse), Error);
}
