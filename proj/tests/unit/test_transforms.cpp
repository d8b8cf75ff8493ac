#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rootflow/catalog.hpp"
#include "rootflow/errors.hpp"
#include "rootflow/transforms.hpp"

using namespace rootflow;

TEST_CASE("s_from_quantile closed forms") {
  const auto circ = s_from_quantile(catalog::make(FamilyTag::circular_brown()));
  const auto unit = s_from_quantile(catalog::make(FamilyTag::unit_circle()));
  const auto haar = s_from_quantile(catalog::make(FamilyTag::haar_sum(2)));
  for (double z = -0.95; z < 0; z += 0.05) {
    CHECK(circ(z) == doctest::Approx(1.0 / (1.0 + z)).epsilon(1e-14));
    CHECK(unit(z) == 1.0);
    for (double k : {2.0, 3.0, 5.0}) {
      const auto s = s_from_quantile(catalog::make(FamilyTag::haar_sum(k)));
      CHECK(s(z) == doctest::Approx((z + k) / (k * k * (z + 1.0))).epsilon(1e-13));
    }
  }
  CHECK(haar(-0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(circ(0.0), Error);
  CHECK_THROWS_AS(circ(-1.0), Error);
}

TEST_CASE("s_from_quantile is strictly decreasing for increasing quantiles") {
  const auto s = s_from_quantile(catalog::make(FamilyTag::commutator_circulars()));
  double prev = INFINITY;
  for (double z = -0.99; z < 0; z += 0.01) {
    CHECK(s(z) < prev);
    prev = s(z);
  }
}

TEST_CASE("quantile_from_s") {
  const auto grid = chebyshev_grid(512);
  const auto circ = quantile_from_s(STransform::user([](double z) { return 1.0 / (1.0 + z); }),
                                    grid);
  // z = p - 1 is rounded, so the agreement is absolute rather than relative.
  for (double p : grid) CHECK(std::abs(circ.quantile(p) - std::sqrt(p)) <= 1e-13);
  const auto one = quantile_from_s(STransform::user([](double) { return 1.0; }), grid);
  for (double p : grid) CHECK(one.quantile(p) == 1.0);

  // Commutator of two circulars written as a product of S-transforms.
  const auto comm = quantile_from_s(STransform::user([](double z) {
                                      const double half = 1.0 / (1.0 + z / 2.0);
                                      return (2.0 + z) / (4.0 * (1.0 + z)) * half * half;
                                    }),
                                    grid);
  CHECK(quantile_distance(comm, catalog::make(FamilyTag::commutator_circulars(), grid),
                          grid) <= 1e-12);

  CHECK_THROWS_AS(
      quantile_from_s(STransform::user([](double) { return -1.0; }), grid), Error);
}

TEST_CASE("round trip through the S-transform") {
  const auto grid = chebyshev_grid(512);
  for (const auto& tag : {FamilyTag::haar_sum(3), FamilyTag::compressed_unitary(0.4),
                          FamilyTag::kac_derivative(0.5), FamilyTag::stable(1.0)}) {
    const auto m = catalog::make(tag, grid);
    const auto back = quantile_from_s(s_from_quantile(m), grid);
    CHECK(quantile_distance(back, m, grid) <= 1e-12);
  }
}

TEST_CASE("atoms make the S-transform singular at -1 + atom0") {
  const auto m = RadialQuantile::from_function([](double p) { return p; }, 0.25,
                                               chebyshev_grid(64), true);
  const auto s = s_from_quantile(m);
  CHECK(s.left() == -0.75);
  CHECK_THROWS_AS(s(-0.8), Error);
  CHECK(s(-0.75 + 1e-9) > 1.0);
}

TEST_CASE("support endpoints") {
  const auto u = support_endpoints(catalog::make(FamilyTag::unit_circle()));
  CHECK(u.inner == 1.0);
  CHECK(u.outer == 1.0);
  const auto h = support_endpoints(catalog::make(FamilyTag::haar_sum(2)));
  CHECK(h.inner == doctest::Approx(0.0));
  CHECK(h.outer == doctest::Approx(std::sqrt(2.0)));
  const auto c = support_endpoints(catalog::make(FamilyTag::compressed_unitary(0.25)));
  CHECK(c.inner == doctest::Approx(0.0));
  CHECK(c.outer == doctest::Approx(0.5));
  const auto t = support_endpoints(RadialQuantile::from_table({0.2, 0.5, 0.9}, {0, 1, 2}, 0.2));
  CHECK(t.inner == 1.0);
  CHECK(t.outer == 2.0);
}
