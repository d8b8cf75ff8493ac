#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rootflow/catalog.hpp"
#include "rootflow/errors.hpp"

using namespace rootflow;

TEST_CASE("family quantiles invert the closed-form CDFs (bisection oracle)") {
  for (double p : oracle::uniform_probs(50)) {
    for (double k : {2.0, 3.0, 6.0, 2.5}) {
      const double ref = oracle::invert_cdf(
          [k](double r) { return oracle::haar_sum_cdf(k, r); }, p, std::sqrt(k));
      CHECK(catalog::family_quantile(FamilyTag::haar_sum(k), p) ==
            doctest::Approx(ref).epsilon(1e-12));
    }
    for (double l : {0.25, 0.5, 0.8}) {
      const double ref = oracle::invert_cdf(
          [l](double r) { return oracle::compressed_unitary_cdf(l, r); }, p,
          std::sqrt(l));
      CHECK(catalog::family_quantile(FamilyTag::compressed_unitary(l), p) ==
            doctest::Approx(ref).epsilon(1e-12));
    }
    for (double t : {0.25, 0.5, 0.75}) {
      const double ref = oracle::invert_cdf(
          [t](double r) { return oracle::kac_derivative_cdf(t, r); }, p, 1.0 - t);
      CHECK(catalog::family_quantile(FamilyTag::kac_derivative(t), p) ==
            doctest::Approx(ref).epsilon(1e-12));
    }
    const double ref = oracle::invert_cdf(oracle::commutator_circulars_cdf, p,
                                          std::sqrt(2.0));
    CHECK(catalog::family_quantile(FamilyTag::commutator_circulars(), p) ==
          doctest::Approx(ref).epsilon(1e-12));
    const double circ = oracle::invert_cdf([](double r) { return std::min(1.0, r * r); },
                                           p, 1.0);
    CHECK(catalog::family_quantile(FamilyTag::circular_brown(), p) ==
          doctest::Approx(circ).epsilon(1e-12));
  }
}

TEST_CASE("worked examples") {
  CHECK(catalog::family_quantile(FamilyTag::haar_sum(2), 1.0 / 3.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(catalog::family_quantile(FamilyTag::kac_derivative(0.5), 0.5) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto grid = chebyshev_grid(200);
  CHECK(quantile_distance(catalog::make(FamilyTag::stable(2, 1), grid),
                          catalog::make(FamilyTag::taylor_disk(), grid), grid) == 0.0);
  CHECK(catalog::make(FamilyTag::commutator_circulars()).cdf(std::sqrt(2.0)) == 1.0);
  CHECK(catalog::family_cdf(FamilyTag::commutator_circulars(), std::sqrt(2.0)) == 1.0);
}

TEST_CASE("support maxima") {
  const double p = 1.0 - 1e-14;
  CHECK(catalog::family_quantile(FamilyTag::haar_sum(5), p) ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(catalog::family_quantile(FamilyTag::compressed_unitary(0.3), p) ==
        doctest::Approx(std::sqrt(0.3)).epsilon(1e-12));
}

TEST_CASE("closed-form CDF and quantile are adjoint") {
  const std::vector<FamilyTag> tags{
      FamilyTag::taylor_disk(),        FamilyTag::circular_brown(),
      FamilyTag::haar_sum(3),          FamilyTag::compressed_unitary(0.4),
      FamilyTag::kac_derivative(0.3),  FamilyTag::stable(1.0, 2.0),
      FamilyTag::commutator_circulars(), FamilyTag::elliptic_limit(0.5)};
  for (const auto& tag : tags) {
    for (double p : oracle::uniform_probs(20)) {
      const double q = catalog::family_quantile(tag, p);
      CHECK(catalog::family_cdf(tag, q) == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("parameter validation and tag parsing") {
  CHECK_THROWS_AS(catalog::make(FamilyTag::haar_sum(1.0)), Error);
  CHECK_THROWS_AS(catalog::make(FamilyTag::compressed_unitary(1.0)), Error);
  CHECK_THROWS_AS(catalog::make(FamilyTag::kac_derivative(0.0)), Error);
  CHECK_THROWS_AS(catalog::make(FamilyTag::stable(2.5)), Error);
  CHECK_THROWS_AS(catalog::make(FamilyTag::stable(1, 0)), Error);
  CHECK_THROWS_AS(catalog::make(FamilyTag::elliptic_limit(-1)), Error);

  CHECK(FamilyTag::parse("haar-sum", "k=3") == FamilyTag::haar_sum(3));
  CHECK(FamilyTag::parse("haar-sum:3") == FamilyTag::haar_sum(3));
  CHECK(FamilyTag::parse("stable", "1,2") == FamilyTag::stable(1, 2));
  CHECK(FamilyTag::parse("stable:alpha=0.5") == FamilyTag::stable(0.5));
  const auto tag = FamilyTag::compressed_unitary(0.25);
  CHECK(FamilyTag::parse(tag.to_string()) == tag);
  CHECK_THROWS_AS(FamilyTag::parse("nope"), Error);
  CHECK_THROWS_AS(FamilyTag::parse("haar-sum", "lambda=2"), Error);
  CHECK_THROWS_AS(FamilyTag::parse("haar-sum", "k=0.5"), Error);
  CHECK(family_names().size() == 9);
}

TEST_CASE("make attaches the tag and evaluates exactly between nodes") {
  const auto m = catalog::make(FamilyTag::kac_derivative(0.5), chebyshev_grid(8));
  REQUIRE(m.closed_form().has_value());
  CHECK(*m.closed_form() == FamilyTag::kac_derivative(0.5));
  CHECK(m.quantile(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}
