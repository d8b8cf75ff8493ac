#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rootflow/errors.hpp"
#include "rootflow/report.hpp"
#include "rootflow/verify.hpp"

using namespace rootflow;

TEST_CASE("metric pass is derived from value and tolerance") {
  CHECK(MetricRow{"a", 0.05, 0.05}.pass());
  CHECK_FALSE(MetricRow{"a", 0.05, 0.05, Bound::below}.pass());
  CHECK(MetricRow{"a", -1e-3, 0.0, Bound::below}.pass());
  CHECK_FALSE(MetricRow{"a", std::nan(""), 1.0}.pass());

  ExperimentReport r;
  CHECK_FALSE(r.passed());  // nothing asserted
  r.metric("x", 1e-12, 1e-9);
  CHECK(r.passed());
  r.metric("y", 2.0, 1.0);
  CHECK_FALSE(r.passed());
  r.metrics.pop_back();
  r.error = "domain";
  CHECK_FALSE(r.passed());
}

TEST_CASE("experiment CSV round trip") {
  ExperimentReport a;
  a.id = "demo";
  a.param("family", "stable:alpha=1,theta=1");
  a.param("t", 0.25);
  a.seed = 42;
  a.metric("residual", 1.2345678901234567e-11, 1e-9);
  a.metric("drop", -0.5, 0.0, Bound::below);
  a.diagnostic("note", 3.0);
  a.seconds = 1.5;
  ExperimentReport b;
  b.id = "broken";
  b.error = "nonconvergence";
  b.error_message = "3 roots, \"stuck\"";
  const std::vector<ExperimentReport> reports{a, b};

  std::ostringstream out;
  write_experiment_csv(out, reports, true);
  std::istringstream in(out.str());
  const auto back = read_experiment_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "demo");
  CHECK(back[0].params == a.params);
  CHECK(back[0].seed == 42);
  REQUIRE(back[0].metrics.size() == 2);
  CHECK(back[0].metrics[0].value == a.metrics[0].value);
  CHECK(back[0].metrics[1].bound == Bound::below);
  CHECK(back[0].diagnostics == a.diagnostics);
  CHECK(back[0].seconds == 1.5);
  CHECK(back[0].passed());
  CHECK(back[1].error == "nonconvergence");
  CHECK(back[1].error_message == b.error_message);
  CHECK_FALSE(back[1].passed());

  // Without timing the output does not depend on the clock.
  std::ostringstream plain;
  write_experiment_csv(plain, reports);
  CHECK(plain.str().find(",seconds,") == std::string::npos);

  std::istringstream bad("experiment,kind,name,value,bound,tolerance,pass\ndemo,metric,x,abc,<=,1,pass\n");
  CHECK_THROWS_AS(read_experiment_csv(bad), Error);
}

TEST_CASE("verify suites") {
  CHECK(Verifier::suite_criteria("all").size() == 11);
  CHECK(Verifier::suite_criteria("closed-form") == std::vector<int>{2, 3, 4, 5, 6});
  CHECK_THROWS_AS(Verifier::suite_criteria("nope"), Error);
  CHECK(Verifier::criterion_id(9) == "9-monte-carlo");
  CHECK_THROWS_AS(Verifier::criterion_id(12), Error);

  Verifier v({1024, 7, 1});
  for (const auto& r : v.run_suite("closed-form")) {
    CAPTURE(r.id);
    CHECK(r.passed());
  }
}
