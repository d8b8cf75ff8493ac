#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rootflow/polylab.hpp"
#include "rootflow/report.hpp"

namespace rootflow {

struct VerifyOptions {
  std::size_t grid = 4096;  // probability nodes for the identity checks
  std::uint64_t seed = 42;  // Monte Carlo master seed
  unsigned threads = 0;     // Monte Carlo trial threads, 0 = hardware
};

/// The acceptance checks, numbered 1..11:
///   1 bridge identity, 2 Kac closed form, 3 Haar sums, 4 compressed unitary,
///   5 commutator of circulars, 6 stability, 7 limit theorem,
///   8 Legendre-Fenchel routes, 9 Monte Carlo, 10 PDE, 11 root finder.
/// Each check returns a report whose pass/fail follows from its metrics; a
/// thrown library error is caught and recorded in the report instead.
class Verifier {
 public:
  static constexpr int kCriteria = 11;

  explicit Verifier(VerifyOptions options = {});

  ExperimentReport criterion(int number);

  /// Short identifier such as "9-monte-carlo".
  static std::string criterion_id(int number);

  /// Suites: all, closed-form (2-6), bridge (1), clt (7), kz (8),
  /// montecarlo (9), pde (10), rootfinder (11).
  static std::vector<std::string> suite_names();
  static std::vector<int> suite_criteria(std::string_view suite);
  std::vector<ExperimentReport> run_suite(std::string_view suite);

 private:
  // Monte Carlo runs shared by criteria 9 and 11.
  const std::vector<DerivativeReport>& monte_carlo();

  VerifyOptions options_;
  std::optional<std::vector<DerivativeReport>> mc_;
};

}  // namespace rootflow
