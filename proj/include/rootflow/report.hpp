#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rootflow {

/// How a metric is compared with its tolerance.
enum class Bound {
  at_most,  // value <= tolerance
  below,    // value < tolerance
};

struct MetricRow {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::at_most;

  /// Derived from value and tolerance; NaN never passes.
  bool pass() const;
};

/// Outcome of one experiment: parameters, asserted metrics, diagnostics
/// (reported, not asserted), the seed and the wall-clock time.
struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<MetricRow> metrics;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  /// Error code name when the experiment threw; empty otherwise.
  std::string error;
  std::string error_message;

  void param(std::string key, std::string value);
  void param(std::string key, double value);
  void metric(std::string name, double value, double tolerance, Bound bound = Bound::at_most);
  void diagnostic(std::string name, double value);

  /// No error, at least one metric, and every metric passes.
  bool passed() const;
};

/// Long-format CSV with columns experiment,kind,name,value,bound,tolerance,pass.
/// kind is one of param, metric, diagnostic, seed, seconds, error; seconds
/// rows are written only when `timing` is set.
void write_experiment_csv(std::ostream& out, std::span<const ExperimentReport> reports,
                          bool timing = false);

/// Parses the output of write_experiment_csv.
std::vector<ExperimentReport> read_experiment_csv(std::istream& in);

}  // namespace rootflow
