#include "rootflow/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "rootflow/errors.hpp"
#include "rootflow/measure.hpp"

namespace rootflow {

bool MetricRow::pass() const {
  if (std::isnan(value) || std::isnan(tolerance)) return false;
  return bound == Bound::at_most ? value <= tolerance : value < tolerance;
}

void ExperimentReport::param(std::string key, std::string value) {
  params.emplace_back(std::move(key), std::move(value));
}

void ExperimentReport::param(std::string key, double value) {
  params.emplace_back(std::move(key), format_double(value));
}

void ExperimentReport::metric(std::string name, double value, double tolerance, Bound bound) {
  metrics.push_back({std::move(name), value, tolerance, bound});
}

void ExperimentReport::diagnostic(std::string name, double value) {
  diagnostics.emplace_back(std::move(name), value);
}

bool ExperimentReport::passed() const {
  if (!error.empty() || metrics.empty()) return false;
  for (const auto& m : metrics) {
    if (!m.pass()) return false;
  }
  return true;
}

namespace {

std::string quoted(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string_view bound_text(Bound b) { return b == Bound::at_most ? "<=" : "<"; }

void row(std::ostream& out, const std::string& id, std::string_view kind, const std::string& name,
         const std::string& value, std::string_view bound = {}, const std::string& tol = {},
         std::string_view pass = {}) {
  out << quoted(id) << ',' << kind << ',' << quoted(name) << ',' << quoted(value) << ','
      << bound << ',' << tol << ',' << pass << '\n';
}

// One CSV record; quoted fields may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoting = false, any = false;
  for (char c; in.get(c);) {
    any = true;
    if (quoting) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoting = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoting = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoting) fail(ErrorCode::io, "unterminated quoted CSV field");
  if (any) fields.push_back(std::move(field));
  return any;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::io,
          "bad number in report CSV: '" + s + "'");
  return v;
}

}  // namespace

void write_experiment_csv(std::ostream& out, std::span<const ExperimentReport> reports,
                          bool timing) {
  out << "experiment,kind,name,value,bound,tolerance,pass\n";
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.params) row(out, r.id, "param", k, v);
    row(out, r.id, "seed", "seed", std::to_string(r.seed));
    for (const auto& m : r.metrics) {
      row(out, r.id, "metric", m.name, format_double(m.value), bound_text(m.bound),
          format_double(m.tolerance), m.pass() ? "pass" : "fail");
    }
    for (const auto& [k, v] : r.diagnostics) row(out, r.id, "diagnostic", k, format_double(v));
    if (!r.error.empty()) row(out, r.id, "error", r.error, r.error_message, {}, {}, "fail");
    if (timing) row(out, r.id, "seconds", "seconds", format_double(r.seconds));
  }
}

std::vector<ExperimentReport> read_experiment_csv(std::istream& in) {
  std::vector<std::string> f;
  require(read_record(in, f) && f.size() == 7 && f[0] == "experiment", ErrorCode::io,
          "missing report CSV header");
  std::vector<ExperimentReport> out;
  while (read_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    require(f.size() == 7, ErrorCode::io, "report CSV rows need 7 fields");
    if (out.empty() || out.back().id != f[0]) {
      out.emplace_back();
      out.back().id = f[0];
    }
    auto& r = out.back();
    const std::string& kind = f[1];
    if (kind == "param") {
      r.param(f[2], f[3]);
    } else if (kind == "seed") {
      r.seed = std::stoull(f[3]);
    } else if (kind == "metric") {
      require(f[4] == "<=" || f[4] == "<", ErrorCode::io, "bad bound '" + f[4] + "'");
      r.metric(f[2], parse_number(f[3]), parse_number(f[5]),
               f[4] == "<=" ? Bound::at_most : Bound::below);
    } else if (kind == "diagnostic") {
      r.diagnostic(f[2], parse_number(f[3]));
    } else if (kind == "error") {
      r.error = f[2];
      r.error_message = f[3];
    } else if (kind == "seconds") {
      r.seconds = parse_number(f[3]);
    } else {
      fail(ErrorCode::io, "unknown report row kind '" + kind + "'");
    }
  }
  return out;
}

}  // namespace rootflow
