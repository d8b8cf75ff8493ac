#include "rootflow/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "rootflow/errors.hpp"

namespace rootflow {

struct RadialQuantile::Impl {
  std::vector<double> probs;
  std::vector<double> radii;
  double atom0 = 0.0;
  TailQuantileFn evaluator;  // empty: piecewise linear
  bool exact = false;
  std::optional<FamilyTag> tag;

  double interpolate(double p) const {
    const auto it = std::upper_bound(probs.begin(), probs.end(), p);
    if (it == probs.begin()) return radii.front();
    const auto i = static_cast<std::size_t>(it - probs.begin()) - 1;
    if (i + 1 == probs.size()) {
      if (probs.size() == 1) return radii.back();
      const double slope = (radii[i] - radii[i - 1]) / (probs[i] - probs[i - 1]);
      return radii[i] + slope * (p - probs[i]);
    }
    if (p == probs[i]) return radii[i];
    // A jump out of the origin atom sits inside this segment.
    if (probs[i] <= atom0) return radii[i + 1];
    const double w = (p - probs[i]) / (probs[i + 1] - probs[i]);
    return radii[i] + w * (radii[i + 1] - radii[i]);
  }

  double eval(double p, double pc) const {
    if (p <= atom0) return 0.0;
    return evaluator ? evaluator(p, pc) : interpolate(p);
  }
  double eval(double p) const { return eval(p, 1.0 - p); }
};

namespace {

void validate_table(std::span<const double> probs, std::span<const double> radii,
                    double atom0) {
  require(!probs.empty(), ErrorCode::domain, "quantile table is empty");
  require(probs.size() == radii.size(), ErrorCode::domain,
          "quantile table: probs and radii differ in length");
  require(atom0 >= 0.0 && atom0 < 1.0, ErrorCode::domain,
          "atom0 must lie in [0,1)");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    require(probs[i] > 0.0 && probs[i] < 1.0, ErrorCode::domain,
            "quantile node outside (0,1)");
    require(std::isfinite(radii[i]) && radii[i] >= 0.0, ErrorCode::domain,
            "quantile radius must be finite and nonnegative");
    if (i > 0) {
      require(probs[i] > probs[i - 1], ErrorCode::domain,
              "quantile nodes must be strictly increasing");
      require(radii[i] >= radii[i - 1], ErrorCode::domain,
              "quantile radii must be nondecreasing");
    }
    require(probs[i] > atom0 || radii[i] == 0.0, ErrorCode::domain,
            "nodes inside the origin atom must have radius 0");
  }
}

}  // namespace

RadialQuantile::RadialQuantile(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

RadialQuantile RadialQuantile::from_table(std::vector<double> probs,
                                          std::vector<double> radii,
                                          double atom0) {
  validate_table(probs, radii, atom0);
  auto impl = std::make_shared<Impl>();
  impl->probs = std::move(probs);
  impl->radii = std::move(radii);
  impl->atom0 = atom0;
  return RadialQuantile(std::move(impl));
}

RadialQuantile RadialQuantile::from_function(QuantileFn q, double atom0,
                                             std::vector<double> probs,
                                             bool exact,
                                             std::optional<FamilyTag> tag) {
  require(static_cast<bool>(q), ErrorCode::domain, "empty quantile evaluator");
  return from_tail_function([q = std::move(q)](double p, double) { return q(p); },
                            atom0, std::move(probs), exact, std::move(tag));
}

RadialQuantile RadialQuantile::from_tail_function(TailQuantileFn q, double atom0,
                                                  std::vector<double> probs,
                                                  bool exact,
                                                  std::optional<FamilyTag> tag) {
  require(static_cast<bool>(q), ErrorCode::domain, "empty quantile evaluator");
  std::vector<double> radii(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    radii[i] = probs[i] <= atom0 ? 0.0 : q(probs[i], 1.0 - probs[i]);
  }
  validate_table(probs, radii, atom0);
  auto impl = std::make_shared<Impl>();
  impl->probs = std::move(probs);
  impl->radii = std::move(radii);
  impl->atom0 = atom0;
  impl->evaluator = std::move(q);
  impl->exact = exact;
  impl->tag = std::move(tag);
  return RadialQuantile(std::move(impl));
}

double RadialQuantile::quantile(double p) const {
  require(p > 0.0 && p < 1.0, ErrorCode::domain,
          "quantile probability must lie in (0,1)");
  return impl_->eval(p);
}

double RadialQuantile::quantile(double p, double pc) const {
  require(p > 0.0 && p < 1.0 && pc > 0.0 && pc <= 1.0, ErrorCode::domain,
          "quantile probability must lie in (0,1)");
  return impl_->eval(p, pc);
}

double RadialQuantile::cdf(double r) const {
  require(r >= 0.0, ErrorCode::domain, "cdf radius must be nonnegative");
  const Impl& m = *impl_;
  if (std::isinf(r)) return 1.0;

  if (m.evaluator) {
    // F(r) = sup{p : Q(p) <= r}; Q is nondecreasing so bisection brackets it.
    double lo = m.atom0;
    double hi = 1.0;
    if (m.eval(std::nextafter(lo, 1.0)) > r) return lo;
    if (m.eval(std::nextafter(1.0, 0.0)) <= r) return 1.0;
    for (int it = 0; it < 200 && std::nextafter(lo, 1.0) < hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (m.eval(mid) <= r) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  // Piecewise-linear table.
  const auto& ps = m.probs;
  const auto& rs = m.radii;
  // First node (above the atom) whose radius exceeds r.
  std::size_t first_above = ps.size();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i] > m.atom0 && rs[i] > r) {
      first_above = i;
      break;
    }
  }
  if (first_above == ps.size()) {
    const std::size_t n = ps.size();
    if (n < 2) return 1.0;
    const double slope = (rs[n - 1] - rs[n - 2]) / (ps[n - 1] - ps[n - 2]);
    if (slope <= 0.0) return 1.0;
    return std::min(1.0, ps[n - 1] + (r - rs[n - 1]) / slope);
  }
  const std::size_t i = first_above;
  if (i == 0 || ps[i - 1] <= m.atom0) {
    // The quantile is constant from the atom up to node i.
    return m.atom0;
  }
  // rs[i-1] <= r < rs[i], linear between them.
  const double w = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
  return ps[i - 1] + w * (ps[i] - ps[i - 1]);
}

std::span<const double> RadialQuantile::probs() const { return impl_->probs; }
std::span<const double> RadialQuantile::radii() const { return impl_->radii; }
double RadialQuantile::atom0() const { return impl_->atom0; }
bool RadialQuantile::has_evaluator() const {
  return static_cast<bool>(impl_->evaluator);
}
bool RadialQuantile::is_exact() const { return impl_->exact; }
const std::optional<FamilyTag>& RadialQuantile::closed_form() const {
  return impl_->tag;
}

bool RadialQuantile::extrapolates(double p) const {
  return !impl_->evaluator && p > impl_->probs.back();
}

RadialQuantile RadialQuantile::on_grid(std::vector<double> probs) const {
  if (impl_->evaluator) {
    return from_tail_function(impl_->evaluator, impl_->atom0, std::move(probs),
                         impl_->exact, impl_->tag);
  }
  std::vector<double> radii(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) radii[i] = impl_->eval(probs[i]);
  return from_table(std::move(probs), std::move(radii), impl_->atom0);
}

std::vector<double> RadialQuantile::quantiles(std::span<const double> ps) const {
  std::vector<double> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out[i] = quantile(ps[i]);
  return out;
}

// RootSample ----------------------------------------------------------------

RootSample RootSample::from_moduli(std::span<const double> moduli,
                                   std::uint64_t seed) {
  RootSample s;
  s.seed = seed;
  s.roots.reserve(moduli.size());
  for (double r : moduli) {
    require(r >= 0.0, ErrorCode::domain, "root modulus must be nonnegative");
    s.roots.emplace_back(r, 0.0);
  }
  return s;
}

std::vector<double> RootSample::moduli() const {
  std::vector<double> out(roots.size());
  std::transform(roots.begin(), roots.end(), out.begin(),
                 [](std::complex<double> z) { return std::abs(z); });
  return out;
}

double RootSample::max_modulus() const {
  double m = 0.0;
  for (auto z : roots) m = std::max(m, std::abs(z));
  return m;
}

// Grids ---------------------------------------------------------------------

std::size_t default_grid_size() {
  if (const char* env = std::getenv("ROOTFLOW_GRID")) {
    const std::string_view s(env);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && ptr == s.data() + s.size() && n >= 2) return n;
  }
  return 4096;
}

std::vector<double> chebyshev_grid(std::size_t n, double p_min, double p_max) {
  require(n >= 2, ErrorCode::domain, "grid needs at least two nodes");
  require(p_min > 0.0 && p_max < 1.0 && p_min < p_max, ErrorCode::domain,
          "grid bounds must satisfy 0 < p_min < p_max < 1");
  std::vector<double> g(n);
  const double span = p_max - p_min;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n - 1);
    g[i] = p_min + span * 0.5 * (1.0 - std::cos(theta));
  }
  g.front() = p_min;
  g.back() = p_max;
  // Cosine rounding can tie neighbours at the ends for very large n.
  for (std::size_t i = 1; i < n; ++i) {
    if (g[i] <= g[i - 1]) g[i] = std::nextafter(g[i - 1], 1.0);
  }
  return g;
}

std::vector<double> logit_grid(std::size_t n, double eps) {
  require(n >= 2, ErrorCode::domain, "grid needs at least two nodes");
  require(eps > 0.0 && eps < 0.5, ErrorCode::domain, "eps must lie in (0,1/2)");
  const double zmax = std::log((1.0 - eps) / eps);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -zmax + 2.0 * zmax * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    // Evaluate the logistic on the side that avoids cancellation.
    g[i] = z < 0 ? std::exp(z) / (1.0 + std::exp(z)) : 1.0 / (1.0 + std::exp(-z));
  }
  return g;
}

// Operations ----------------------------------------------------------------

double quantile_at(const RadialQuantile& measure, double p) {
  return measure.quantile(p);
}

double cdf_at(const RadialQuantile& measure, double r) { return measure.cdf(r); }

namespace {

// Applies a pointwise map to the radii of a measure, keeping the grid, atom
// and evaluator (composed).
template <class F>
RadialQuantile map_radii(const RadialQuantile& m, F f) {
  std::vector<double> probs(m.probs().begin(), m.probs().end());
  if (!m.has_evaluator()) {
    std::vector<double> radii(m.radii().size());
    std::transform(m.radii().begin(), m.radii().end(), radii.begin(), f);
    return RadialQuantile::from_table(std::move(probs), std::move(radii),
                                      m.atom0());
  }
  return RadialQuantile::from_tail_function(
      [m, f](double p, double pc) { return f(m.quantile(p, pc)); }, m.atom0(),
      std::move(probs), m.is_exact());
}

}  // namespace

RadialQuantile sq(const RadialQuantile& measure) {
  return map_radii(measure, [](double r) { return r * r; });
}

RadialQuantile sq_inv(const RadialQuantile& measure) {
  return map_radii(measure, [](double r) { return std::sqrt(r); });
}

RadialQuantile dilate(const RadialQuantile& measure, double c) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::domain,
          "dilation factor must be positive");
  if (c == 1.0) return measure;
  return map_radii(measure, [c](double r) { return c * r; });
}

RadialQuantile from_samples(const RootSample& sample,
                            std::span<const double> grid) {
  require(sample.size() > 0, ErrorCode::insufficient_data,
          "empirical measure of an empty sample");
  std::vector<double> x = sample.moduli();
  std::sort(x.begin(), x.end());
  const auto n = x.size();
  const auto zeros = static_cast<std::size_t>(
      std::count(x.begin(), x.end(), 0.0));
  require(zeros < n, ErrorCode::domain, "sample consists only of zeros");
  const double atom0 = static_cast<double>(zeros) / static_cast<double>(n);

  std::vector<double> probs(grid.begin(), grid.end());
  std::vector<double> radii(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    // Left-continuous inverse of the empirical CDF: x_(ceil(n p)).
    auto k = static_cast<std::size_t>(std::ceil(probs[i] * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    radii[i] = probs[i] <= atom0 ? 0.0 : x[k - 1];
  }
  return RadialQuantile::from_table(std::move(probs), std::move(radii), atom0);
}

RadialQuantile from_samples(const RootSample& sample) {
  const auto g = chebyshev_grid();
  return from_samples(sample, g);
}

double ks_distance(const RadialQuantile& a, const RadialQuantile& b,
                   std::span<const double> radii) {
  std::vector<double> grid;
  if (radii.empty()) {
    for (const auto* m : {&a, &b}) {
      for (double r : m->radii()) {
        grid.push_back(r);
        if (r > 0.0) grid.push_back(std::nextafter(r, 0.0));
      }
    }
    grid.push_back(0.0);
  } else {
    grid.assign(radii.begin(), radii.end());
  }
  double d = 0.0;
  for (double r : grid) d = std::max(d, std::abs(a.cdf(r) - b.cdf(r)));
  return d;
}

double ks_distance(const RootSample& sample, const RadialQuantile& theory) {
  require(sample.size() > 0, ErrorCode::insufficient_data,
          "KS distance of an empty sample");
  std::vector<double> x = sample.moduli();
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Empirical CDF jumps from i/n to (i+1)/n at x_i; compare against F(x)
    // and its left limit.
    const double f = theory.cdf(x[i]);
    const double f_left = x[i] > 0.0 ? theory.cdf(std::nextafter(x[i], 0.0)) : 0.0;
    d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f_left - static_cast<double>(i) / n);
  }
  return d;
}

double quantile_distance(const RadialQuantile& a, const RadialQuantile& b,
                         std::span<const double> probs) {
  double d = 0.0;
  for (double p : probs) {
    const double qa = a.quantile(p);
    const double qb = b.quantile(p);
    d = std::max(d, std::abs(qa - qb) / std::max(1.0, std::abs(qb)));
  }
  return d;
}

// CSV -----------------------------------------------------------------------

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_quantile_csv(std::ostream& out, const RadialQuantile& measure) {
  out << "p,q\n";
  const auto ps = measure.probs();
  const auto rs = measure.radii();
  const double a = measure.atom0();
  bool atom_written = a == 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!atom_written && ps[i] >= a) {
      if (ps[i] > a) out << format_double(a) << ",0\n";
      atom_written = true;
    }
    out << format_double(ps[i]) << ',' << format_double(rs[i]) << '\n';
  }
  if (!atom_written) out << format_double(a) << ",0\n";
}

void write_cdf_csv(std::ostream& out, const RadialQuantile& measure,
                   std::span<const double> radii) {
  out << "r,F\n";
  for (double r : radii) {
    out << format_double(r) << ',' << format_double(measure.cdf(r)) << '\n';
  }
}

namespace {

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::io,
          "malformed number in CSV: '" + std::string(s) + "'");
  return v;
}

}  // namespace

RadialQuantile read_quantile_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io,
          "empty quantile CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "p,q", ErrorCode::io, "quantile CSV must start with 'p,q'");
  std::vector<double> probs, radii;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorCode::io, "quantile CSV row lacks ','");
    probs.push_back(parse_double(std::string_view(line).substr(0, comma)));
    radii.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  double atom0 = 0.0;
  // Q(p) = 0 forces an atom of weight >= p; the writer emits the atom row.
  for (std::size_t i = 0; i < probs.size() && radii[i] == 0.0; ++i) atom0 = probs[i];
  return RadialQuantile::from_table(std::move(probs), std::move(radii), atom0);
}

}  // namespace rootflow
