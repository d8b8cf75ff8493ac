#include "rootflow/polylab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <thread>

#include "rootflow/catalog.hpp"
#include "rootflow/diffflow.hpp"
#include "rootflow/freeops.hpp"
#include "rootflow/kz.hpp"

namespace rootflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double wrap_phase(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod can land exactly on 2pi after the shift.
  return a >= kTwoPi ? 0.0 : a;
}

// Below this shifted exponent a term cannot affect a double sum.
constexpr double kNegligible = -746.0;

struct RatioParts {
  std::complex<double> num;  // sum k a_k z^k, shifted
  std::complex<double> den;  // sum a_k z^k, shifted
  double shift;
  double size;  // sum |a_k z^k|, shifted; sets the rounding floor of den
};

// Shared kernel of log_ratio_eval and evaluate. `units` holds e^{i phase_k}.
RatioParts shifted_sums(const LogCoeffPoly& poly, std::span<const std::complex<double>> units,
                        std::complex<double> z) {
  const double r = std::abs(z);
  const double log_r = std::log(r);
  const std::size_t n = poly.degree();
  double shift = kNegInf;
  for (std::size_t k = 0; k <= n; ++k) {
    shift = std::max(shift, poly.log_mag[k] + static_cast<double>(k) * log_r);
  }
  const std::complex<double> dir = z / r;
  std::complex<double> rot = 1.0;
  RatioParts out{0.0, 0.0, shift, 0.0};
  for (std::size_t k = 0; k <= n; ++k, rot *= dir) {
    const double e = poly.log_mag[k] + static_cast<double>(k) * log_r - shift;
    if (!(e > kNegligible)) continue;
    const std::complex<double> term = std::exp(e) * units[k] * rot;
    out.den += term;
    out.size += std::exp(e);
    out.num += static_cast<double>(k) * term;
  }
  return out;
}

std::vector<std::complex<double>> unit_phases(const LogCoeffPoly& poly) {
  std::vector<std::complex<double>> u(poly.phase.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::polar(1.0, poly.phase[k]);
  return u;
}

// p'/p with a flag instead of an exception, for the inner loop.
bool ratio(const LogCoeffPoly& poly, std::span<const std::complex<double>> units,
           std::complex<double> z, std::complex<double>& out) {
  if (z == 0.0) {
    if (poly.log_mag[0] == kNegInf) return false;
    if (poly.degree() == 0 || poly.log_mag[1] == kNegInf) {
      out = 0.0;
      return true;
    }
    out = std::exp(poly.log_mag[1] - poly.log_mag[0]) * units[1] / units[0];
    return true;
  }
  const auto s = shifted_sums(poly, units, z);
  // p(z) indistinguishable from rounding noise counts as a root.
  if (std::abs(s.den) <= 4.0 * std::numeric_limits<double>::epsilon() * s.size) return false;
  out = s.num / (s.den * z);
  return std::isfinite(out.real()) && std::isfinite(out.imag());
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

// LogCoeffPoly ----------------------------------------------------------------

void LogCoeffPoly::validate() const {
  require(!log_mag.empty(), ErrorCode::domain, "polynomial has no coefficients");
  require(log_mag.size() == phase.size(), ErrorCode::domain,
          "log magnitudes and phases differ in length");
  require(std::isfinite(log_mag.back()), ErrorCode::degree_drop,
          "leading coefficient must be nonzero");
  for (double l : log_mag) {
    require(!std::isnan(l) && l != std::numeric_limits<double>::infinity(),
            ErrorCode::domain, "log magnitudes must be finite or -inf");
  }
}

std::complex<double> LogCoeffPoly::coefficient(std::size_t k) const {
  require(k < log_mag.size(), ErrorCode::domain, "coefficient index out of range");
  if (log_mag[k] == kNegInf) return 0.0;
  return std::polar(std::exp(log_mag[k]), phase[k]);
}

LogCoeffPoly LogCoeffPoly::from_coefficients(std::span<const std::complex<double>> a) {
  LogCoeffPoly p;
  for (auto c : a) {
    p.log_mag.push_back(c == 0.0 ? kNegInf : std::log(std::abs(c)));
    p.phase.push_back(c == 0.0 ? 0.0 : wrap_phase(std::arg(c)));
  }
  p.validate();
  return p;
}

// Sampling --------------------------------------------------------------------

SamplerKind parse_sampler(std::string_view name) {
  if (name == "gaussian") return SamplerKind::gaussian;
  if (name == "cauchy") return SamplerKind::cauchy;
  if (name == "unit" || name == "unit-modulus" || name == "unit_modulus") {
    return SamplerKind::unit_modulus;
  }
  fail(ErrorCode::config, "unknown sampler '" + std::string(name) + "'");
}

std::string_view sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::gaussian: return "gaussian";
    case SamplerKind::cauchy: return "cauchy";
    case SamplerKind::unit_modulus: return "unit-modulus";
  }
  return "gaussian";
}

std::complex<double> CoefSampler::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal;
  switch (kind) {
    case SamplerKind::gaussian: {
      const double re = normal(rng);
      return {re, normal(rng)};
    }
    case SamplerKind::cauchy: {
      std::complex<double> num, den;
      // A zero denominator has probability zero; redraw just in case.
      do {
        const double a = normal(rng), b = normal(rng);
        const double c = normal(rng), d = normal(rng);
        num = {a, b};
        den = {c, d};
      } while (den == 0.0 || num == 0.0);
      return num / den;
    }
    case SamplerKind::unit_modulus: {
      std::uniform_real_distribution<double> angle(0.0, kTwoPi);
      return std::polar(1.0, angle(rng));
    }
  }
  return 1.0;
}

LogCoeffPoly sample_poly(std::span<const double> log_magnitudes, std::size_t n,
                         const CoefSampler& sampler) {
  require(log_magnitudes.size() == n + 1, ErrorCode::domain,
          "need n + 1 coefficient magnitudes");
  require(std::isfinite(log_magnitudes[n]), ErrorCode::degree_drop,
          "leading coefficient magnitude is zero");
  std::mt19937_64 rng(sampler.seed);
  LogCoeffPoly p;
  p.log_mag.resize(n + 1);
  p.phase.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    // Draw even for zero magnitudes so the stream does not depend on them.
    const auto xi = sampler.draw(rng);
    p.log_mag[k] = log_magnitudes[k] == kNegInf ? kNegInf
                                                 : log_magnitudes[k] + std::log(std::abs(xi));
    p.phase[k] = wrap_phase(std::arg(xi));
  }
  return p;
}

LogCoeffPoly differentiate(const LogCoeffPoly& poly, std::size_t m) {
  poly.validate();
  const std::size_t n = poly.degree();
  require(m <= n, ErrorCode::domain, "cannot differentiate more times than the degree");
  if (m == 0) return poly;
  LogCoeffPoly out;
  out.log_mag.resize(n - m + 1);
  out.phase.resize(n - m + 1);
  for (std::size_t k = 0; k + m <= n; ++k) {
    const double src = poly.log_mag[k + m];
    out.log_mag[k] = src == kNegInf
                         ? kNegInf
                         : src + std::lgamma(static_cast<double>(k + m) + 1.0) -
                               std::lgamma(static_cast<double>(k) + 1.0);
    out.phase[k] = poly.phase[k + m];
  }
  return out;
}

LogCoeffPoly rescale_variable(const LogCoeffPoly& poly, double c) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::domain, "scale must be positive");
  LogCoeffPoly out = poly;
  const double lc = std::log(c);
  for (std::size_t k = 0; k < out.log_mag.size(); ++k) {
    if (out.log_mag[k] != kNegInf) out.log_mag[k] += static_cast<double>(k) * lc;
  }
  return out;
}

std::complex<double> log_ratio_eval(const LogCoeffPoly& poly, std::complex<double> z) {
  poly.validate();
  const auto units = unit_phases(poly);
  std::complex<double> out;
  require(ratio(poly, units, z, out), ErrorCode::singularity,
          "polynomial vanishes at the evaluation point");
  return out;
}

double ScaledValue::abs() const {
  const double a = std::abs(value);
  return a == 0.0 ? 0.0 : std::exp(std::log(a) + log_scale);
}

ScaledValue evaluate(const LogCoeffPoly& poly, std::complex<double> z) {
  poly.validate();
  if (z == 0.0) return {poly.coefficient(0), 0.0};
  const auto units = unit_phases(poly);
  const auto s = shifted_sums(poly, units, z);
  return {s.den, s.shift};
}

// Roots -----------------------------------------------------------------------

std::vector<std::complex<double>> aberth_initial(const LogCoeffPoly& poly,
                                                 std::uint64_t seed) {
  poly.validate();
  const std::size_t n = poly.degree();
  std::size_t low = 0;
  while (low < n && poly.log_mag[low] == kNegInf) ++low;

  // Upper hull of (k, log|a_k|) over the nonzero coefficients.
  std::vector<std::size_t> hull;
  for (std::size_t k = low; k <= n; ++k) {
    if (poly.log_mag[k] == kNegInf) continue;
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (static_cast<double>(b - a)) * (poly.log_mag[k] - poly.log_mag[a]) -
                           (static_cast<double>(k - a)) * (poly.log_mag[b] - poly.log_mag[a]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }

  const double jitter = kTwoPi * (static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53) /
                        static_cast<double>(std::max<std::size_t>(n, 1));
  std::vector<std::complex<double>> z(low, 0.0);
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const std::size_t a = hull[e], b = hull[e + 1];
    const std::size_t count = b - a;
    const double radius =
        std::exp(-(poly.log_mag[b] - poly.log_mag[a]) / static_cast<double>(count));
    // Distinct offsets per circle keep neighbouring circles from lining up.
    const double offset = jitter + 0.7 * static_cast<double>(e);
    for (std::size_t i = 0; i < count; ++i) {
      z.push_back(std::polar(radius, offset + kTwoPi * static_cast<double>(i) /
                                                  static_cast<double>(count)));
    }
  }
  return z;
}

RootSample aberth_roots(const LogCoeffPoly& poly, const AberthOptions& options) {
  poly.validate();
  const std::size_t n = poly.degree();
  require(n >= 1, ErrorCode::domain, "root finding needs degree at least 1");
  require(options.tol > 0.0 && options.max_iter > 0, ErrorCode::config,
          "Aberth tolerance and iteration cap must be positive");

  std::size_t low = 0;
  while (low < n && poly.log_mag[low] == kNegInf) ++low;
  // Factor out z^low; its roots are exact zeros.
  LogCoeffPoly reduced;
  reduced.log_mag.assign(poly.log_mag.begin() + static_cast<std::ptrdiff_t>(low),
                         poly.log_mag.end());
  reduced.phase.assign(poly.phase.begin() + static_cast<std::ptrdiff_t>(low), poly.phase.end());

  RootSample out;
  out.seed = options.seed;
  out.roots.assign(low, 0.0);
  const std::size_t m = reduced.degree();
  if (m == 0) return out;

  const auto units = unit_phases(reduced);
  auto z = aberth_initial(reduced, options.seed);
  std::vector<char> done(m, 0);
  std::vector<std::complex<double>> step(m);
  int iter = 0;
  std::size_t remaining = m;
  for (; iter < options.max_iter && remaining > 0; ++iter) {
    // Synchronous update: every correction sees the same iterate.
    for (std::size_t i = 0; i < m; ++i) {
      step[i] = 0.0;
      if (done[i]) continue;
      std::complex<double> r;
      if (!ratio(reduced, units, z[i], r)) continue;  // landed on a root
      std::complex<double> repulse = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) repulse += 1.0 / (z[i] - z[j]);
      }
      const std::complex<double> denom = r - repulse;
      if (denom == 0.0) {
        // Stationary point of the Aberth function; nudge off it.
        step[i] = options.tol * (1.0 + std::abs(z[i])) * std::complex<double>(1.0, 1.0);
      } else {
        step[i] = 1.0 / denom;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (done[i]) continue;
      z[i] -= step[i];
      if (std::abs(step[i]) < options.tol * (1.0 + std::abs(z[i]))) {
        done[i] = 1;
        --remaining;
      }
    }
  }

  if (remaining > 0) {
    RootSample partial;
    partial.seed = options.seed;
    partial.roots.assign(low, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (done[i]) partial.roots.push_back(z[i]);
    }
    throw AberthError(std::to_string(remaining) + " of " + std::to_string(m) +
                          " roots did not converge in " + std::to_string(iter) + " iterations",
                      std::move(partial), iter);
  }
  out.roots.insert(out.roots.end(), z.begin(), z.end());
  return out;
}

// Experiments -----------------------------------------------------------------

PolyProfile PolyProfile::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  std::optional<double> param;
  if (colon != std::string_view::npos) {
    const std::string value(text.substr(colon + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == value.size() && !value.empty() && std::isfinite(v), ErrorCode::config,
            "malformed profile parameter '" + value + "'");
    param = v;
  }
  PolyProfile p;
  if (name == "kac") {
    p.kind = Kind::kac;
  } else if (name == "taylor") {
    p.kind = Kind::taylor;
  } else if (name == "stable") {
    p.kind = Kind::stable;
    p.param = param.value_or(1.0);
  } else if (name == "elliptic") {
    p.kind = Kind::elliptic;
    p.param = param.value_or(0.5);
  } else {
    fail(ErrorCode::config, "unknown coefficient profile '" + std::string(name) + "'");
  }
  require(p.param >= 0.0, ErrorCode::config, "profile parameter must be >= 0");
  require(!param || p.kind == Kind::stable || p.kind == Kind::elliptic, ErrorCode::config,
          "profile '" + std::string(name) + "' takes no parameter");
  return p;
}

std::string PolyProfile::to_string() const {
  switch (kind) {
    case Kind::kac: return "kac";
    case Kind::taylor: return "taylor";
    case Kind::stable: return "stable:" + format_double(param);
    case Kind::elliptic: return "elliptic:" + format_double(param);
  }
  return "kac";
}

std::vector<double> profile_log_coeffs(const PolyProfile& profile, std::size_t n) {
  require(n >= 1, ErrorCode::domain, "degree must be at least 1");
  const double nn = static_cast<double>(n);
  std::vector<double> out(n + 1, 0.0);
  switch (profile.kind) {
    case PolyProfile::Kind::kac:
      break;
    case PolyProfile::Kind::taylor:
      for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        out[k] = kk * std::log(nn) - std::lgamma(kk + 1.0);
      }
      break;
    case PolyProfile::Kind::stable:
      return stable_poly_coeffs(n, profile.param);
    case PolyProfile::Kind::elliptic:
      for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        out[k] = profile.param *
                 (std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0));
      }
      break;
  }
  return out;
}

RadialQuantile profile_root_measure(const PolyProfile& profile) {
  switch (profile.kind) {
    case PolyProfile::Kind::kac: return catalog::make(FamilyTag::unit_circle());
    case PolyProfile::Kind::taylor: return catalog::make(FamilyTag::taylor_disk());
    case PolyProfile::Kind::stable:
      // Q = p / (1-p)^l, the alpha = 2/(l+1) stable family with theta = 1.
      return catalog::make(FamilyTag::stable(2.0 / (profile.param + 1.0)));
    case PolyProfile::Kind::elliptic: return elliptic_root_measure(profile.param);
  }
  return catalog::make(FamilyTag::unit_circle());
}

DerivativeReport derivative_experiment(const ExperimentConfig& config) {
  require(config.t >= 0.0 && config.t < 1.0, ErrorCode::domain, "t must lie in [0,1)");
  require(config.trials >= 1, ErrorCode::config, "need at least one trial");
  const double nn = static_cast<double>(config.n);
  require(nn * (1.0 - config.t) >= 50.0, ErrorCode::insufficient_data,
          "n (1 - t) must be at least 50");

  const auto t0 = std::chrono::steady_clock::now();
  const double lambda = 1.0 - config.t;
  const auto m = static_cast<std::size_t>(std::ceil(config.t * nn - 1e-9));
  const auto base = profile_root_measure(config.profile);
  const auto theory_flow = flow(base, config.t);
  const auto theory_bridge = sq(oplus_power(sq_inv(base), 1.0 / lambda));
  const auto magnitudes = profile_log_coeffs(config.profile, config.n);

  DerivativeReport report;
  report.config = config;
  report.trials.resize(config.trials);

  auto run_trial = [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    TrialResult r;
    r.trial = i;
    const std::uint64_t seed = derive_seed(config.seed, i);
    const auto poly = sample_poly(magnitudes, config.n, {config.sampler, seed});
    AberthOptions opts = config.aberth;
    opts.seed = seed;

    const auto roots_before = aberth_roots(poly, opts);
    const auto roots_after = aberth_roots(differentiate(poly, m), opts);
    const auto roots_bridge =
        aberth_roots(differentiate(rescale_variable(poly, lambda * lambda), m), opts);

    r.ks_flow = ks_distance(roots_after, theory_flow);
    r.ks_bridge = ks_distance(roots_bridge, theory_bridge);
    r.roots_converged = roots_after.size();
    r.max_modulus_before = roots_before.max_modulus();
    r.max_modulus_after = roots_after.max_modulus();
    // Roots are only known to tol, so allow that much slack.
    r.gauss_lucas =
        r.max_modulus_after <= r.max_modulus_before * (1.0 + 10.0 * config.aberth.tol);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.trials[i] = r;
  };

  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.trials)));
  if (threads == 1) {
    for (std::size_t i = 0; i < config.trials; ++i) run_trial(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < config.trials && !failed; i = next++) {
          try {
            run_trial(i);
          } catch (...) {
            // Keep the first failure; workers stop picking up new trials.
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  for (const auto& r : report.trials) {
    report.mean_ks_flow += r.ks_flow;
    report.mean_ks_bridge += r.ks_bridge;
    report.max_ks_flow = std::max(report.max_ks_flow, r.ks_flow);
    report.max_ks_bridge = std::max(report.max_ks_bridge, r.ks_bridge);
    if (!r.gauss_lucas) ++report.gauss_lucas_violations;
  }
  report.mean_ks_flow /= static_cast<double>(config.trials);
  report.mean_ks_bridge /= static_cast<double>(config.trials);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_report_csv(std::ostream& out, const DerivativeReport& report, bool timing) {
  out << "trial,ks_flow,ks_bridge,roots_converged,seconds\n";
  for (const auto& r : report.trials) {
    out << r.trial << ',' << format_double(r.ks_flow) << ',' << format_double(r.ks_bridge) << ','
        << r.roots_converged << ',';
    if (timing) out << format_double(r.seconds);
    out << '\n';
  }
}

}  // namespace rootflow
