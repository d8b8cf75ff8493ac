#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rootflow/errors.hpp"
#include "rootflow/measure.hpp"

namespace rootflow {

/// 64-bit mixing step used to split one master seed into independent streams.
std::uint64_t splitmix64(std::uint64_t x);
/// Seed of stream `index` under `master`; a pure function of both.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Polynomial sum_k a_k z^k stored as log|a_k| (-inf for a zero coefficient)
/// and arg a_k in [0, 2pi).
struct LogCoeffPoly {
  std::vector<double> log_mag;
  std::vector<double> phase;

  std::size_t degree() const { return log_mag.empty() ? 0 : log_mag.size() - 1; }
  /// Throws unless sizes agree and the leading coefficient is finite.
  void validate() const;
  /// Plain complex coefficient k (may overflow for extreme log magnitudes).
  std::complex<double> coefficient(std::size_t k) const;

  static LogCoeffPoly from_coefficients(std::span<const std::complex<double>> a);
};

enum class SamplerKind { gaussian, cauchy, unit_modulus };
SamplerKind parse_sampler(std::string_view name);
std::string_view sampler_name(SamplerKind kind);

/// Law of the random factors xi_k. Gaussian has independent N(0,1) real and
/// imaginary parts; Cauchy is a ratio of two such Gaussians; unit modulus is
/// a uniform phase.
struct CoefSampler {
  SamplerKind kind = SamplerKind::gaussian;
  std::uint64_t seed = 0;

  std::complex<double> draw(std::mt19937_64& rng) const;
};

/// a_k = exp(log_magnitudes[k]) * xi_k for k = 0..n.
LogCoeffPoly sample_poly(std::span<const double> log_magnitudes, std::size_t n,
                         const CoefSampler& sampler);

/// m-th derivative, coefficient k = a_{k+m} (k+m)!/k! in log form.
LogCoeffPoly differentiate(const LogCoeffPoly& poly, std::size_t m);

/// Coefficients of p(c z): log magnitude k gains k log c. Roots scale by 1/c.
LogCoeffPoly rescale_variable(const LogCoeffPoly& poly, double c);

/// p'(z)/p(z) by max-log-shift summation. Throws `singularity` when p(z)
/// vanishes after the shift.
std::complex<double> log_ratio_eval(const LogCoeffPoly& poly, std::complex<double> z);

/// p(z) as exp(log_scale) * value, overflow-free.
struct ScaledValue {
  std::complex<double> value;
  double log_scale;
  double abs() const;
};
ScaledValue evaluate(const LogCoeffPoly& poly, std::complex<double> z);

struct AberthOptions {
  double tol = 1e-10;
  int max_iter = 200;
  std::uint64_t seed = 0;  // only sets the angular jitter of the start
};

/// Raised when some roots did not converge; carries the converged ones.
class AberthError : public Error {
 public:
  AberthError(const std::string& what, RootSample converged, int iterations)
      : Error(ErrorCode::nonconvergence, what),
        converged_(std::move(converged)),
        iterations_(iterations) {}
  const RootSample& converged() const noexcept { return converged_; }
  int iterations() const noexcept { return iterations_; }

 private:
  RootSample converged_;
  int iterations_;
};

/// Initial guesses: per-edge radii of the Newton polygon of (k, log|a_k|),
/// equispaced angles on each circle plus a seed-derived jitter.
std::vector<std::complex<double>> aberth_initial(const LogCoeffPoly& poly,
                                                 std::uint64_t seed = 0);

/// All roots by simultaneous Aberth-Ehrlich iteration with synchronous
/// updates. Exact zero coefficients at the bottom give exact zero roots.
RootSample aberth_roots(const LogCoeffPoly& poly, const AberthOptions& options = {});

// Experiments ---------------------------------------------------------------

/// Coefficient families with a known limiting root measure.
struct PolyProfile {
  enum class Kind { kac, taylor, stable, elliptic };
  Kind kind = Kind::kac;
  double param = 0.0;  // l for stable, w for elliptic

  /// "kac", "taylor", "stable[:l]" (default l = 1), "elliptic[:w]" (default 1/2).
  static PolyProfile parse(std::string_view text);
  std::string to_string() const;
};

/// log P_{k,n}, k = 0..n.
std::vector<double> profile_log_coeffs(const PolyProfile& profile, std::size_t n);

/// Limiting root measure of the family.
RadialQuantile profile_root_measure(const PolyProfile& profile);

struct ExperimentConfig {
  PolyProfile profile;
  std::size_t n = 800;
  double t = 0.5;
  std::size_t trials = 20;
  SamplerKind sampler = SamplerKind::gaussian;
  std::uint64_t seed = 42;
  AberthOptions aberth;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct TrialResult {
  std::size_t trial = 0;
  double ks_flow = 0.0;    // derivative roots vs flow(mu, t)
  double ks_bridge = 0.0;  // roots after (1-t)^2 rescaling vs sq of the free power
  std::size_t roots_converged = 0;
  double seconds = 0.0;
  double max_modulus_before = 0.0;
  double max_modulus_after = 0.0;
  bool gauss_lucas = true;
};

struct DerivativeReport {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  double mean_ks_flow = 0.0, max_ks_flow = 0.0;
  double mean_ks_bridge = 0.0, max_ks_bridge = 0.0;
  std::size_t gauss_lucas_violations = 0;
  double seconds = 0.0;
};

/// Samples, differentiates ceil(t n) times and compares the empirical root
/// moduli with the theory. Requires n (1 - t) >= 50.
DerivativeReport derivative_experiment(const ExperimentConfig& config);

/// Columns trial,ks_flow,ks_bridge,roots_converged,seconds. The seconds
/// field is wall-clock and left empty unless `timing` is set, so the default
/// output is reproducible byte for byte.
void write_report_csv(std::ostream& out, const DerivativeReport& report, bool timing = false);

}  // namespace rootflow
