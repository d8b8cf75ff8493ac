#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rootflow/measure.hpp"

namespace rootflow {

/// Method-of-lines settings shared by the CDF steppers.
struct PdeScheme {
  /// Largest accepted Courant number (characteristic displacement per step
  /// in units of the local grid spacing).
  double cfl = 0.5;
  /// Limited second-order upwind log-slopes; first order when false.
  bool second_order = true;
};

/// Radial CDF sampled on 0 = x_0 < x_1 < ... < x_M at time t.
struct PdeState {
  std::vector<double> x;
  std::vector<double> phi;
  double t = 0.0;
  PdeScheme scheme;
  /// Monotone projection bookkeeping: nodes moved and the largest move.
  std::size_t projections = 0;
  double max_projection = 0.0;

  void validate() const;
  /// Linear interpolation of the CDF; 0 below x_0, the last value beyond x_M.
  double cdf(double r) const;
};

/// M + 1 equispaced nodes on [0, x_max].
std::vector<double> uniform_nodes(std::size_t m, double x_max);
/// M + 1 nodes x_i = scale (e^{b i/M} - 1) reaching x_max: spacing about
/// scale * b / M near 0 and constant relative spacing b / M far out. For
/// heavy tails, where the far boundary has to sit where Phi is close to 1.
std::vector<double> stretched_nodes(std::size_t m, double scale, double x_max);

PdeState make_state(std::function<double(double)> cdf, std::vector<double> nodes,
                    double t = 0.0, PdeScheme scheme = {});
/// Initial CDF taken from a measure's radial CDF.
PdeState make_state(const RadialQuantile& measure, std::vector<double> nodes,
                    double t = 0.0, PdeScheme scheme = {});

enum class PdeForm {
  cdf,       // (1-t) Phi_t = x Phi_x / Phi - 1 + Phi
  rescaled,  // (1-t) Phi_t = -x Phi_x + x Phi_x / Phi - 1 + Phi on [0,1]
};

/// Right-hand side (1-t) Phi_t of the chosen form at every node.
std::vector<double> pde_rhs(const PdeState& state, PdeForm form);

/// Largest time step the CFL limit allows from this state.
double stable_dt(const PdeState& state, PdeForm form);

/// One RK4 step. Throws `step_rejected` when dt breaks the CFL limit and
/// `domain` when t + dt >= 1 or Phi vanishes inside (x_0, x_M].
PdeState step_cdf(const PdeState& state, double dt);
PdeState step_rescaled(const PdeState& state, double dt);

struct IntegrateOptions {
  double dt = 1e-4;                  // upper bound; the CFL limit may cut it
  std::size_t record_every = 0;      // keep every k-th state when > 0
};

/// Steps to t_end with dt = min(options.dt, stable_dt). `trajectory`, when
/// given, receives the initial state, every recorded state and the last one.
PdeState integrate(PdeState state, double t_end, PdeForm form,
                   const IntegrateOptions& options = {},
                   std::vector<PdeState>* trajectory = nullptr);

/// sup over interior nodes of |x f' - x f'/f + 1 - f|, f' by central
/// differences (the t -> 1 limit of the rescaled equation).
double ode_residual(std::span<const double> x, std::span<const double> f);

/// Evolves the radial density psi (mass loss 1 per unit time) and the
/// renormalised phi = psi/(1-t) with an upwind finite-volume scheme and
/// records both masses.
struct MassTrajectory {
  std::vector<double> t;
  std::vector<double> psi_mass;
  std::vector<double> phi_mass;
};
MassTrajectory density_mass_check(std::function<double(double)> psi0, double support,
                                  double t_end, std::size_t cells = 2000, double dt = 1e-4,
                                  std::size_t samples = 11);

/// Brown-measure form F(r,t) = Phi(r^2,t): steps `state` once by dt and
/// returns sup_r |(1-t) F_t - (r F_r/(2F) - 1 + F)| over r = sqrt(x_i),
/// with F_t a forward difference and the right side averaged over the step.
/// Nodes where F = 1 on both sides of the step contribute zero.
double brown_cdf_residual(const PdeState& state, double dt);

/// Rows t,x,phi for every state.
void write_trajectory_csv(std::ostream& out, std::span<const PdeState> states);

}  // namespace rootflow
