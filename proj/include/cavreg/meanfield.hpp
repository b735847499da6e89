#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cavreg/parallel.hpp"
#include "cavreg/penalty.hpp"
#include "cavreg/prior.hpp"

namespace cavreg {

// Fixed-point variables of the zero-temperature self-consistency equations:
//   q         mean squared estimation error
//   chi_bar   average local susceptibility
//   sigma_eff2 = sigma2 + chi_bar / alpha
//   sigma_xi2  = q / alpha + sigma_zeta2
//   theta      = lambda * sigma_eff2 (effective soft threshold, L1 only)
// In the basis-pursuit (sigma -> 0) limit the pair (q, theta) parametrizes
// the state; chi_bar and sigma_eff2 are reported in lambda = 1 units there
// (sigma_eff2 = theta, chi_bar = alpha * theta).
struct MeanFieldState {
  double q = 0.0;
  double chi_bar = 0.0;
  double sigma_eff2 = 0.0;
  double sigma_xi2 = 0.0;
  double theta = 0.0;
};

struct FixedPointReport {
  MeanFieldState state;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct PhasePoint {
  double alpha = 0.0;
  double rho = 0.0;
  double q = 0.0;
  double chi_bar = 0.0;
  bool recovered = false;
};

// How the quenched expectations are evaluated.  ClosedForm is available for
// L1 and Ridge (Gaussian cdf/pdf algebra); Quadrature integrates the
// single-variable minimizer numerically and works for every penalty.  Auto
// picks ClosedForm where it exists.  The two routes must agree and the tests
// hold them to each other (plus a Monte Carlo oracle).
enum class MomentRoute { Auto, ClosedForm, Quadrature };

// One sweep of the self-consistency map: expectations of u_hat^2 and of
// chi_local over x0 ~ prior and xi ~ N(0, sigma_xi2), at the frozen state.
// Returns (q_new, chi_new).
std::pair<double, double> quenched_moments(const MeanFieldState& state,
                                           const PenaltyModel& penalty,
                                           const SignalPrior& prior,
                                           MomentRoute route = MomentRoute::Auto,
                                           Exec exec = Exec::Serial);

// q below this is treated as exact recovery (dimensionless in the prior's
// second moment).
double q_recovery_tol(const SignalPrior& prior);

MeanFieldState default_init(const EnsembleParams& params,
                            const PenaltyModel& penalty,
                            const SignalPrior& prior);

// Damped iteration of (q, chi_bar) at finite sigma^2 > 0, recomputing
// sigma_eff2, sigma_xi2 and theta every sweep.
FixedPointReport solve_fixed_point(const EnsembleParams& params,
                                   const PenaltyModel& penalty,
                                   const SignalPrior& prior,
                                   MeanFieldState init, double damping,
                                   double tol, int max_iter,
                                   MomentRoute route = MomentRoute::Auto,
                                   Exec exec = Exec::Serial);

struct BasisPursuitOptions {
  double damping = 1.0;   // the map is monotone; undamped iteration is safe
  int max_iter = 200000;
  double q_init = -1.0;   // < 0: start from the prior second moment
};

// sigma -> 0 limit in the (q, theta) variables: theta solves the
// active-fraction condition  E[ 1{|x0 + xi| > theta} ] = alpha  at fixed q,
// and q iterates  q = E[ (shrink(x0 + xi, theta) - x0)^2 ]  with
// sigma_xi2 = q/alpha + sigma_zeta2.  Returns the q = 0 state when the only
// fixed point is trivial.
FixedPointReport solve_basis_pursuit_limit(double alpha,
                                           const SignalPrior& prior,
                                           double sigma_zeta2, double tol,
                                           const BasisPursuitOptions& opts = {});

struct BoundaryPoint {
  double rho = 0.0;
  double alpha_c = 0.0;
  double tol_alpha = 0.0;
  bool ok = true;
  std::string note;
};

// Bisection on alpha per rho: alpha_c is where the q > 0 fixed-point branch
// disappears.  Each rho's chain warm-starts from the error-phase side;
// distinct rho values run independently (parallelizable).
std::vector<BoundaryPoint> scan_phase_boundary(
    const std::vector<double>& rho_grid,
    std::pair<double, double> alpha_bracket, double tol_alpha,
    double prior_var, Exec exec = Exec::Parallel);

}  // namespace cavreg
