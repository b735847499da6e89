#pragma once

#include <utility>
#include <vector>

#include "cavreg/parallel.hpp"
#include "cavreg/penalty.hpp"
#include "cavreg/prior.hpp"
#include "cavreg/scalar.hpp"

namespace cavreg {

// Fixed point of the finite-temperature self-consistency equations:
//   q = E[<u>^2],  Delta Q = E[<delta u^2>]
//   sigma_eff2 = sigma2 * (1 + beta * Delta Q / (alpha * sigma2))
//   sigma_xi2  = q / alpha        (this validation path is noiseless)
struct ThermalState {
  double beta = 0.0;
  double q = 0.0;
  double delta_Q = 0.0;
  double sigma_eff2 = 0.0;
  double sigma_xi2 = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Thermal mean and variance of u under
//   P(u) ~ exp{ -beta [ (u^2 - 2 u xi)/(2 sigma_eff2) + U(x0 + u) ] }
// (env.f is folded into xi as xi + sigma_eff2 * f).  Log-domain composite
// quadrature with the penalty kink as an exact panel edge; the grid is
// refined until mean and variance settle to 1e-10 relative.
std::pair<double, double> thermal_moments(double beta, const ScalarEnv& env,
                                          const PenaltyModel& penalty);

ThermalState solve_thermal_fixed_point(const EnsembleParams& params,
                                       const PenaltyModel& penalty,
                                       const SignalPrior& prior, double beta,
                                       double tol, int max_iter = 400,
                                       Exec exec = Exec::Parallel);

struct FdtRow {
  double beta = 0.0;
  double q = 0.0;
  double delta_Q = 0.0;
  double beta_deltaQ = 0.0;
  double chi_bar_ref = 0.0;
  double rel_err = 0.0;
};

// Fluctuation-dissipation table: beta * Delta Q against the zero-temperature
// chi_bar at the same (alpha, sigma2, penalty, prior).
std::vector<FdtRow> fdt_check(const EnsembleParams& params,
                              const PenaltyModel& penalty,
                              const SignalPrior& prior,
                              const std::vector<double>& beta_grid,
                              double tol = 1e-10, Exec exec = Exec::Parallel);

}  // namespace cavreg
