#pragma once

#include "cavreg/penalty.hpp"

namespace cavreg {

// Environment of the effective single-variable problem
//   minimize over u:  (u^2 - 2 xi u) / (2 sigma_eff2) + U(u + x0) - f u
struct ScalarEnv {
  double sigma_eff2 = 1.0;
  double xi = 0.0;
  double x0 = 0.0;
  double f = 0.0;
};

struct ScalarResult {
  double u_hat = 0.0;
  double x_hat = 0.0;      // u_hat + x0, exactly
  double chi_local = 0.0;  // d u_hat / d f at f = 0
};

double shrink(double t, double theta);

// Global minimizer of the single-variable objective together with the local
// susceptibility.  For L1 this is the soft-threshold map
//   x_hat = shrink(x0 + xi + sigma_eff2 * f, lambda * sigma_eff2)
// with chi_local = sigma_eff2 on the active branch and 0 otherwise (the
// exact-threshold tie goes to the zero branch).  Ridge is closed-form;
// SmoothedL1 uses a safeguarded Newton iteration on the strictly convex
// objective (gradient tolerance 1e-12).
ScalarResult scalar_minimize(const ScalarEnv& env, const PenaltyModel& penalty);

// Objective value at a given u (used by tests and the thermal module).
double scalar_objective(double u, const ScalarEnv& env,
                        const PenaltyModel& penalty);

}  // namespace cavreg
