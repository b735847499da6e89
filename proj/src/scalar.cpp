#include "cavreg/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavreg {

double shrink(double t, double theta) {
  const double mag = std::abs(t) - theta;
  if (mag <= 0.0) return 0.0;
  return t > 0.0 ? mag : -mag;
}

double scalar_objective(double u, const ScalarEnv& env,
                        const PenaltyModel& penalty) {
  return (u * u - 2.0 * env.xi * u) / (2.0 * env.sigma_eff2) +
         penalty.value(u + env.x0) - env.f * u;
}

namespace {

ScalarResult minimize_smoothed_l1(const ScalarEnv& env,
                                  const PenaltyModel& penalty) {
  const double s2 = env.sigma_eff2;
  // gradient of the objective in u; strictly increasing, slope >= 1/s2
  auto grad = [&](double u) {
    return (u - env.xi) / s2 + penalty.deriv(u + env.x0) - env.f;
  };

  // bracket a sign change around the unconstrained Gaussian center
  const double center = env.xi + s2 * env.f;
  double step = std::max(1.0, std::abs(center) + std::abs(env.x0));
  double lo = center, hi = center;
  double glo = grad(lo), ghi = grad(hi);
  while (glo > 0.0) { lo -= step; step *= 2.0; glo = grad(lo); }
  step = std::max(1.0, std::abs(center) + std::abs(env.x0));
  while (ghi < 0.0) { hi += step; step *= 2.0; ghi = grad(hi); }

  // Newton guarded by the bracket: a step must stay inside and must shrink
  // faster than bisection would, otherwise we bisect.  The curvature varies
  // by orders of magnitude across the smoothed kink, and unguarded Newton
  // can bounce between the flat and steep sides without converging.
  double u = 0.5 * (lo + hi);
  double dx_old = hi - lo;
  double dx = dx_old;
  double g = grad(u);
  for (int it = 0; it < 200 && std::abs(g) > 1e-12; ++it) {
    if (g > 0.0) hi = u; else lo = u;
    const double curv = 1.0 / s2 + penalty.second_deriv(u + env.x0);
    const double newton = u - g / curv;
    if (newton <= lo || newton >= hi ||
        std::abs(2.0 * g) > std::abs(dx_old * curv)) {
      dx_old = dx;
      dx = 0.5 * (hi - lo);
      u = 0.5 * (lo + hi);
    } else {
      dx_old = dx;
      dx = std::abs(newton - u);
      u = newton;
    }
    g = grad(u);
  }
  if (std::abs(g) > 1e-9) {
    throw std::runtime_error("scalar_minimize: smoothed-L1 Newton stalled");
  }

  ScalarResult res;
  res.u_hat = u;
  res.x_hat = u + env.x0;
  res.chi_local = 1.0 / (penalty.second_deriv(res.x_hat) + 1.0 / s2);
  return res;
}

}  // namespace

ScalarResult scalar_minimize(const ScalarEnv& env, const PenaltyModel& penalty) {
  if (!(env.sigma_eff2 > 0.0)) {
    throw std::domain_error("scalar_minimize: sigma_eff2 must be > 0");
  }
  penalty.validate();
  const double s2 = env.sigma_eff2;

  switch (penalty.kind) {
    case PenaltyKind::L1: {
      const double theta = penalty.lambda * s2;
      const double t = env.x0 + env.xi + s2 * env.f;
      ScalarResult res;
      res.x_hat = shrink(t, theta);
      res.u_hat = res.x_hat - env.x0;
      res.chi_local = (res.x_hat != 0.0) ? s2 : 0.0;
      return res;
    }
    case PenaltyKind::Ridge: {
      const double denom = 1.0 + penalty.lambda * s2;
      ScalarResult res;
      res.u_hat = (env.xi + s2 * (env.f - penalty.lambda * env.x0)) / denom;
      res.x_hat = res.u_hat + env.x0;
      res.chi_local = s2 / denom;
      return res;
    }
    case PenaltyKind::SmoothedL1:
      return minimize_smoothed_l1(env, penalty);
  }
  throw std::logic_error("scalar_minimize: unknown penalty kind");
}

}  // namespace cavreg
