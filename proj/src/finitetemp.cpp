#include "cavreg/finitetemp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavreg/meanfield.hpp"
#include "cavreg/quadrature.hpp"
#include "cavreg/stats.hpp"

namespace cavreg {

namespace {

constexpr double kBetaCap = 1e6;  // beyond this, double precision is exhausted

// Thermal moments of t under exp(-beta [ (t^2 - 2 c t)/(2 se2) + U(t) ]).
// The u-problem at (xi, x0) maps onto this with c = x0 + xi + se2 * f and
// t = u + x0, so one scalar family covers the whole quenched plane.
struct TMoments {
  double mean = 0.0;
  double var = 0.0;
};

TMoments thermal_t_moments(double c, double beta, double se2,
                           const PenaltyModel& penalty) {
  const ScalarEnv tenv{se2, c, 0.0, 0.0};
  const double t_star = scalar_minimize(tenv, penalty).u_hat;
  const double phi_star = scalar_objective(t_star, tenv, penalty);
  const double width = std::sqrt(se2 / beta);

  // The objective is strongly convex with parameter 1/se2, so the Boltzmann
  // weight is bounded by a Gaussian of scale `width` around t_star.
  const double lo = t_star - 13.0 * width;
  const double hi = t_star + 13.0 * width;
  std::vector<double> centers{t_star};
  if (penalty.kind != PenaltyKind::Ridge && 0.0 > lo && 0.0 < hi) {
    centers.push_back(0.0);  // penalty kink / curvature spike at t = 0
  }
  double fine = 0.5 * width;
  if (penalty.kind == PenaltyKind::SmoothedL1) {
    fine = std::min(fine, 0.5 * penalty.epsilon);
  }
  if (penalty.kind == PenaltyKind::L1) {
    // one-sided decay lengths when the minimum sits at the kink
    const double d_plus = std::abs((t_star - c) / se2 + penalty.lambda);
    const double d_minus = std::abs((t_star - c) / se2 - penalty.lambda);
    const double d = std::max(d_plus, d_minus);
    if (d > 0.0) fine = std::min(fine, 1.0 / (beta * d));
  }

  const QuadRule& rule = gauss_legendre(16);
  auto eval = [&](double scale) {
    const auto panels = graded_panels(lo, hi, centers, scale, width);
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
      const double a = panels[p], b = panels[p + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      double pz = 0.0, pm1 = 0.0, pm2 = 0.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i) {
        const double t = mid + half * rule.x[i];
        const double w =
            rule.w[i] *
            std::exp(-beta * (scalar_objective(t, tenv, penalty) - phi_star));
        const double dt = t - t_star;
        pz += w;
        pm1 += w * dt;
        pm2 += w * dt * dt;
      }
      z += pz * half;
      m1 += pm1 * half;
      m2 += pm2 * half;
    }
    TMoments tm;
    tm.mean = t_star + m1 / z;
    tm.var = m2 / z - (m1 / z) * (m1 / z);
    return tm;
  };

  TMoments coarse = eval(fine);
  for (int round = 1; round <= 4; ++round) {
    const TMoments refined = eval(fine / (1 << round));
    const double dm = std::abs(refined.mean - coarse.mean) /
                      std::max({std::abs(refined.mean), width, 1e-14});
    const double dv = std::abs(refined.var - coarse.var) /
                      std::max(std::abs(refined.var), 1e-30);
    coarse = refined;
    if (dm <= 1e-10 && dv <= 1e-10) break;
  }
  if (!std::isfinite(coarse.mean) || !std::isfinite(coarse.var) ||
      coarse.var <= 0.0) {
    throw std::runtime_error("thermal_moments: quadrature produced NaN");
  }
  return coarse;
}

struct QuenchedThermal {
  double q = 0.0;        // E[<u>^2]
  double delta_q = 0.0;  // E[<delta u^2>]
};

// Quenched average over (x0, xi).  The thermal law of t = u + x0 depends on
// (x0, xi) only through c = x0 + xi, and under the Bernoulli-Gaussian prior
// (x0, c) are jointly Gaussian on the nonzero branch, so both branches
// reduce to one-dimensional Gaussian integrals in c.
QuenchedThermal thermal_quenched(double beta, double se2, double sigma_xi2,
                                 const PenaltyModel& penalty,
                                 const SignalPrior& prior, Exec exec) {
  const double s = std::sqrt(std::max(sigma_xi2, 0.0));
  const double width = std::sqrt(se2 / beta);
  const double theta_nominal = penalty.lambda * se2;
  std::vector<double> breaks;
  if (penalty.kind != PenaltyKind::Ridge) {
    breaks = {theta_nominal, -theta_nominal};
  }

  QuenchedThermal out;

  if (prior.rho < 1.0) {
    // x0 = 0: u = t, c = xi ~ N(0, s^2)
    auto g = [&](double c) -> std::array<double, 2> {
      const TMoments tm = thermal_t_moments(c, beta, se2, penalty);
      return {tm.mean * tm.mean, tm.var};
    };
    const auto zero =
        gauss_expect2_graded(g, s, breaks, width, 1e-8, "thermal zero branch",
                             exec);
    out.q += (1.0 - prior.rho) * zero[0];
    out.delta_q += (1.0 - prior.rho) * zero[1];
  }

  if (prior.rho > 0.0) {
    // x0 ~ N(0, v): c = x0 + xi ~ N(0, tau^2) with E[x0|c] = gamma c and
    // Var[x0|c] = v s^2 / tau^2, hence
    //   E[<u>^2 | c] = (<t>(c) - gamma c)^2 + v s^2 / tau^2.
    const double v = prior.var0;
    const double tau2 = v + s * s;
    const double tau = std::sqrt(tau2);
    const double gamma = v / tau2;
    const double cond_var = v * s * s / tau2;
    auto g = [&](double c) -> std::array<double, 2> {
      const TMoments tm = thermal_t_moments(c, beta, se2, penalty);
      const double du = tm.mean - gamma * c;
      return {du * du + cond_var, tm.var};
    };
    const auto on = gauss_expect2_graded(g, tau, breaks, width, 1e-8,
                                         "thermal gauss branch", exec);
    out.q += prior.rho * on[0];
    out.delta_q += prior.rho * on[1];
  }

  return out;
}

}  // namespace

std::pair<double, double> thermal_moments(double beta, const ScalarEnv& env,
                                          const PenaltyModel& penalty) {
  if (!(beta > 0.0)) throw std::domain_error("thermal_moments: beta must be > 0");
  if (beta > kBetaCap) {
    throw std::domain_error(
        "thermal_moments: beta above 1e6; use the zero-temperature solver");
  }
  if (!(env.sigma_eff2 > 0.0)) {
    throw std::domain_error("thermal_moments: sigma_eff2 must be > 0");
  }
  penalty.validate();
  const double c = env.x0 + env.xi + env.sigma_eff2 * env.f;
  const TMoments tm = thermal_t_moments(c, beta, env.sigma_eff2, penalty);
  return {tm.mean - env.x0, tm.var};
}

ThermalState solve_thermal_fixed_point(const EnsembleParams& params,
                                       const PenaltyModel& penalty,
                                       const SignalPrior& prior, double beta,
                                       double tol, int max_iter, Exec exec) {
  params.validate();
  penalty.validate();
  prior.validate();
  if (!(beta > 0.0) || beta > kBetaCap) {
    throw std::domain_error("solve_thermal_fixed_point: beta out of range");
  }
  if (!(params.sigma2 > 0.0)) {
    throw std::domain_error("solve_thermal_fixed_point: sigma2 must be > 0");
  }

  const MeanFieldState guess = default_init(params, penalty, prior);
  double q = std::max(guess.q, 1e-12);
  double dq = std::max(guess.chi_bar, 1e-12) / beta;
  const double damping = 0.5;
  const double floor = 1e-14;
  const double q_div = 1e6 * std::max(prior.second_moment(), 1e-6);

  ThermalState st;
  st.beta = beta;
  for (int it = 1; it <= max_iter; ++it) {
    const double se2 = params.sigma2 + beta * dq / params.alpha;
    const double sxi2 = q / params.alpha;
    const QuenchedThermal m =
        thermal_quenched(beta, se2, sxi2, penalty, prior, exec);

    const double q_next = (1.0 - damping) * q + damping * m.q;
    const double dq_next = (1.0 - damping) * dq + damping * m.delta_q;
    const double res =
        std::max(std::abs(q_next - q) / std::max(q, floor),
                 std::abs(dq_next - dq) / std::max(dq, floor));
    q = q_next;
    dq = dq_next;
    st.iterations = it;
    st.residual = res;
    if (q > q_div) {
      st.converged = false;
      break;
    }
    if (res <= tol) {
      st.converged = true;
      break;
    }
  }

  st.q = q;
  st.delta_Q = dq;
  st.sigma_eff2 = params.sigma2 * (1.0 + beta * dq / (params.alpha * params.sigma2));
  st.sigma_xi2 = q / params.alpha;
  return st;
}

std::vector<FdtRow> fdt_check(const EnsembleParams& params,
                              const PenaltyModel& penalty,
                              const SignalPrior& prior,
                              const std::vector<double>& beta_grid,
                              double tol, Exec exec) {
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > beta_grid[i - 1])) {
      throw std::domain_error("fdt_check: beta_grid must be increasing");
    }
  }

  const FixedPointReport zero_t =
      solve_fixed_point(params, penalty, prior,
                        default_init(params, penalty, prior), 0.5, 1e-12,
                        20000, MomentRoute::Auto, exec);
  const double chi_ref = zero_t.state.chi_bar;

  std::vector<FdtRow> rows;
  rows.reserve(beta_grid.size());
  for (double beta : beta_grid) {
    const ThermalState st =
        solve_thermal_fixed_point(params, penalty, prior, beta, tol, 400, exec);
    FdtRow row;
    row.beta = beta;
    row.q = st.q;
    row.delta_Q = st.delta_Q;
    row.beta_deltaQ = beta * st.delta_Q;
    row.chi_bar_ref = chi_ref;
    row.rel_err = std::abs(row.beta_deltaQ - chi_ref) /
                  std::max(std::abs(chi_ref), 1e-300);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cavreg
