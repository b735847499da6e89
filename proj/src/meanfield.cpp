#include "cavreg/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavreg/quadrature.hpp"
#include "cavreg/scalar.hpp"
#include "cavreg/stats.hpp"

namespace cavreg {

namespace {

// ---------------------------------------------------------------------------
// Closed-form L1 moments under the Bernoulli-Gaussian prior.
//
// With t = x0 + xi, xi ~ N(0, s^2), the soft-threshold solution splits into
//   t >  theta : u_hat = xi - theta
//   t < -theta : u_hat = xi + theta
//   |t|<=theta : u_hat = -x0
// and all expectations reduce to Gaussian tail integrals.
// ---------------------------------------------------------------------------

struct L1Moments {
  double q = 0.0;       // E[u_hat^2]
  double active = 0.0;  // P(|x0 + xi| > theta)
};

// zero-signal coordinate (x0 = 0)
L1Moments l1_zero_branch(double theta, double s) {
  if (s <= 0.0) {
    return {0.0, theta > 0.0 ? 0.0 : 1.0};
  }
  if (theta <= 0.0) return {s * s, 1.0};
  const double h = theta / s;
  const double Qh = normal_tail(h);
  const double ph = normal_pdf(h);
  L1Moments m;
  m.q = 2.0 * ((s * s + theta * theta) * Qh - s * theta * ph);
  m.active = 2.0 * Qh;
  return m;
}

// nonzero coordinate: x0 ~ N(0, v), jointly Gaussian with t = x0 + xi
L1Moments l1_gauss_branch(double theta, double s, double v) {
  const double tau2 = s * s + v;
  if (tau2 <= 0.0) return {0.0, theta > 0.0 ? 0.0 : 1.0};
  const double tau = std::sqrt(tau2);
  if (theta <= 0.0) return {s * s, 1.0};
  const double h = theta / tau;
  const double Qh = normal_tail(h);
  const double ph = normal_pdf(h);
  const double T1 = Qh;
  const double T2 = tau * ph;
  const double T3 = tau2 * (Qh + h * ph);
  const double beta = s * s / tau2;       // E[xi | t] = beta t
  const double w = s * s * v / tau2;      // Var[xi | t]
  const double gamma = v / tau2;          // E[x0 | t] = gamma t
  L1Moments m;
  const double tails =
      2.0 * (beta * beta * T3 - 2.0 * beta * theta * T2 + (theta * theta + w) * T1);
  const double mid_t2 = tau2 - 2.0 * T3;  // E[t^2 1{|t|<=theta}]
  const double mid_p = 1.0 - 2.0 * T1;    // P(|t| <= theta)
  const double middle = gamma * gamma * mid_t2 + (v * s * s / tau2) * mid_p;
  m.q = tails + middle;
  m.active = 2.0 * T1;
  return m;
}

L1Moments l1_bg_moments(double theta, double s, const SignalPrior& prior) {
  const L1Moments zero = l1_zero_branch(theta, s);
  if (prior.rho <= 0.0) return zero;
  const L1Moments on = l1_gauss_branch(theta, s, prior.var0);
  if (prior.rho >= 1.0) return on;
  L1Moments m;
  m.q = (1.0 - prior.rho) * zero.q + prior.rho * on.q;
  m.active = (1.0 - prior.rho) * zero.active + prior.rho * on.active;
  return m;
}

// ---------------------------------------------------------------------------
// Quadrature route: integrate the single-variable minimizer numerically.
// The xi integral is piecewise Gauss-Legendre with the active/inactive
// boundaries (xi = +-theta - x0) as exact panel edges; the nonzero-x0 branch
// uses Gauss-Hermite with order doubling.
// ---------------------------------------------------------------------------

std::array<double, 2> xi_moments_quadrature(double x0, double sigma_eff2,
                                            double sigma_xi,
                                            const PenaltyModel& penalty) {
  auto g = [&](double xi) -> std::array<double, 2> {
    const ScalarResult r =
        scalar_minimize(ScalarEnv{sigma_eff2, xi, x0, 0.0}, penalty);
    return {r.u_hat * r.u_hat, r.chi_local};
  };
  std::vector<double> breaks;
  double fine = std::max(sigma_xi / 8.0, 1e-12);
  if (penalty.kind != PenaltyKind::Ridge) {
    const double theta = penalty.lambda * sigma_eff2;
    breaks = {theta - x0, -theta - x0};
    if (penalty.kind == PenaltyKind::SmoothedL1) {
      fine = std::min(fine, std::max(penalty.epsilon * 0.5, sigma_xi * 1e-4));
    }
  }
  return gauss_expect2_graded(g, sigma_xi, std::move(breaks), fine, 1e-9,
                              "xi moments");
}

std::pair<double, double> moments_quadrature(const MeanFieldState& state,
                                             const PenaltyModel& penalty,
                                             const SignalPrior& prior,
                                             Exec exec) {
  const double s = std::sqrt(std::max(state.sigma_xi2, 0.0));
  auto inner = [&](double x0) {
    return xi_moments_quadrature(x0, state.sigma_eff2, s, penalty);
  };

  std::array<double, 2> zero{0.0, 0.0};
  if (prior.rho < 1.0) zero = inner(0.0);
  std::array<double, 2> on{0.0, 0.0};
  if (prior.rho > 0.0) {
    const double x_std = std::sqrt(prior.var0);
    std::array<double, 2> prev{};
    bool have_prev = false, settled = false;
    for (int order : {61, 121, 241}) {
      const QuadRule& rule = gauss_hermite(order);
      const std::int64_t n = static_cast<std::int64_t>(rule.x.size());
      std::vector<double> t0(n), t1(n);
      parallel_for(
          n,
          [&](std::int64_t i) {
            const auto v = inner(kSqrt2 * x_std * rule.x[i]);
            t0[i] = rule.w[i] * v[0];
            t1[i] = rule.w[i] * v[1];
          },
          exec);
      const std::array<double, 2> cur{pairwise_sum(t0) / std::sqrt(kPi),
                                      pairwise_sum(t1) / std::sqrt(kPi)};
      if (have_prev) {
        const double d0 =
            std::abs(cur[0] - prev[0]) /
            std::max({std::abs(cur[0]), std::abs(prev[0]), 1e-14});
        const double d1 =
            std::abs(cur[1] - prev[1]) /
            std::max({std::abs(cur[1]), std::abs(prev[1]), 1e-14});
        if (d0 <= 1e-8 && d1 <= 1e-8) {
          on = cur;
          settled = true;
          break;
        }
      }
      prev = cur;
      have_prev = true;
      on = cur;
    }
    if (!settled && prior.rho > 0.0) {
      // 241 vs 121 disagreeing at > 1e-8 on a smooth integrand indicates a
      // genuinely hard state; refuse rather than return a wrong moment.
      throw std::runtime_error("quenched_moments: x0 quadrature did not settle");
    }
  }

  const double q_new = (1.0 - prior.rho) * zero[0] + prior.rho * on[0];
  const double chi_new = (1.0 - prior.rho) * zero[1] + prior.rho * on[1];
  return {q_new, chi_new};
}

}  // namespace

std::pair<double, double> quenched_moments(const MeanFieldState& state,
                                           const PenaltyModel& penalty,
                                           const SignalPrior& prior,
                                           MomentRoute route, Exec exec) {
  penalty.validate();
  prior.validate();
  if (!(state.sigma_eff2 > 0.0)) {
    throw std::domain_error("quenched_moments: sigma_eff2 must be > 0");
  }

  const bool closed_ok = penalty.kind == PenaltyKind::L1 ||
                         penalty.kind == PenaltyKind::Ridge;
  const bool use_closed =
      route == MomentRoute::ClosedForm ||
      (route == MomentRoute::Auto && closed_ok);
  if (use_closed && !closed_ok) {
    throw std::domain_error("quenched_moments: no closed form for this penalty");
  }

  if (!use_closed) return moments_quadrature(state, penalty, prior, exec);

  const double s2 = state.sigma_eff2;
  if (penalty.kind == PenaltyKind::Ridge) {
    const double denom = 1.0 + penalty.lambda * s2;
    const double chi_new = s2 / denom;
    const double q_new =
        (state.sigma_xi2 +
         penalty.lambda * penalty.lambda * s2 * s2 * prior.second_moment()) /
        (denom * denom);
    return {q_new, chi_new};
  }

  const double theta = penalty.lambda * s2;
  const double s = std::sqrt(std::max(state.sigma_xi2, 0.0));
  const L1Moments m = l1_bg_moments(theta, s, prior);
  return {m.q, s2 * m.active};
}

double q_recovery_tol(const SignalPrior& prior) {
  return 1e-8 * std::max(prior.second_moment(), 1e-12);
}

MeanFieldState default_init(const EnsembleParams& params,
                            const PenaltyModel& penalty,
                            const SignalPrior& prior) {
  MeanFieldState st;
  st.q = prior.second_moment();
  // chi_bar guess: self-consistent Ridge-style susceptibility at this lambda
  double chi = params.sigma2 / (1.0 + penalty.lambda * params.sigma2);
  if (penalty.lambda > 0.0) {
    for (int i = 0; i < 200; ++i) {
      const double se2 = params.sigma2 + chi / params.alpha;
      chi = 0.5 * chi + 0.5 * se2 / (1.0 + penalty.lambda * se2);
    }
  }
  st.chi_bar = std::max(chi, 0.0);
  st.sigma_eff2 = params.sigma2 + st.chi_bar / params.alpha;
  st.sigma_xi2 = st.q / params.alpha + params.sigma_zeta2;
  st.theta = penalty.kind == PenaltyKind::L1 ? penalty.lambda * st.sigma_eff2
                                             : 0.0;
  return st;
}

FixedPointReport solve_fixed_point(const EnsembleParams& params,
                                   const PenaltyModel& penalty,
                                   const SignalPrior& prior,
                                   MeanFieldState init, double damping,
                                   double tol, int max_iter, MomentRoute route,
                                   Exec exec) {
  params.validate();
  penalty.validate();
  prior.validate();
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw std::domain_error("solve_fixed_point: damping must be in (0, 1]");
  }
  if (!(params.sigma2 > 0.0)) {
    throw std::domain_error(
        "solve_fixed_point: sigma2 must be > 0 (use the basis-pursuit limit "
        "solver for sigma -> 0)");
  }

  const double q_div =
      1e6 * std::max({prior.second_moment(), params.sigma_zeta2, 1e-6});

  FixedPointReport rep;
  double q = std::max(init.q, 0.0);
  double chi = std::max(init.chi_bar, 0.0);
  const double floor = 1e-12;

  for (int it = 1; it <= max_iter; ++it) {
    MeanFieldState st;
    st.q = q;
    st.chi_bar = chi;
    st.sigma_eff2 = params.sigma2 + chi / params.alpha;
    st.sigma_xi2 = q / params.alpha + params.sigma_zeta2;
    st.theta = penalty.kind == PenaltyKind::L1
                   ? penalty.lambda * st.sigma_eff2
                   : 0.0;

    const auto [q_new, chi_new] =
        quenched_moments(st, penalty, prior, route, exec);
    const double q_next = (1.0 - damping) * q + damping * q_new;
    const double chi_next = (1.0 - damping) * chi + damping * chi_new;
    const double res =
        std::max(std::abs(q_next - q) / std::max(q, floor),
                 std::abs(chi_next - chi) / std::max(chi, floor));
    q = q_next;
    chi = chi_next;
    rep.iterations = it;
    rep.residual = res;

    if (q > q_div) {
      rep.converged = false;
      break;
    }
    if (res <= tol) {
      rep.converged = true;
      break;
    }
  }

  rep.state.q = q;
  rep.state.chi_bar = chi;
  rep.state.sigma_eff2 = params.sigma2 + chi / params.alpha;
  rep.state.sigma_xi2 = q / params.alpha + params.sigma_zeta2;
  rep.state.theta = penalty.kind == PenaltyKind::L1
                        ? penalty.lambda * rep.state.sigma_eff2
                        : 0.0;
  return rep;
}

namespace {

double bp_active_fraction(double theta, double s, const SignalPrior& prior) {
  return (1.0 - prior.rho) * l1_zero_branch(theta, s).active +
         prior.rho * l1_gauss_branch(theta, s, prior.var0).active;
}

double bp_q_update(double theta, double s, const SignalPrior& prior) {
  return (1.0 - prior.rho) * l1_zero_branch(theta, s).q +
         prior.rho * l1_gauss_branch(theta, s, prior.var0).q;
}

// theta solving E[1{|x0+xi| > theta}] = alpha at fixed s; the fraction is
// strictly decreasing in theta.  Returns < 0 when even theta -> 0 cannot
// reach alpha (the q > 0 branch has collapsed).
double bp_solve_theta(double alpha, double s, const SignalPrior& prior,
                      double theta_guess) {
  const double sup = bp_active_fraction(0.0, s, prior);
  if (sup <= alpha) return -1.0;

  double lo = 0.0;
  double hi = (theta_guess > 0.0) ? theta_guess : s + std::sqrt(prior.var0);
  int expand = 0;
  while (bp_active_fraction(hi, s, prior) > alpha) {
    hi *= 2.0;
    if (++expand > 200) {
      throw std::runtime_error(
          "solve_basis_pursuit_limit: theta bracket expansion failed (alpha=" +
          std::to_string(alpha) + ", s=" + std::to_string(s) + ")");
    }
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bp_active_fraction(mid, s, prior) > alpha) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FixedPointReport solve_basis_pursuit_limit(double alpha,
                                           const SignalPrior& prior,
                                           double sigma_zeta2, double tol,
                                           const BasisPursuitOptions& opts) {
  prior.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("solve_basis_pursuit_limit: alpha must be in (0,1]");
  }
  if (!(prior.rho > 0.0 && prior.rho < 1.0)) {
    throw std::domain_error("solve_basis_pursuit_limit: rho must be in (0,1)");
  }
  if (sigma_zeta2 < 0.0) {
    throw std::domain_error("solve_basis_pursuit_limit: sigma_zeta2 < 0");
  }

  const double m2 = prior.second_moment();
  const double qtol = q_recovery_tol(prior);
  FixedPointReport rep;

  auto trivial = [&](int iters, double res) {
    FixedPointReport r;
    r.state = MeanFieldState{0.0, 0.0, 0.0, sigma_zeta2, 0.0};
    r.iterations = iters;
    r.residual = res;
    r.converged = true;
    return r;
  };

  // alpha = 1 with exact measurements: square invertible system, q = 0
  if (alpha >= 1.0 && sigma_zeta2 == 0.0) return trivial(0, 0.0);

  double q = opts.q_init < 0.0 ? m2 : opts.q_init;
  if (q <= qtol) q = m2;
  const double gamma = opts.damping;
  const double q_div = 1e9 * std::max(m2, sigma_zeta2);
  double theta = -1.0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const double s = std::sqrt(q / alpha + sigma_zeta2);
    theta = bp_solve_theta(alpha, s, prior, theta);
    if (theta < 0.0) return trivial(it, 0.0);

    const double q_new = bp_q_update(theta, s, prior);
    const double q_next = (1.0 - gamma) * q + gamma * q_new;
    const double res = std::abs(q_next - q) / std::max(q, qtol);
    q = q_next;
    rep.iterations = it;
    rep.residual = res;

    if (q <= qtol) return trivial(it, res);
    if (q > q_div) {
      rep.converged = false;
      break;
    }
    if (res <= tol) {
      rep.converged = true;
      break;
    }
  }

  rep.state.q = q;
  rep.state.theta = theta;
  rep.state.sigma_eff2 = theta;        // lambda = 1 normalization
  rep.state.chi_bar = alpha * theta;
  rep.state.sigma_xi2 = q / alpha + sigma_zeta2;
  return rep;
}

std::vector<BoundaryPoint> scan_phase_boundary(
    const std::vector<double>& rho_grid,
    std::pair<double, double> alpha_bracket, double tol_alpha,
    double prior_var, Exec exec) {
  if (!(tol_alpha > 0.0)) {
    throw std::domain_error("scan_phase_boundary: tol_alpha must be > 0");
  }
  std::vector<BoundaryPoint> out(rho_grid.size());

  parallel_for(
      static_cast<std::int64_t>(rho_grid.size()),
      [&](std::int64_t idx) {
        BoundaryPoint pt;
        pt.rho = rho_grid[idx];
        pt.tol_alpha = tol_alpha;
        const SignalPrior prior{pt.rho, prior_var};
        if (!(pt.rho > 0.0 && pt.rho < 1.0)) {
          pt.ok = false;
          pt.note = "rho outside (0,1)";
          out[idx] = pt;
          return;
        }

        const double m2 = prior.second_moment();
        const double qtol = q_recovery_tol(prior);
        double warm = m2;
        auto error_phase = [&](double alpha) {
          BasisPursuitOptions o;
          o.q_init = warm;
          const FixedPointReport rep =
              solve_basis_pursuit_limit(alpha, prior, 0.0, 1e-10, o);
          if (rep.state.q > qtol) warm = rep.state.q;
          return rep.state.q > qtol;
        };

        double lo = std::clamp(alpha_bracket.first, 1e-3, 0.9999);
        double hi = std::clamp(alpha_bracket.second, lo + 1e-6, 0.9999);

        // widen until the bracket straddles the transition
        bool straddles = false;
        for (int round = 0; round < 6; ++round) {
          const bool lo_err = error_phase(lo);
          const bool hi_err = error_phase(hi);
          if (lo_err && !hi_err) {
            straddles = true;
            break;
          }
          if (!lo_err) lo = std::max(lo * 0.5, 1e-3);
          if (hi_err) hi = hi + 0.6 * (0.9999 - hi);
          if (lo <= 1e-3 + 1e-12 && hi >= 0.9999 - 1e-12) break;
        }
        if (!straddles && !(error_phase(lo) && !error_phase(hi))) {
          pt.ok = false;
          pt.note = "bracket does not straddle the transition";
          out[idx] = pt;
          return;
        }

        while (hi - lo > tol_alpha) {
          const double mid = 0.5 * (lo + hi);
          if (error_phase(mid)) lo = mid;
          else hi = mid;
        }
        pt.alpha_c = 0.5 * (lo + hi);
        pt.ok = true;
        out[idx] = pt;
      },
      exec);

  return out;
}

}  // namespace cavreg
