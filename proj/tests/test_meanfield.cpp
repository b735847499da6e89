#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "cavreg/experiment.hpp"
#include "cavreg/instance.hpp"
#include "cavreg/lp.hpp"
#include "cavreg/meanfield.hpp"
#include "cavreg/stats.hpp"
#include "oracle_helpers.hpp"

using namespace cavreg;

namespace {

MeanFieldState make_state(double q, double chi, double alpha, double sigma2,
                          double sigma_zeta2, double lambda) {
  MeanFieldState st;
  st.q = q;
  st.chi_bar = chi;
  st.sigma_eff2 = sigma2 + chi / alpha;
  st.sigma_xi2 = q / alpha + sigma_zeta2;
  st.theta = lambda * st.sigma_eff2;
  return st;
}

}  // namespace

TEST_CASE("quenched moments: empty signal under a positive threshold") {
  const SignalPrior prior{0.0, 1.0};
  const MeanFieldState st = make_state(0.0, 0.5, 0.5, 0.5, 0.0, 1.0);
  const auto [q, chi] = quenched_moments(st, PenaltyModel::l1(1.0), prior);
  CHECK(q == 0.0);
  CHECK(chi == 0.0);
}

TEST_CASE("quenched moments: Ridge susceptibility is exact") {
  const SignalPrior prior{0.7, 2.0};
  const MeanFieldState st = make_state(0.9, 0.4, 0.6, 1.2, 0.1, 0.8);
  const auto [q, chi] = quenched_moments(st, PenaltyModel::ridge(0.8), prior);
  CHECK(chi ==
        doctest::Approx(st.sigma_eff2 / (1.0 + 0.8 * st.sigma_eff2)).epsilon(1e-14));
  // and against the quadrature route
  const auto [q2, chi2] = quenched_moments(st, PenaltyModel::ridge(0.8), prior,
                                           MomentRoute::Quadrature);
  CHECK(q2 == doctest::Approx(q).epsilon(1e-7));
  CHECK(chi2 == doctest::Approx(chi).epsilon(1e-7));
}

TEST_CASE("quenched moments: L1 tail probability case") {
  // sigma_eff2 = 1, theta = 1, sigma_xi2 = 1, rho = 0:
  // chi = sigma_eff2 * 2 Q(1)
  MeanFieldState st;
  st.q = 1.0;
  st.chi_bar = 0.0;
  st.sigma_eff2 = 1.0;
  st.sigma_xi2 = 1.0;
  st.theta = 1.0;
  const SignalPrior prior{0.0, 1.0};
  const auto [q, chi] = quenched_moments(st, PenaltyModel::l1(1.0), prior);
  CHECK(chi == doctest::Approx(2.0 * normal_tail(1.0)).epsilon(1e-12));
  CHECK(chi == doctest::Approx(0.3173).epsilon(1e-3));

  const auto mc = oracle::mc_moments(1.0, 1.0, PenaltyModel::l1(1.0), prior,
                                     2'000'000, 5);
  CHECK(chi == doctest::Approx(mc.chi).epsilon(2e-3));
  CHECK(q == doctest::Approx(mc.q).epsilon(2e-3));
}

TEST_CASE("closed form, quadrature and Monte Carlo agree for L1") {
  const SignalPrior prior{0.25, 1.5};
  const MeanFieldState st = make_state(0.8, 0.7, 0.45, 0.3, 0.05, 0.9);
  const PenaltyModel pen = PenaltyModel::l1(0.9);

  const auto [q_cf, chi_cf] = quenched_moments(st, pen, prior, MomentRoute::ClosedForm);
  const auto [q_qd, chi_qd] = quenched_moments(st, pen, prior, MomentRoute::Quadrature);
  CHECK(q_qd == doctest::Approx(q_cf).epsilon(1e-6));
  CHECK(chi_qd == doctest::Approx(chi_cf).epsilon(1e-6));

  const auto mc = oracle::mc_moments(st.sigma_eff2, st.sigma_xi2, pen, prior,
                                     4'000'000, 17);
  CHECK(q_cf == doctest::Approx(mc.q).epsilon(3e-3));
  CHECK(chi_cf == doctest::Approx(mc.chi).epsilon(3e-3));
}

TEST_CASE("fixed point: empty signal recovers exactly") {
  const EnsembleParams params{0.4, 0.7, 0.0};
  const SignalPrior prior{0.0, 1.0};
  const PenaltyModel pen = PenaltyModel::l1(0.5);
  const FixedPointReport rep = solve_fixed_point(
      params, pen, prior, default_init(params, pen, prior), 0.5, 1e-12, 5000);
  CHECK(rep.converged);
  CHECK(rep.state.q <= 1e-10);
  CHECK(rep.state.chi_bar <= 1e-10);
}

TEST_CASE("fixed point is a true fixed point and chi_bar is bounded") {
  const EnsembleParams params{0.6, 0.5, 0.02};
  const SignalPrior prior{0.3, 1.0};
  const PenaltyModel pen = PenaltyModel::l1(0.7);
  const FixedPointReport rep = solve_fixed_point(
      params, pen, prior, default_init(params, pen, prior), 0.5, 1e-12, 20000);
  REQUIRE(rep.converged);
  const auto [q2, chi2] = quenched_moments(rep.state, pen, prior);
  CHECK(q2 == doctest::Approx(rep.state.q).epsilon(1e-8));
  CHECK(chi2 == doctest::Approx(rep.state.chi_bar).epsilon(1e-8));
  CHECK(rep.state.chi_bar >= 0.0);
  CHECK(rep.state.chi_bar <= rep.state.sigma_eff2);
  // state bookkeeping identities
  CHECK(rep.state.sigma_eff2 ==
        doctest::Approx(params.sigma2 + rep.state.chi_bar / params.alpha)
            .epsilon(1e-12));
  CHECK(rep.state.sigma_xi2 ==
        doctest::Approx(rep.state.q / params.alpha + params.sigma_zeta2)
            .epsilon(1e-12));
}

TEST_CASE("Ridge fixed point matches the normal-equations ensemble") {
  // rho = 1 dense prior; empirical MSE from 40 instances at N = 800
  const double alpha = 0.5, sigma2 = 0.5, lambda = 1.0, noise = 0.1;
  const EnsembleParams params{alpha, sigma2, noise};
  const SignalPrior prior{1.0, 1.0};
  const PenaltyModel pen = PenaltyModel::ridge(lambda);
  const FixedPointReport rep = solve_fixed_point(
      params, pen, prior, default_init(params, pen, prior), 0.5, 1e-13, 20000);
  REQUIRE(rep.converged);

  const int N = 800, M = 400, n_inst = 40;
  std::vector<double> mses(n_inst);
  for (int k = 0; k < n_inst; ++k) {
    const ProblemInstance inst = draw_instance(N, M, prior, noise, 500 + k);
    Eigen::MatrixXd A = inst.H.transpose() * inst.H / sigma2;
    A.diagonal().array() += lambda;
    const Eigen::VectorXd x =
        A.ldlt().solve(inst.H.transpose() * inst.y / sigma2);
    mses[k] = (x - inst.x0).squaredNorm() / N;
  }
  const double mse = mean_of(mses);
  CHECK(std::abs(mse - rep.state.q) / rep.state.q <= 0.10);
}

TEST_CASE("basis pursuit limit: recovery above and error below") {
  const SignalPrior prior{0.2, 1.0};
  const FixedPointReport good = solve_basis_pursuit_limit(0.75, prior, 0.0, 1e-10);
  CHECK(good.converged);
  CHECK(good.state.q == 0.0);

  const FixedPointReport bad = solve_basis_pursuit_limit(0.35, prior, 0.0, 1e-10);
  CHECK(bad.converged);
  CHECK(bad.state.q > q_recovery_tol(prior));

  // active-fraction condition holds at the q > 0 fixed point
  const double s = std::sqrt(bad.state.sigma_xi2);
  const double active =
      (1.0 - prior.rho) * 2.0 * normal_tail(bad.state.theta / s) +
      prior.rho * 2.0 *
          normal_tail(bad.state.theta / std::sqrt(s * s + prior.var0));
  CHECK(active == doctest::Approx(0.35).epsilon(1e-8));
}

TEST_CASE("basis pursuit limit: q(alpha) nonincreasing") {
  const SignalPrior prior{0.2, 1.0};
  double prev = 1e300;
  for (double alpha : {0.25, 0.30, 0.35, 0.40, 0.45, 0.50}) {
    const double q = solve_basis_pursuit_limit(alpha, prior, 0.0, 1e-10).state.q;
    CHECK(q <= prev + 1e-12);
    prev = q;
  }
}

TEST_CASE("phase boundary at rho = 0.2 sits near 0.51") {
  const auto pts = scan_phase_boundary({0.2}, {0.3, 0.7}, 2e-3, 1.0, Exec::Serial);
  REQUIRE(pts.size() == 1);
  REQUIRE(pts[0].ok);
  CHECK(pts[0].alpha_c == doctest::Approx(0.51).epsilon(0.04));
}

TEST_CASE("phase boundary is monotone in rho and fails cleanly outside (0,1)") {
  const auto pts =
      scan_phase_boundary({0.1, 0.3, 0.6}, {0.1, 0.95}, 5e-3, 1.0, Exec::Serial);
  REQUIRE(pts.size() == 3);
  for (const auto& p : pts) REQUIRE(p.ok);
  CHECK(pts[0].alpha_c < pts[1].alpha_c);
  CHECK(pts[1].alpha_c < pts[2].alpha_c);

  const auto bad = scan_phase_boundary({1.5}, {0.2, 0.8}, 5e-3, 1.0, Exec::Serial);
  REQUIRE(bad.size() == 1);
  CHECK_FALSE(bad[0].ok);
}

TEST_CASE("serial and parallel boundary scans agree exactly") {
  const std::vector<double> grid{0.15, 0.25};
  const auto a = scan_phase_boundary(grid, {0.2, 0.9}, 5e-3, 1.0, Exec::Serial);
  const auto b = scan_phase_boundary(grid, {0.2, 0.9}, 5e-3, 1.0, Exec::Parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].alpha_c == b[i].alpha_c);
  }
}

TEST_CASE("boundary at rho = 0.1 agrees with the finite-size LP crossover") {
  // success-rate crossover at N = 400 over 50 instances per alpha
  const SignalPrior prior{0.1, 1.0};
  const auto pts = scan_phase_boundary({0.1}, {0.2, 0.6}, 2e-3, 1.0, Exec::Serial);
  REQUIRE(pts[0].ok);
  const double alpha_c = pts[0].alpha_c;

  const int N = 400, n_inst = 50;
  auto success_rate = [&](double alpha) {
    const int M = static_cast<int>(std::lround(alpha * N));
    std::vector<double> ok(n_inst, 0.0);
    parallel_for(
        n_inst,
        [&](std::int64_t k) {
          const ProblemInstance inst =
              draw_instance(N, M, prior, 0.0, derive_seed(9000, k));
          const LPSolution sol = solve_bp({inst.H, inst.y, -1, 0.0});
          const double mse = (sol.x_hat - inst.x0).squaredNorm() / N;
          ok[k] = (sol.status == LPStatus::Optimal && mse < 1e-6) ? 1.0 : 0.0;
        },
        Exec::Parallel);
    return mean_of(ok);
  };

  // bisect the 50% success crossover
  double lo = 0.22, hi = 0.52;
  REQUIRE(success_rate(lo) < 0.5);
  REQUIRE(success_rate(hi) > 0.5);
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    if (success_rate(mid) < 0.5) lo = mid;
    else hi = mid;
  }
  const double crossover = 0.5 * (lo + hi);
  CHECK(std::abs(crossover - alpha_c) <= 0.04);
}
