#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "cavreg/instance.hpp"
#include "cavreg/rng.hpp"
#include "cavreg/suscept.hpp"

using namespace cavreg;

TEST_CASE("exact_chi with H = 0 is the diagonal inverse") {
  const Eigen::MatrixXd H = Eigen::MatrixXd::Zero(4, 6);
  const Eigen::VectorXd W = Eigen::VectorXd::Constant(6, 2.5);
  const Eigen::MatrixXd chi = exact_chi(H, W, 1.0);
  CHECK((chi - 0.4 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("exact_chi matches the adjugate inverse at N = 3") {
  Rng rng(5);
  Eigen::MatrixXd H(2, 3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) H(i, j) = rng.gauss();
  }
  Eigen::VectorXd W(3);
  W << 0.7, 1.3, 2.1;
  const double sigma2 = 0.6;
  Eigen::MatrixXd A = H.transpose() * H / sigma2;
  A.diagonal() += W;

  // adjugate-based 3x3 inverse
  Eigen::MatrixXd adj(3, 3);
  adj << A(1,1)*A(2,2)-A(1,2)*A(2,1), A(0,2)*A(2,1)-A(0,1)*A(2,2), A(0,1)*A(1,2)-A(0,2)*A(1,1),
         A(1,2)*A(2,0)-A(1,0)*A(2,2), A(0,0)*A(2,2)-A(0,2)*A(2,0), A(0,2)*A(1,0)-A(0,0)*A(1,2),
         A(1,0)*A(2,1)-A(1,1)*A(2,0), A(0,1)*A(2,0)-A(0,0)*A(2,1), A(0,0)*A(1,1)-A(0,1)*A(1,0);
  const double det = A(0,0)*adj(0,0) + A(0,1)*adj(1,0) + A(0,2)*adj(2,0);
  const Eigen::MatrixXd inv = adj / det;

  const Eigen::MatrixXd chi = exact_chi(H, W, sigma2);
  CHECK((chi - inv).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("pinning a coordinate kills its susceptibility") {
  const ProblemInstance inst = draw_instance(10, 6, {0.5, 1.0}, 0.0, 1);
  Eigen::VectorXd W = Eigen::VectorXd::Constant(10, 1.0);
  W(3) = 1e12;
  const Eigen::MatrixXd chi = exact_chi(inst.H, W, 0.5);
  CHECK(chi(3, 3) <= 1e-11);
}

TEST_CASE("exact_chi is symmetric and rejects singular input") {
  const ProblemInstance inst = draw_instance(20, 10, {0.5, 1.0}, 0.0, 2);
  const Eigen::VectorXd W = Eigen::VectorXd::Constant(20, 0.8);
  const Eigen::MatrixXd chi = exact_chi(inst.H, W, 1.0);
  const double scale = chi.cwiseAbs().maxCoeff();
  CHECK((chi - chi.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale);

  const Eigen::MatrixXd H0 = Eigen::MatrixXd::Zero(4, 6);
  const Eigen::VectorXd W0 = Eigen::VectorXd::Zero(6);
  CHECK_THROWS(exact_chi(H0, W0, 1.0));
}

TEST_CASE("resummed chi_bar: constant curvature solves the quadratic") {
  const double w0 = 1.4, alpha = 0.5, sigma2 = 0.7;
  const double chi = resummed_chi_bar(std::vector<double>(100, w0), alpha, sigma2);
  // w0 chi^2 + (w0 alpha sigma2 + alpha - 1) chi - alpha sigma2 = 0
  const double b = w0 * alpha * sigma2 + alpha - 1.0;
  const double root = (-b + std::sqrt(b * b + 4.0 * w0 * alpha * sigma2)) /
                      (2.0 * w0);
  CHECK(chi == doctest::Approx(root).epsilon(1e-10));
}

TEST_CASE("resummed chi_bar limits") {
  std::vector<double> w{0.5, 1.0, 2.0, 4.0};
  double inv_mean = 0.0;
  for (double v : w) inv_mean += 1.0 / v;
  inv_mean /= w.size();

  // sigma2 -> infinity: chi_bar -> E[1/w]
  CHECK(resummed_chi_bar(w, 0.5, 1e8) == doctest::Approx(inv_mean).epsilon(1e-6));

  // alpha -> infinity: chi_bar solves chi = E[(w + 1/sigma2)^-1]
  const double sigma2 = 0.8;
  double expect = 0.0;
  for (double v : w) expect += 1.0 / (v + 1.0 / sigma2);
  expect /= w.size();
  CHECK(resummed_chi_bar(w, 1e9, sigma2) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("resummed map is increasing and bisection finds the same fixed point") {
  const std::vector<double> w{0.4, 0.9, 1.7, 3.0};
  const double alpha = 0.45, sigma2 = 0.8;
  auto map = [&](double chi) {
    double acc = 0.0;
    for (double v : w) acc += 1.0 / (v + 1.0 / (sigma2 + chi / alpha));
    return acc / w.size();
  };
  double prev = 0.0;
  for (double chi = 0.0; chi <= 3.0; chi += 0.05) {
    const double m = map(chi);
    CHECK(m >= prev);
    prev = m;
  }
  // unique crossing of map(chi) = chi, located independently by bisection
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (map(mid) > mid ? lo : hi) = mid;
  }
  CHECK(resummed_chi_bar(w, alpha, sigma2) ==
        doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
}

TEST_CASE("smooth optimum solves ridge exactly") {
  const ProblemInstance inst = draw_instance(40, 20, {0.3, 1.0}, 0.0, 9);
  const double sigma2 = 0.5, lambda = 0.9;
  const Eigen::VectorXd x =
      smooth_optimum(inst.H, inst.y, PenaltyModel::ridge(lambda), sigma2);
  Eigen::MatrixXd A = inst.H.transpose() * inst.H / sigma2;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd direct =
      A.ldlt().solve(inst.H.transpose() * inst.y / sigma2);
  CHECK((x - direct).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("susceptibility identities: ridge at moderate size") {
  const SusceptibilityReport rep = verify_susceptibility_identities(
      120, 60, PenaltyModel::ridge(1.0), {0.2, 1.0}, 8, 0.5, 1, Exec::Parallel);
  CHECK(rep.seeds_used == 8);
  CHECK(rep.seeds_failed == 0);
  CHECK(rep.self_energy < 0.0);
  const double rel =
      std::abs(rep.chi_matrix_diag_mean - rep.chi_bar_resummed) /
      rep.chi_bar_resummed;
  CHECK(rel <= 5.0 / std::sqrt(120.0));
  const double trace_rel =
      std::abs(rep.trace_identity_lhs - rep.trace_identity_rhs) /
      rep.trace_identity_rhs;
  CHECK(trace_rel <= 5.0 / std::sqrt(120.0));
}

TEST_CASE("susceptibility identities: smoothed L1 and the epsilon limit") {
  const SusceptibilityReport rep =
      verify_susceptibility_identities(100, 50, PenaltyModel::smoothed_l1(1.0, 1e-2),
                        {0.2, 1.0}, 6, 0.5, 3, Exec::Parallel);
  CHECK(rep.seeds_used == 6);
  const double rel =
      std::abs(rep.chi_matrix_diag_mean - rep.chi_bar_resummed) /
      rep.chi_bar_resummed;
  CHECK(rel <= 5.0 / std::sqrt(100.0));

  // coordinates whose optimum collapses to zero lose their susceptibility
  // as epsilon -> 0
  const ProblemInstance inst = draw_instance(60, 30, {0.2, 1.0}, 0.0, 17);
  double prev_max = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const PenaltyModel pen = PenaltyModel::smoothed_l1(1.0, eps);
    const Eigen::VectorXd x = smooth_optimum(inst.H, inst.y, pen, 0.5);
    Eigen::VectorXd W(60);
    for (int a = 0; a < 60; ++a) W(a) = pen.second_deriv(x(a));
    const Eigen::MatrixXd chi = exact_chi(inst.H, W, 0.5);
    double max_zero_chi = 0.0;
    for (int a = 0; a < 60; ++a) {
      if (std::abs(x(a)) < eps) {
        max_zero_chi = std::max(max_zero_chi, chi(a, a));
      }
    }
    CHECK(max_zero_chi < prev_max);
    prev_max = max_zero_chi;
    if (eps == 1e-3) CHECK(max_zero_chi <= 5e-3);
  }
}

TEST_CASE("serial and parallel identity runs agree exactly") {
  const auto a = verify_susceptibility_identities(60, 30, PenaltyModel::ridge(1.0), {0.2, 1.0},
                                   4, 0.5, 11, Exec::Serial);
  const auto b = verify_susceptibility_identities(60, 30, PenaltyModel::ridge(1.0), {0.2, 1.0},
                                   4, 0.5, 11, Exec::Parallel);
  CHECK(a.chi_matrix_diag_mean == b.chi_matrix_diag_mean);
  CHECK(a.offdiag_rms == b.offdiag_rms);
  CHECK(a.trace_identity_lhs == b.trace_identity_lhs);
}
