#include "cavreg/suscept.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cavreg/rng.hpp"
#include "cavreg/stats.hpp"

namespace cavreg {

Eigen::MatrixXd exact_chi(const Eigen::MatrixXd& H,
                          const Eigen::VectorXd& W_diag, double sigma2) {
  const int N = static_cast<int>(H.cols());
  if (W_diag.size() != N) throw std::invalid_argument("exact_chi: W size");
  if (!(sigma2 > 0.0)) throw std::domain_error("exact_chi: sigma2 must be > 0");

  Eigen::MatrixXd A = H.transpose() * H / sigma2;
  A.diagonal() += W_diag;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("exact_chi: factorization failed");
  }
  const double dmin = ldlt.vectorD().minCoeff();
  const double dmax = ldlt.vectorD().maxCoeff();
  if (!(dmin > 1e-14 * std::max(dmax, 1.0))) {
    throw std::runtime_error(
        "exact_chi: matrix numerically singular (smallest pivot " +
        std::to_string(dmin) + " vs largest " + std::to_string(dmax) + ")");
  }

  const Eigen::MatrixXd chi = ldlt.solve(Eigen::MatrixXd::Identity(N, N));
  const double resid =
      (A * chi - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
  if (resid > 1e-8 * N) {
    throw std::runtime_error("exact_chi: inverse residual " +
                             std::to_string(resid) + " above 1e-8*N");
  }
  return chi;
}

double resummed_chi_bar(const std::vector<double>& w_sample, double alpha,
                        double sigma2) {
  if (w_sample.empty()) throw std::invalid_argument("resummed_chi_bar: empty sample");
  if (!(alpha > 0.0) || !(sigma2 > 0.0)) {
    throw std::domain_error("resummed_chi_bar: alpha, sigma2 must be > 0");
  }
  for (double w : w_sample) {
    if (!(w > 0.0)) throw std::domain_error("resummed_chi_bar: w must be > 0");
  }

  double chi = sigma2;
  for (int it = 0; it < 10000; ++it) {
    const double onsager = 1.0 / (sigma2 + chi / alpha);
    std::vector<double> terms(w_sample.size());
    for (std::size_t i = 0; i < w_sample.size(); ++i) {
      terms[i] = 1.0 / (w_sample[i] + onsager);
    }
    const double next = pairwise_sum(terms) / static_cast<double>(terms.size());
    const double change = std::abs(next - chi) / std::max(chi, 1e-300);
    chi = 0.5 * chi + 0.5 * next;
    if (change < 1e-13) return chi;
  }
  throw std::runtime_error("resummed_chi_bar: no convergence in 1e4 iterations");
}

Eigen::VectorXd smooth_optimum(const Eigen::MatrixXd& H,
                               const Eigen::VectorXd& y,
                               const PenaltyModel& penalty, double sigma2,
                               double grad_tol, int max_iter) {
  if (!penalty.smooth()) {
    throw std::domain_error("smooth_optimum: penalty must be twice differentiable");
  }
  penalty.validate();
  const int N = static_cast<int>(H.cols());
  const Eigen::MatrixXd HtH = H.transpose() * H;
  const Eigen::VectorXd Hty = H.transpose() * y;

  auto cost = [&](const Eigen::VectorXd& x) {
    double u = (y - H * x).squaredNorm() / (2.0 * sigma2);
    for (int a = 0; a < N; ++a) u += penalty.value(x(a));
    return u;
  };

  // ridge warm start with the same lambda
  Eigen::MatrixXd A0 = HtH / sigma2;
  A0.diagonal().array() += std::max(penalty.lambda, 1e-8);
  Eigen::VectorXd x = A0.ldlt().solve(Hty / sigma2);

  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd grad = (HtH * x - Hty) / sigma2;
    for (int a = 0; a < N; ++a) grad(a) += penalty.deriv(x(a));
    if (grad.lpNorm<Eigen::Infinity>() <= grad_tol) return x;

    Eigen::MatrixXd hess = HtH / sigma2;
    for (int a = 0; a < N; ++a) hess(a, a) += penalty.second_deriv(x(a));
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);

    const double f0 = cost(x);
    const double slope = grad.dot(step);
    double t = 1.0;
    // once the predicted decrease drops below the cost's floating-point
    // noise the backtracking test is meaningless; take the pure Newton step
    if (std::abs(slope) > 1e-12 * (std::abs(f0) + 1.0)) {
      for (int ls = 0; ls < 60; ++ls) {
        if (cost(x + t * step) <= f0 + 1e-4 * t * slope) break;
        t *= 0.5;
      }
    }
    x += t * step;
  }

  Eigen::VectorXd grad = (HtH * x - Hty) / sigma2;
  for (int a = 0; a < N; ++a) grad(a) += penalty.deriv(x(a));
  if (grad.lpNorm<Eigen::Infinity>() > grad_tol) {
    throw std::runtime_error("smooth_optimum: Newton did not reach tolerance");
  }
  return x;
}

SusceptibilityReport verify_susceptibility_identities(int N, int M,
                                       const PenaltyModel& penalty,
                                       const SignalPrior& prior, int seeds,
                                       double sigma2, std::uint64_t seed0,
                                       Exec exec) {
  if (seeds <= 0) throw std::domain_error("verify_susceptibility_identities: seeds must be > 0");
  if (!penalty.smooth()) {
    throw std::domain_error("verify_susceptibility_identities: smooth penalty required");
  }
  const double alpha = static_cast<double>(M) / N;

  struct SeedOut {
    bool ok = false;
    SusceptSeedRow row;
    std::vector<double> w_sample;
    double tr_chi = 0.0;
  };
  std::vector<SeedOut> results(seeds);

  parallel_for(
      seeds,
      [&](std::int64_t k) {
        SeedOut out;
        const std::uint64_t seed = derive_seed(seed0, static_cast<std::uint64_t>(k));
        try {
          const ProblemInstance inst = draw_instance(N, M, prior, 0.0, seed);
          const Eigen::VectorXd x_hat =
              smooth_optimum(inst.H, inst.y, penalty, sigma2);
          Eigen::VectorXd W(N);
          for (int a = 0; a < N; ++a) W(a) = penalty.second_deriv(x_hat(a));
          const Eigen::MatrixXd chi = exact_chi(inst.H, W, sigma2);

          out.row.seed = seed;
          out.row.diag_mean = chi.trace() / N;
          out.tr_chi = chi.trace();
          out.w_sample.assign(W.data(), W.data() + N);
          out.row.chi_bar_resummed = resummed_chi_bar(out.w_sample, alpha, sigma2);

          double off2 = 0.0;
          for (int a = 0; a < N; ++a) {
            for (int b = 0; b < N; ++b) {
              if (a != b) off2 += chi(a, b) * chi(a, b);
            }
          }
          out.row.offdiag_rms =
              std::sqrt(off2 / (static_cast<double>(N) * (N - 1)));
          out.row.trace_lhs = ((inst.H.transpose() * inst.H) * chi).trace();
          const double cb = out.row.diag_mean;
          out.row.trace_rhs = M * sigma2 * cb / (alpha * sigma2 + cb);
          out.ok = true;
        } catch (const std::exception&) {
          out.ok = false;
        }
        results[k] = std::move(out);
      },
      exec);

  SusceptibilityReport rep;
  rep.N = N;
  rep.M = M;

  std::vector<double> diag_means, offdiag2, trace_lhs_all, tr_chis;
  std::vector<double> pooled_w;
  for (auto& r : results) {
    if (!r.ok) {
      ++rep.seeds_failed;
      continue;
    }
    ++rep.seeds_used;
    rep.per_seed.push_back(r.row);
    diag_means.push_back(r.row.diag_mean);
    offdiag2.push_back(r.row.offdiag_rms * r.row.offdiag_rms);
    trace_lhs_all.push_back(r.row.trace_lhs);
    tr_chis.push_back(r.tr_chi);
    pooled_w.insert(pooled_w.end(), r.w_sample.begin(), r.w_sample.end());
  }
  if (rep.seeds_used == 0) {
    throw std::runtime_error("verify_susceptibility_identities: every seed failed");
  }

  const double alpha_r = static_cast<double>(M) / N;
  rep.chi_matrix_diag_mean = mean_of(diag_means);
  rep.chi_bar_resummed = resummed_chi_bar(pooled_w, alpha_r, sigma2);
  rep.offdiag_rms = std::sqrt(mean_of(offdiag2));
  rep.trace_identity_lhs = mean_of(trace_lhs_all);
  rep.trace_identity_rhs = M * sigma2 * rep.chi_matrix_diag_mean /
                           (alpha_r * sigma2 + rep.chi_matrix_diag_mean);
  const double mean_tr = mean_of(tr_chis);
  rep.self_energy = -(1.0 / sigma2) / (1.0 + mean_tr / (M * sigma2));
  return rep;
}

}  // namespace cavreg
