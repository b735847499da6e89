#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "cavreg/instance.hpp"
#include "cavreg/parallel.hpp"
#include "cavreg/penalty.hpp"

namespace cavreg {

// Exact susceptibility matrix chi = (H'H / sigma2 + diag(W))^{-1} by
// symmetric factorization.  Throws if the matrix is numerically singular;
// the inverse must satisfy ||(H'H/sigma2 + W) chi - I||_inf <= 1e-8 * N.
Eigen::MatrixXd exact_chi(const Eigen::MatrixXd& H,
                          const Eigen::VectorXd& W_diag, double sigma2);

// Self-consistent mean local susceptibility over a sample of curvatures w:
//   chi_bar = E_w[ (w + 1/(sigma2 + chi_bar/alpha))^{-1} ]
// solved by damped iteration from chi_bar = sigma2 (the map is increasing
// and bounded, so the fixed point is unique for positive w).
double resummed_chi_bar(const std::vector<double>& w_sample, double alpha,
                        double sigma2);

// Minimizer of the full N-dimensional convex cost
//   ||y - H x||^2 / (2 sigma2) + sum_a U(x_a)
// for a smooth penalty, by damped Newton with gradient tolerance grad_tol.
Eigen::VectorXd smooth_optimum(const Eigen::MatrixXd& H,
                               const Eigen::VectorXd& y,
                               const PenaltyModel& penalty, double sigma2,
                               double grad_tol = 1e-10, int max_iter = 200);

struct SusceptSeedRow {
  std::uint64_t seed = 0;
  double diag_mean = 0.0;
  double chi_bar_resummed = 0.0;  // on this seed's own W sample
  double offdiag_rms = 0.0;
  double trace_lhs = 0.0;         // Tr(H'H chi)
  double trace_rhs = 0.0;         // M sigma2 chi_bar / (alpha sigma2 + chi_bar)
};

struct SusceptibilityReport {
  int N = 0, M = 0;
  int seeds_used = 0, seeds_failed = 0;
  double chi_matrix_diag_mean = 0.0;   // pooled (1/N) sum_a chi^aa
  double chi_bar_resummed = 0.0;       // on the pooled W sample
  double offdiag_rms = 0.0;            // pooled
  double self_energy = 0.0;            // -(1/sigma2) / (1 + Tr chi / (M sigma2))
  double trace_identity_lhs = 0.0;     // mean over seeds of Tr(H'H chi)
  double trace_identity_rhs = 0.0;     // from the pooled diag mean
  std::vector<SusceptSeedRow> per_seed;
};

// Finite-N check of the smooth-penalty susceptibility identities: per seed
// computes the optimum, W = U''(x_hat), the exact chi, and aggregates the
// mean diagonal against the resummed formula, the off-diagonal RMS, and the
// trace identity.
SusceptibilityReport verify_susceptibility_identities(int N, int M,
                                       const PenaltyModel& penalty,
                                       const SignalPrior& prior, int seeds,
                                       double sigma2,
                                       std::uint64_t seed0 = 1,
                                       Exec exec = Exec::Parallel);

}  // namespace cavreg
