#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cavreg/instance.hpp"
#include "cavreg/parallel.hpp"

namespace cavreg {

// Per-node staircase responses u_a(f) and their average, with the linear
// fit near f = 0 that estimates the empirical susceptibility.
struct ResponseCurve {
  std::vector<double> f_grid;                    // ascending, contains 0
  std::vector<int> node_ids;
  std::vector<std::vector<double>> staircases;   // [node][f] = u_a(f)
  std::vector<double> avg_response;              // per f, mean of u_a(f)-u_a(0)
  std::optional<double> fitted_chi;              // absent when the window is degenerate
  std::pair<double, double> fit_window{0.0, 0.0};
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  int N = 0, M = 0, K = 0;
  double mse_empirical = 0.0;   // ||x_hat(0) - x0||^2 / N
  ResponseCurve response;
  int lp_solves = 0;
  double wall_seconds = 0.0;    // never serialized; outputs stay reproducible
  int failed_cells = 0;
  bool partial = false;
};

// 21 points: 0 plus +-10 log-spaced magnitudes in [1e-4, 0.5].
std::vector<double> default_f_grid();

// The finite-size response experiment: for each sampled node a and each f,
// solve the perturbed basis-pursuit LP (warm-started along the f chain from
// the shared f = 0 vertex) and record u_a(f) = x_hat_a(f) - x0_a.  The
// instance must be noiseless.  fit_window_hi bounds |f| for the linear fit;
// the fit requires at least 3 grid points per side inside the window.
ExperimentReport run_response_experiment(const ProblemInstance& instance,
                                         const std::vector<double>& f_grid,
                                         int node_sample,  // -1 = all nodes
                                         std::uint64_t seed,
                                         Exec exec = Exec::Parallel,
                                         double fit_window_hi = 1e-2);

// Mean and standard error of fitted_chi across instance reports.
std::pair<double, double> estimate_empirical_chi(
    const std::vector<ExperimentReport>& reports);

struct MseSweepPoint {
  double alpha = 0.0;
  double mse_median = 0.0;
  double mse_iqr = 0.0;
  double q_meanfield = 0.0;
  int n_fail = 0;
};

// Unperturbed basis pursuit across an alpha grid: empirical MSE summarized
// by median/IQR with the mean-field q attached for comparison.
std::vector<MseSweepPoint> mse_sweep(const std::vector<double>& alpha_grid,
                                     double rho, int N,
                                     int instances_per_point,
                                     std::uint64_t seed, double var0 = 1.0,
                                     Exec exec = Exec::Parallel);

}  // namespace cavreg
