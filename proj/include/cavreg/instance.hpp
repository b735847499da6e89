#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "cavreg/prior.hpp"

namespace cavreg {

// One quenched draw (H, x0, y) with the seed that produced it.  H has i.i.d.
// N(0, 1/M) entries and is stored dense row-major; y = H x0 + zeta.
struct ProblemInstance {
  int N = 0;
  int M = 0;
  std::uint64_t seed = 0;
  SignalPrior prior;
  double noise_var = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> H;
  Eigen::VectorXd x0;
  Eigen::VectorXd y;

  int nonzero_count(double tol = 0.0) const;
};

ProblemInstance draw_instance(int N, int M, const SignalPrior& prior,
                              double noise_var, std::uint64_t seed);

// JSON record {N, M, seed, prior, noise_var, H (row-major), x0, y} with
// exact float64 round-trip.
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const std::string& text);

}  // namespace cavreg
