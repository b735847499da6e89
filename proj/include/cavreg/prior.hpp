#pragma once

#include <stdexcept>

namespace cavreg {

// Bernoulli-Gaussian signal distribution: each coordinate is nonzero with
// probability rho, and nonzero values are N(0, var0).
struct SignalPrior {
  double rho = 0.2;
  double var0 = 1.0;

  void validate() const {
    if (rho < 0.0 || rho > 1.0)
      throw std::domain_error("prior: rho must be in [0, 1]");
    if (!(var0 > 0.0)) throw std::domain_error("prior: var0 must be > 0");
  }

  double second_moment() const { return rho * var0; }
};

// Ensemble knobs: sampling ratio alpha = M/N, loss scale sigma^2 and
// additive measurement-noise variance sigma_zeta^2 (independent knobs).
struct EnsembleParams {
  double alpha = 0.5;
  double sigma2 = 1.0;
  double sigma_zeta2 = 0.0;

  void validate() const {
    if (!(alpha > 0.0)) throw std::domain_error("params: alpha must be > 0");
    if (sigma2 < 0.0) throw std::domain_error("params: sigma2 must be >= 0");
    if (sigma_zeta2 < 0.0)
      throw std::domain_error("params: sigma_zeta2 must be >= 0");
  }
};

}  // namespace cavreg
