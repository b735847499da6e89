#pragma once

#include <Eigen/Dense>

#include <vector>

namespace cavreg {

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
  }
  return "?";
}

// Perturbed basis pursuit
//   minimize ||x||_1 - f * (x_a - x0_a)   subject to  H x = y
// encoded in split variables x = z+ - z- with unit costs except (1 -+ f) on
// the perturbed node's pair.  The constant -f*x0_a does not affect the
// minimizer and is not part of the reported objective.
struct BasisPursuitLP {
  Eigen::MatrixXd H;        // M x N, M <= N
  Eigen::VectorXd y;
  int perturb_node = -1;    // -1: unperturbed
  double f = 0.0;
};

struct LPSolution {
  Eigen::VectorXd x_hat;
  double objective = 0.0;       // ||x_hat||_1 - f * x_hat[a]
  std::vector<int> basis;       // basic column indices in the split system [0, 2N)
  LPStatus status = LPStatus::Optimal;
  int iterations = 0;
};

// Generic dense standard-form LP  min c'z  s.t.  A z = b, z >= 0,  solved by
// revised simplex (phase 1 / phase 2, explicit basis inverse with rank-one
// updates, LU refactorization every 50 pivots, Dantzig pricing switching to
// Bland's rule after 3(rows+cols) iterations).  Throws std::runtime_error on
// the iteration cap.
struct StandardLP {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

struct SimplexResult {
  LPStatus status = LPStatus::Optimal;
  Eigen::VectorXd z;
  double objective = 0.0;
  std::vector<int> basis;
  int iterations = 0;
};

SimplexResult simplex_solve(const StandardLP& lp, double feas_tol,
                            const std::vector<int>* warm_basis = nullptr);

// feas_tol < 0 selects the default 1e-9 * max|y| with floor 1e-12.
LPSolution solve_bp(const BasisPursuitLP& problem, double feas_tol = -1.0);
LPSolution solve_bp_warm(const BasisPursuitLP& problem,
                         const std::vector<int>& prior_basis,
                         double feas_tol = -1.0);

}  // namespace cavreg
