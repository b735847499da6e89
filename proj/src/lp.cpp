#include "cavreg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cavreg {

namespace {

constexpr double kDualTol = 1e-9;    // reduced-cost optimality threshold
constexpr double kPivotTol = 1e-10;  // minimum pivot magnitude
constexpr int kRefactorEvery = 50;

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardLP& lp, double feas_tol)
      : A_(lp.A), b_(lp.b), cost_(lp.c), feas_tol_(feas_tol) {
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
    if (b_.size() != m_ || cost_.size() != n_) {
      throw std::invalid_argument("simplex: dimension mismatch");
    }
    // flip rows so b >= 0 (keeps the artificial identity basis feasible)
    for (int i = 0; i < m_; ++i) {
      if (b_(i) < 0.0) {
        A_.row(i) = -A_.row(i);
        b_(i) = -b_(i);
      }
    }
    scale_ = std::max(1.0, b_.lpNorm<Eigen::Infinity>());
    max_iterations_ = 200 * (n_ + m_) + 10000;
    bland_after_ = 3 * (n_ + m_);
  }

  SimplexResult solve(const std::vector<int>* warm_basis) {
    bool warm_ok = warm_basis && try_warm_start(*warm_basis);
    if (!warm_ok) {
      if (!phase1()) {
        SimplexResult res;
        res.status = LPStatus::Infeasible;
        res.iterations = iterations_;
        return res;
      }
    }
    return phase2();
  }

 private:
  // ---- basis bookkeeping ----------------------------------------------

  bool refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = ext_col(basis_[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::MatrixXd& u = lu.matrixLU();
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double d = std::abs(u(i, i));
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    if (!(dmin > 1e-12 * std::max(dmax, 1.0))) return false;
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    clamp_xb();
    return true;
  }

  Eigen::VectorXd ext_col(int j) const {
    if (j < n_) return A_.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    e(j - n_) = 1.0;
    return e;
  }

  void clamp_xb() {
    for (int i = 0; i < m_; ++i) {
      if (xb_(i) < 0.0 && xb_(i) > -1e-11 * scale_) xb_(i) = 0.0;
    }
  }

  void set_basis(std::vector<int> basis) {
    basis_ = std::move(basis);
    in_basis_.assign(n_ + m_, 0);
    for (int j : basis_) in_basis_[j] = 1;
  }

  void pivot(int entering, int leave_row, const Eigen::VectorXd& w) {
    const double p = w(leave_row);
    const Eigen::RowVectorXd pivot_row = binv_.row(leave_row) / p;
    binv_.noalias() -= w * pivot_row;
    binv_.row(leave_row) = pivot_row;
    const double t = xb_(leave_row) / p;
    xb_.noalias() -= w * t;
    xb_(leave_row) = t;
    clamp_xb();

    in_basis_[basis_[leave_row]] = 0;
    basis_[leave_row] = entering;
    in_basis_[entering] = 1;

    ++pivots_since_refactor_;
    if (pivots_since_refactor_ >= kRefactorEvery) {
      pivots_since_refactor_ = 0;
      if (!refactor()) throw std::runtime_error("simplex: singular basis");
    }
  }

  // ---- the simplex loop ------------------------------------------------

  // Runs primal simplex on the current basis with the supplied costs over
  // the extended column space.  Only real columns may enter; artificials can
  // leave but never re-enter.  Returns false on an unbounded direction.
  bool run(const Eigen::VectorXd& ext_cost) {
    while (true) {
      if (iterations_ > max_iterations_) {
        throw std::runtime_error("simplex: iteration cap exceeded");
      }
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = ext_cost(basis_[i]);
      const Eigen::VectorXd pi = binv_.transpose() * cb;
      const Eigen::VectorXd d =
          ext_cost.head(n_) - A_.transpose() * pi;  // real columns only

      const bool bland = iterations_ >= bland_after_;
      int entering = -1;
      double best = -kDualTol;
      for (int j = 0; j < n_; ++j) {
        if (in_basis_[j]) continue;
        const double dj = d(j);
        if (dj < best) {
          entering = j;
          if (bland) break;  // first (lowest-index) eligible column
          best = dj;
        }
      }
      if (entering < 0) return true;  // optimal for these costs

      const Eigen::VectorXd w = binv_ * A_.col(entering);
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (w(i) <= kPivotTol) continue;
        const double ratio = std::max(xb_(i), 0.0) / w(i);
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          leave = i;
        } else if (ratio <= best_ratio + 1e-12 && leave >= 0) {
          if (bland) {
            if (basis_[i] < basis_[leave]) leave = i;
          } else if (w(i) > w(leave)) {
            leave = i;  // larger pivot for stability
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction

      ++iterations_;
      pivot(entering, leave, w);
    }
  }

  bool phase1() {
    std::vector<int> art(m_);
    for (int i = 0; i < m_; ++i) art[i] = n_ + i;
    set_basis(art);
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = b_;
    pivots_since_refactor_ = 0;

    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n_ + m_);
    c1.tail(m_).setConstant(1.0);
    if (!run(c1)) throw std::runtime_error("simplex: phase 1 unbounded");

    double art_sum = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= n_) art_sum += std::max(xb_(i), 0.0);
    }
    if (art_sum > std::max(feas_tol_, 1e-7 * scale_)) return false;

    drive_out_artificials();
    return true;
  }

  // Pivot any artificial still basic (at level ~0) onto a real column; rows
  // with no eligible column are redundant constraints and keep their
  // artificial pinned at zero.
  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int entering = -1;
      double best = 0.0;
      for (int j = 0; j < n_; ++j) {
        if (in_basis_[j]) continue;
        const double wr = binv_.row(r).dot(A_.col(j));
        if (std::abs(wr) > std::max(best, 1e-7)) {
          best = std::abs(wr);
          entering = j;
        }
      }
      if (entering < 0) continue;
      const Eigen::VectorXd w = binv_ * A_.col(entering);
      ++iterations_;
      pivot(entering, r, w);
    }
  }

  SimplexResult phase2() {
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n_ + m_);
    c2.head(n_) = cost_;
    const bool bounded = run(c2);

    SimplexResult res;
    res.iterations = iterations_;
    if (!bounded) {
      res.status = LPStatus::Unbounded;
      return res;
    }

    // clean solve from the final basis so equal bases give bit-equal answers
    if (!refactor()) throw std::runtime_error("simplex: singular final basis");

    res.status = LPStatus::Optimal;
    res.z = Eigen::VectorXd::Zero(n_);
    res.basis.clear();
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) {
        res.z(basis_[i]) = std::max(xb_(i), 0.0);
        res.basis.push_back(basis_[i]);
      }
    }
    std::sort(res.basis.begin(), res.basis.end());
    res.objective = cost_.dot(res.z);

    const double resid = (A_ * res.z - b_).lpNorm<Eigen::Infinity>();
    if (resid > std::max(feas_tol_, 1e-9 * scale_)) {
      throw std::runtime_error("simplex: residual above tolerance after solve");
    }
    return res;
  }

  bool try_warm_start(const std::vector<int>& warm) {
    if (static_cast<int>(warm.size()) != m_) return false;
    std::vector<int> sorted = warm;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      return false;
    }
    for (int j : warm) {
      if (j < 0 || j >= n_) return false;
    }
    set_basis(warm);
    pivots_since_refactor_ = 0;
    if (!refactor()) return false;
    if (xb_.minCoeff() < -std::max(feas_tol_, 1e-9 * scale_)) return false;
    clamp_xb();
    for (int i = 0; i < m_; ++i) xb_(i) = std::max(xb_(i), 0.0);
    return true;
  }

  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, cost_;
  double feas_tol_;
  double scale_ = 1.0;
  int m_ = 0, n_ = 0;
  int max_iterations_ = 0, bland_after_ = 0;
  int iterations_ = 0, pivots_since_refactor_ = 0;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
};

StandardLP build_split_lp(const BasisPursuitLP& problem) {
  const int m = static_cast<int>(problem.H.rows());
  const int n = static_cast<int>(problem.H.cols());
  if (m > n) throw std::domain_error("solve_bp: requires M <= N");
  if (problem.y.size() != m) throw std::invalid_argument("solve_bp: y size");
  if (problem.perturb_node >= n) {
    throw std::domain_error("solve_bp: perturb_node out of range");
  }
  if (problem.perturb_node >= 0 && std::abs(problem.f) >= 1.0) {
    throw std::domain_error(
        "solve_bp: |f| >= 1 makes the perturbed cost non-coercive");
  }

  StandardLP lp;
  lp.A.resize(m, 2 * n);
  lp.A.leftCols(n) = problem.H;
  lp.A.rightCols(n) = -problem.H;
  lp.b = problem.y;
  lp.c = Eigen::VectorXd::Ones(2 * n);
  if (problem.perturb_node >= 0) {
    lp.c(problem.perturb_node) = 1.0 - problem.f;
    lp.c(n + problem.perturb_node) = 1.0 + problem.f;
  }
  return lp;
}

double default_feas_tol(const BasisPursuitLP& problem, double feas_tol) {
  if (feas_tol > 0.0) return feas_tol;
  const double ymax = problem.y.size() ? problem.y.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max(1e-9 * ymax, 1e-12);
}

LPSolution from_simplex(const BasisPursuitLP& problem, SimplexResult&& sim) {
  const int n = static_cast<int>(problem.H.cols());
  LPSolution sol;
  sol.status = sim.status;
  sol.iterations = sim.iterations;
  sol.basis = std::move(sim.basis);
  if (sim.status == LPStatus::Optimal) {
    sol.x_hat = sim.z.head(n) - sim.z.tail(n);
    sol.objective = sim.objective;
  } else {
    sol.x_hat = Eigen::VectorXd::Zero(n);
    sol.objective = 0.0;
  }
  return sol;
}

}  // namespace

SimplexResult simplex_solve(const StandardLP& lp, double feas_tol,
                            const std::vector<int>* warm_basis) {
  RevisedSimplex solver(lp, feas_tol);
  return solver.solve(warm_basis);
}

LPSolution solve_bp(const BasisPursuitLP& problem, double feas_tol) {
  const StandardLP lp = build_split_lp(problem);
  return from_simplex(problem,
                      simplex_solve(lp, default_feas_tol(problem, feas_tol)));
}

LPSolution solve_bp_warm(const BasisPursuitLP& problem,
                         const std::vector<int>& prior_basis,
                         double feas_tol) {
  const StandardLP lp = build_split_lp(problem);
  return from_simplex(
      problem,
      simplex_solve(lp, default_feas_tol(problem, feas_tol), &prior_basis));
}

}  // namespace cavreg
