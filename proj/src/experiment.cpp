#include "cavreg/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cavreg/lp.hpp"
#include "cavreg/meanfield.hpp"
#include "cavreg/rng.hpp"
#include "cavreg/stats.hpp"

namespace cavreg {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> default_f_grid() {
  std::vector<double> grid{0.0};
  const int per_side = 10;
  const double lo = 1e-4, hi = 0.5;
  for (int k = 0; k < per_side; ++k) {
    const double mag =
        lo * std::pow(hi / lo, static_cast<double>(k) / (per_side - 1));
    grid.push_back(mag);
    grid.push_back(-mag);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

ExperimentReport run_response_experiment(const ProblemInstance& instance,
                                         const std::vector<double>& f_grid,
                                         int node_sample, std::uint64_t seed,
                                         Exec exec, double fit_window_hi) {
  const auto t_start = std::chrono::steady_clock::now();
  if (instance.noise_var != 0.0) {
    throw std::domain_error(
        "run_response_experiment: instance must be noiseless");
  }
  std::vector<double> grid = f_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto zero_it = std::find(grid.begin(), grid.end(), 0.0);
  if (zero_it == grid.end()) {
    throw std::domain_error("run_response_experiment: f_grid must contain 0");
  }
  const int i0 = static_cast<int>(zero_it - grid.begin());
  const int nf = static_cast<int>(grid.size());

  ExperimentReport rep;
  rep.seed = seed;
  rep.N = instance.N;
  rep.M = instance.M;
  rep.K = instance.nonzero_count();

  // shared unperturbed vertex
  const LPSolution base = solve_bp(BasisPursuitLP{instance.H, instance.y, -1, 0.0});
  if (base.status != LPStatus::Optimal) {
    throw std::runtime_error("run_response_experiment: base solve not optimal");
  }
  rep.mse_empirical =
      (base.x_hat - instance.x0).squaredNorm() / static_cast<double>(instance.N);

  // sampled nodes (uniform without replacement, seeded)
  std::vector<int> nodes(instance.N);
  for (int a = 0; a < instance.N; ++a) nodes[a] = a;
  if (node_sample > 0 && node_sample < instance.N) {
    Rng rng(derive_seed(seed, 101));
    for (int k = 0; k < node_sample; ++k) {
      const int j = k + static_cast<int>(rng.below(
                            static_cast<std::uint64_t>(instance.N - k)));
      std::swap(nodes[k], nodes[j]);
    }
    nodes.resize(node_sample);
    std::sort(nodes.begin(), nodes.end());
  }

  ResponseCurve& curve = rep.response;
  curve.f_grid = grid;
  curve.node_ids = nodes;
  curve.staircases.assign(nodes.size(), std::vector<double>(nf, kNan));

  std::vector<int> solves(nodes.size(), 0);
  std::vector<int> fails(nodes.size(), 0);

  parallel_for(
      static_cast<std::int64_t>(nodes.size()),
      [&](std::int64_t k) {
        const int a = nodes[k];
        auto& stair = curve.staircases[k];
        stair[i0] = base.x_hat(a) - instance.x0(a);

        auto march = [&](int begin, int end, int step) {
          std::vector<int> basis = base.basis;
          for (int i = begin; i != end; i += step) {
            BasisPursuitLP prob{instance.H, instance.y, a, grid[i]};
            ++solves[k];
            try {
              const LPSolution sol = solve_bp_warm(prob, basis);
              if (sol.status != LPStatus::Optimal) {
                ++fails[k];
                continue;
              }
              stair[i] = sol.x_hat(a) - instance.x0(a);
              basis = sol.basis;
            } catch (const std::exception&) {
              ++fails[k];
            }
          }
        };
        march(i0 + 1, nf, 1);
        march(i0 - 1, -1, -1);
      },
      exec);

  rep.lp_solves = 1;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    rep.lp_solves += solves[k];
    rep.failed_cells += fails[k];
  }
  rep.partial = rep.failed_cells > 0;

  curve.avg_response.assign(nf, 0.0);
  for (int i = 0; i < nf; ++i) {
    std::vector<double> deltas;
    deltas.reserve(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double u0 = curve.staircases[k][i0];
      const double ui = curve.staircases[k][i];
      if (std::isfinite(u0) && std::isfinite(ui)) deltas.push_back(ui - u0);
    }
    curve.avg_response[i] = deltas.empty() ? kNan : mean_of(deltas);
  }

  // least-squares slope through the origin over |f| <= fit_window_hi
  int pos = 0, neg = 0;
  double sfu = 0.0, sff = 0.0, fmin = kNan;
  for (int i = 0; i < nf; ++i) {
    const double f = grid[i];
    if (std::abs(f) > fit_window_hi || !std::isfinite(curve.avg_response[i])) {
      continue;
    }
    if (f > 0.0) ++pos;
    if (f < 0.0) ++neg;
    if (f != 0.0 && (!std::isfinite(fmin) || std::abs(f) < fmin)) {
      fmin = std::abs(f);
    }
    sfu += f * curve.avg_response[i];
    sff += f * f;
  }
  if (pos >= 3 && neg >= 3 && sff > 0.0) {
    curve.fitted_chi = sfu / sff;
    curve.fit_window = {fmin, fit_window_hi};
  }
  rep.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
  return rep;
}

std::pair<double, double> estimate_empirical_chi(
    const std::vector<ExperimentReport>& reports) {
  std::vector<double> chis;
  for (const auto& r : reports) {
    if (r.response.fitted_chi) chis.push_back(*r.response.fitted_chi);
  }
  if (chis.size() < 2) {
    throw std::runtime_error(
        "estimate_empirical_chi: need at least 2 reports with a fitted slope");
  }
  const double mean = mean_of(chis);
  const double stderr_ =
      sample_stddev(chis) / std::sqrt(static_cast<double>(chis.size()));
  return {mean, stderr_};
}

std::vector<MseSweepPoint> mse_sweep(const std::vector<double>& alpha_grid,
                                     double rho, int N,
                                     int instances_per_point,
                                     std::uint64_t seed, double var0,
                                     Exec exec) {
  if (instances_per_point <= 0) {
    throw std::domain_error("mse_sweep: instances_per_point must be > 0");
  }
  const SignalPrior prior{rho, var0};
  prior.validate();

  std::vector<MseSweepPoint> out;
  out.reserve(alpha_grid.size());

  for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
    const double alpha = alpha_grid[ai];
    const int M = static_cast<int>(std::lround(alpha * N));
    if (M <= 0 || M > N) {
      throw std::domain_error("mse_sweep: alpha*N must round into [1, N]");
    }

    std::vector<double> mses(instances_per_point, kNan);
    parallel_for(
        instances_per_point,
        [&](std::int64_t i) {
          const std::uint64_t s =
              derive_seed(seed, ai * 1000003ull + static_cast<std::uint64_t>(i));
          try {
            const ProblemInstance inst = draw_instance(N, M, prior, 0.0, s);
            const LPSolution sol = solve_bp(BasisPursuitLP{inst.H, inst.y, -1, 0.0});
            if (sol.status == LPStatus::Optimal) {
              mses[i] = (sol.x_hat - inst.x0).squaredNorm() /
                        static_cast<double>(N);
            }
          } catch (const std::exception&) {
            // leave NaN; counted below
          }
        },
        exec);

    MseSweepPoint pt;
    pt.alpha = alpha;
    std::vector<double> good;
    for (double v : mses) {
      if (std::isfinite(v)) good.push_back(v);
      else ++pt.n_fail;
    }
    std::sort(good.begin(), good.end());
    pt.mse_median = quantile_sorted(good, 0.5);
    pt.mse_iqr = quantile_sorted(good, 0.75) - quantile_sorted(good, 0.25);

    if (rho > 0.0 && rho < 1.0 && alpha < 1.0) {
      pt.q_meanfield =
          solve_basis_pursuit_limit(alpha, prior, 0.0, 1e-10).state.q;
    } else if (alpha >= 1.0) {
      pt.q_meanfield = 0.0;
    } else {
      pt.q_meanfield = kNan;
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace cavreg
