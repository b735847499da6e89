#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cavreg/experiment.hpp"
#include "cavreg/lp.hpp"
#include "cavreg/meanfield.hpp"
#include "cavreg/rng.hpp"

using namespace cavreg;

TEST_CASE("default f grid shape") {
  const auto grid = default_f_grid();
  CHECK(grid.size() == 21);
  CHECK(std::count(grid.begin(), grid.end(), 0.0) == 1);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(grid.front() == doctest::Approx(-0.5));
  CHECK(grid.back() == doctest::Approx(0.5));
}

TEST_CASE("response experiment on a small instance") {
  const ProblemInstance inst = draw_instance(60, 30, {0.2, 1.0}, 0.0, 400);
  const ExperimentReport rep =
      run_response_experiment(inst, default_f_grid(), 12, 400, Exec::Serial);

  CHECK(rep.N == 60);
  CHECK(rep.M == 30);
  CHECK(rep.K == inst.nonzero_count());
  CHECK(rep.failed_cells == 0);
  CHECK_FALSE(rep.partial);
  REQUIRE(rep.response.node_ids.size() == 12);

  // avg_response(0) = 0 exactly
  const auto& grid = rep.response.f_grid;
  const auto i0 = std::find(grid.begin(), grid.end(), 0.0) - grid.begin();
  CHECK(rep.response.avg_response[i0] == 0.0);

  // staircases: consecutive values either repeat or jump; count of distinct
  // levels stays at or below the number of grid points
  for (const auto& stair : rep.response.staircases) {
    REQUIRE(stair.size() == grid.size());
    for (double v : stair) CHECK(std::isfinite(v));
  }

  // average response is nondecreasing in f at grid resolution
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(rep.response.avg_response[i] >=
          rep.response.avg_response[i - 1] - 1e-9);
  }

  // u_a(0) from the perturbed pipeline equals the unperturbed coordinate
  const LPSolution base = solve_bp({inst.H, inst.y, -1, 0.0});
  for (std::size_t k = 0; k < rep.response.node_ids.size(); ++k) {
    const int a = rep.response.node_ids[k];
    CHECK(std::abs(rep.response.staircases[k][i0] -
                   (base.x_hat(a) - inst.x0(a))) <= 1e-9);
  }
}

TEST_CASE("serial and parallel experiments are bit-identical") {
  const ProblemInstance inst = draw_instance(50, 25, {0.2, 1.0}, 0.0, 401);
  const ExperimentReport a =
      run_response_experiment(inst, default_f_grid(), 10, 7, Exec::Serial);
  const ExperimentReport b =
      run_response_experiment(inst, default_f_grid(), 10, 7, Exec::Parallel);
  REQUIRE(a.response.staircases.size() == b.response.staircases.size());
  for (std::size_t k = 0; k < a.response.staircases.size(); ++k) {
    CHECK(a.response.staircases[k] == b.response.staircases[k]);
  }
  CHECK(a.response.avg_response == b.response.avg_response);
  CHECK(a.mse_empirical == b.mse_empirical);
}

TEST_CASE("determinism: same seed, same report") {
  const ProblemInstance inst = draw_instance(40, 20, {0.25, 1.0}, 0.0, 402);
  const ExperimentReport a =
      run_response_experiment(inst, default_f_grid(), 8, 9, Exec::Parallel);
  const ExperimentReport b =
      run_response_experiment(inst, default_f_grid(), 8, 9, Exec::Parallel);
  CHECK(a.response.node_ids == b.response.node_ids);
  for (std::size_t k = 0; k < a.response.staircases.size(); ++k) {
    CHECK(a.response.staircases[k] == b.response.staircases[k]);
  }
}

TEST_CASE("recovery phase: staircases stay pinned at zero error") {
  // alpha = 0.75, rho = 0.2: perfect recovery, so u_a(0) = 0 and small
  // fields do not move the vertex
  const ProblemInstance inst = draw_instance(80, 60, {0.2, 1.0}, 0.0, 406);
  const ExperimentReport rep =
      run_response_experiment(inst, default_f_grid(), 16, 3, Exec::Parallel);
  CHECK(rep.mse_empirical <= 1e-18);
  const auto& grid = rep.response.f_grid;
  for (const auto& stair : rep.response.staircases) {
    // distinct levels never exceed the grid size
    std::vector<double> levels(stair);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) {
                               return std::abs(a - b) <= 1e-8;
                             }),
                 levels.end());
    CHECK(levels.size() <= grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::abs(grid[i]) <= 1e-3) {
        CHECK(std::abs(stair[i]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("f_grid = {0} yields no fitted slope") {
  const ProblemInstance inst = draw_instance(30, 20, {0.2, 1.0}, 0.0, 403);
  const ExperimentReport rep =
      run_response_experiment(inst, {0.0}, 5, 1, Exec::Serial);
  CHECK_FALSE(rep.response.fitted_chi.has_value());
}

TEST_CASE("noisy instances are rejected") {
  const ProblemInstance inst = draw_instance(30, 20, {0.2, 1.0}, 0.01, 404);
  CHECK_THROWS_AS(run_response_experiment(inst, default_f_grid(), 5, 1),
                  std::domain_error);
}

TEST_CASE("estimate_empirical_chi basics") {
  const ProblemInstance inst = draw_instance(60, 24, {0.2, 1.0}, 0.0, 405);
  const ExperimentReport rep =
      run_response_experiment(inst, default_f_grid(), 10, 2, Exec::Serial);
  REQUIRE(rep.response.fitted_chi.has_value());

  // duplicated report: zero standard error
  const auto [mean, se] = estimate_empirical_chi({rep, rep});
  CHECK(mean == doctest::Approx(*rep.response.fitted_chi));
  CHECK(se == 0.0);

  CHECK_THROWS(estimate_empirical_chi({rep}));
}

TEST_CASE("mse sweep: exact recovery at high alpha, square system at alpha=1") {
  const auto rows =
      mse_sweep({0.75, 1.0}, 0.2, 60, 6, 11, 1.0, Exec::Parallel);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_fail == 0);
  CHECK(rows[0].mse_median <= 1e-10);
  CHECK(rows[0].q_meanfield == 0.0);
  CHECK(rows[1].mse_median <= 1e-9);  // invertible square system
  CHECK(rows[1].q_meanfield == 0.0);
}

TEST_CASE("mse sweep near the error phase tracks the mean-field order parameter") {
  // loose sanity version of the acceptance check, at smaller N
  const auto rows = mse_sweep({0.35}, 0.2, 200, 10, 12, 1.0, Exec::Parallel);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].q_meanfield > 0.0);
  CHECK(rows[0].mse_median > 0.0);
  CHECK(std::abs(rows[0].mse_median - rows[0].q_meanfield) /
            rows[0].q_meanfield <=
        0.5);
}
