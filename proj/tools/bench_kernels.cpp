// Benchmark of the OpenMP kernels against their serial reference paths.
// Each workload runs in both modes; the results must match exactly and the
// table reports the speedup.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "cavreg/experiment.hpp"
#include "cavreg/instance.hpp"
#include "cavreg/meanfield.hpp"
#include "cavreg/suscept.hpp"

using namespace cavreg;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct Workload {
  const char* name;
  // returns a checksum; must be identical across modes
  std::function<double(Exec)> run;
};

int run_all(bool small) {
  const int exp_n = small ? 80 : 200;
  const int exp_nodes = small ? 10 : 40;
  const int app_n = small ? 100 : 300;
  const int app_seeds = small ? 4 : 12;

  const Workload workloads[] = {
      {"response_experiment",
       [&](Exec exec) {
         const ProblemInstance inst =
             draw_instance(exp_n, exp_n / 2, {0.2, 1.0}, 0.0, 99);
         const ExperimentReport rep = run_response_experiment(
             inst, default_f_grid(), exp_nodes, 1, exec);
         double sum = rep.mse_empirical;
         for (double v : rep.response.avg_response) sum += v;
         return sum;
       }},
      {"susceptibility_seeds",
       [&](Exec exec) {
         const SusceptibilityReport rep =
             verify_susceptibility_identities(app_n, app_n / 2, PenaltyModel::ridge(1.0),
                               {0.2, 1.0}, app_seeds, 0.5, 7, exec);
         return rep.chi_matrix_diag_mean + rep.offdiag_rms +
                rep.trace_identity_lhs;
       }},
      {"phase_boundary_scan",
       [&](Exec exec) {
         const auto pts = scan_phase_boundary({0.15, 0.2, 0.25, 0.3},
                                              {0.2, 0.9}, 2e-3, 1.0, exec);
         double sum = 0.0;
         for (const auto& p : pts) sum += p.alpha_c;
         return sum;
       }},
  };

  std::printf("%-24s %12s %12s %9s  %s\n", "workload", "serial [s]",
              "openmp [s]", "speedup", "results");
  int rc = 0;
  for (const auto& w : workloads) {
    const double t0 = now_seconds();
    const double serial = w.run(Exec::Serial);
    const double t1 = now_seconds();
    const double parallel = w.run(Exec::Parallel);
    const double t2 = now_seconds();
    const bool match = serial == parallel;
    if (!match) rc = 1;
    std::printf("%-24s %12.3f %12.3f %8.2fx  %s\n", w.name, t1 - t0, t2 - t1,
                (t1 - t0) / std::max(t2 - t1, 1e-9),
                match ? "identical" : "MISMATCH");
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  bool small = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--small") == 0) small = true;
  }
  return run_all(small);
}
