#include "cavreg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "cavreg/stats.hpp"

namespace cavreg {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
QuadRule golub_welsch(int n, const std::function<double(int)>& offdiag,
                      double mu0) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = offdiag(k);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.w[i] = mu0 * v0 * v0;
  }
  return rule;
}

const QuadRule& cached_rule(int n, std::map<int, QuadRule>& cache,
                            std::mutex& mutex,
                            const std::function<QuadRule(int)>& make) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, cache, mutex, [](int m) {
    return golub_welsch(
        m, [](int k) { return std::sqrt(0.5 * k); }, std::sqrt(kPi));
  });
}

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  return cached_rule(n, cache, mutex, [](int m) {
    return golub_welsch(
        m,
        [](int k) {
          return static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
        },
        2.0);
  });
}

double gh_expect(const std::function<double(double)>& g, double sigma,
                 int order) {
  if (sigma == 0.0) return g(0.0);
  const QuadRule& rule = gauss_hermite(order);
  std::vector<double> terms(rule.x.size());
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    terms[i] = rule.w[i] * g(kSqrt2 * sigma * rule.x[i]);
  }
  return pairwise_sum(terms) / std::sqrt(kPi);
}

std::array<double, 2> gh_expect2_adaptive(
    const std::function<std::array<double, 2>(double)>& g, double sigma,
    double rel_tol, const char* what) {
  if (sigma == 0.0) return g(0.0);
  std::array<double, 2> prev{0.0, 0.0};
  bool have_prev = false;
  for (int order : {61, 121, 241, 481}) {
    const QuadRule& rule = gauss_hermite(order);
    std::vector<double> t0(rule.x.size()), t1(rule.x.size());
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const auto v = g(kSqrt2 * sigma * rule.x[i]);
      t0[i] = rule.w[i] * v[0];
      t1[i] = rule.w[i] * v[1];
    }
    const std::array<double, 2> cur{pairwise_sum(t0) / std::sqrt(kPi),
                                    pairwise_sum(t1) / std::sqrt(kPi)};
    if (have_prev) {
      const double d0 = std::abs(cur[0] - prev[0]) /
                        std::max({std::abs(cur[0]), std::abs(prev[0]), 1e-14});
      const double d1 = std::abs(cur[1] - prev[1]) /
                        std::max({std::abs(cur[1]), std::abs(prev[1]), 1e-14});
      if (d0 <= rel_tol && d1 <= rel_tol) return cur;
    }
    prev = cur;
    have_prev = true;
  }
  throw std::runtime_error(std::string("quadrature did not settle: ") + what);
}

std::vector<double> graded_panels(double a, double b,
                                  const std::vector<double>& centers,
                                  double fine_scale, double max_width) {
  if (!(b > a)) return {a, b};
  const double h0 = std::max(fine_scale, (b - a) * 1e-12);
  const double cap = std::max(max_width, h0);

  std::vector<double> pts{a, b};
  auto push_ladder = [&](double c) {
    pts.push_back(c);
    double off = h0;
    double step = h0;
    while (c + off < b || c - off > a) {
      if (c + off < b) pts.push_back(c + off);
      if (c - off > a) pts.push_back(c - off);
      step = std::min(step * 2.0, cap);
      off += step;
    }
  };
  for (double c : centers) {
    if (c >= a && c <= b) push_ladder(c);
  }
  if (pts.size() == 2) push_ladder(0.5 * (a + b));

  // also enforce the width cap globally
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](double u, double v) {
                          return std::abs(u - v) < 0.25 * h0;
                        }),
            pts.end());
  std::vector<double> out;
  out.push_back(a);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double prev = out.back();
    const double next = pts[i];
    const double gap = next - prev;
    if (gap > cap) {
      const int extra = static_cast<int>(std::ceil(gap / cap));
      for (int k = 1; k < extra; ++k) {
        out.push_back(prev + gap * k / extra);
      }
    }
    out.push_back(next);
  }
  out.front() = a;
  out.back() = b;
  return out;
}

double integrate_on_panels(const std::function<double(double)>& g,
                           const std::vector<double>& panels,
                           int points_per_panel) {
  const QuadRule& rule = gauss_legendre(points_per_panel);
  std::vector<double> sums;
  sums.reserve(panels.size());
  for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
    const double lo = panels[p], hi = panels[p + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      s += rule.w[i] * g(mid + half * rule.x[i]);
    }
    sums.push_back(s * half);
  }
  return pairwise_sum(sums);
}

std::array<double, 2> gauss_expect2_graded(
    const std::function<std::array<double, 2>(double)>& g, double sigma,
    std::vector<double> breakpoints, double fine_scale, double rel_tol,
    const char* what, Exec exec) {
  if (sigma == 0.0) return g(0.0);

  // work in z = x / sigma so the Gaussian weight has unit scale
  const double zmax = 15.0;
  std::vector<double> centers{0.0};
  for (double bp : breakpoints) {
    const double z = bp / sigma;
    if (std::abs(z) < zmax) centers.push_back(z);
  }
  const double h0 = std::max(fine_scale / sigma, 1e-9);
  const QuadRule& rule = gauss_legendre(16);

  auto eval = [&](double scale) -> std::array<double, 2> {
    const auto panels = graded_panels(-zmax, zmax, centers, scale, 2.0);
    const std::int64_t np = static_cast<std::int64_t>(panels.size()) - 1;
    std::vector<double> s0(np), s1(np);
    parallel_for(
        np,
        [&](std::int64_t p) {
          const double lo = panels[p], hi = panels[p + 1];
          const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
          double a0 = 0.0, a1 = 0.0;
          for (std::size_t i = 0; i < rule.x.size(); ++i) {
            const double z = mid + half * rule.x[i];
            const auto v = g(sigma * z);
            const double wz = rule.w[i] * normal_pdf(z);
            a0 += wz * v[0];
            a1 += wz * v[1];
          }
          s0[p] = a0 * half;
          s1[p] = a1 * half;
        },
        exec);
    return {pairwise_sum(s0), pairwise_sum(s1)};
  };

  std::array<double, 2> coarse = eval(h0);
  for (int round = 1; round <= 3; ++round) {
    const std::array<double, 2> fine = eval(h0 / (1 << round));
    const double d0 = std::abs(fine[0] - coarse[0]) /
                      std::max({std::abs(fine[0]), std::abs(coarse[0]), 1e-14});
    const double d1 = std::abs(fine[1] - coarse[1]) /
                      std::max({std::abs(fine[1]), std::abs(coarse[1]), 1e-14});
    if (d0 <= rel_tol && d1 <= rel_tol) return fine;
    coarse = fine;
  }
  throw std::runtime_error(std::string("graded quadrature did not settle: ") +
                           what);
}

}  // namespace cavreg
