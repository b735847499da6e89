#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "cavreg/parallel.hpp"

namespace cavreg {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Hermite rule of order n for weight exp(-x^2), via Golub-Welsch.
// Cached; thread-safe.
const QuadRule& gauss_hermite(int n);

// Gauss-Legendre rule of order n on [-1, 1]. Cached; thread-safe.
const QuadRule& gauss_legendre(int n);

// E[g(X)] for X ~ N(0, sigma^2) with a fixed Gauss-Hermite order.
double gh_expect(const std::function<double(double)>& g, double sigma, int order);

// Adaptive Gauss-Hermite expectation of a pair of smooth functionals:
// order doubles (61 -> 121 -> 241 -> 481) until both components change by
// less than rel_tol; throws std::runtime_error if they never settle.
std::array<double, 2> gh_expect2_adaptive(
    const std::function<std::array<double, 2>(double)>& g, double sigma,
    double rel_tol, const char* what);

// Panel boundaries for composite Gauss-Legendre on [a, b]: widths start at
// fine_scale next to each center, grow geometrically away from them, and
// never exceed max_width.
std::vector<double> graded_panels(
    double a, double b, const std::vector<double>& centers, double fine_scale,
    double max_width = std::numeric_limits<double>::infinity());

double integrate_on_panels(const std::function<double(double)>& g,
                           const std::vector<double>& panels,
                           int points_per_panel = 16);

// E[g(X)] (componentwise, g valued in R^2) for X ~ N(0, sigma^2) when g is
// only piecewise smooth: the breakpoints become exact panel edges, panels
// are graded with the given fine scale, and the grid is refined until the
// result settles to rel_tol (throws if it never does).  Panel contributions
// can be evaluated in parallel; the reduction order is fixed either way.
std::array<double, 2> gauss_expect2_graded(
    const std::function<std::array<double, 2>(double)>& g, double sigma,
    std::vector<double> breakpoints, double fine_scale, double rel_tol,
    const char* what, Exec exec = Exec::Serial);

}  // namespace cavreg
