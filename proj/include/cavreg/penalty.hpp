#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cavreg {

enum class PenaltyKind { L1, SmoothedL1, Ridge };

inline const char* to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::SmoothedL1: return "smoothed_l1";
    case PenaltyKind::Ridge: return "ridge";
  }
  return "?";
}

// Separable penalty U(x).  Conventions:
//   L1:          U(x) = lambda * |x|
//   SmoothedL1:  U(x) = lambda * sqrt(x^2 + epsilon^2)
//   Ridge:       U(x) = lambda * x^2 / 2
// SmoothedL1 converges pointwise to the L1 value as epsilon -> 0
// (|U_eps(x) - lambda|x|| <= lambda * epsilon for all x).
struct PenaltyModel {
  PenaltyKind kind = PenaltyKind::L1;
  double lambda = 1.0;
  double epsilon = 0.0;  // SmoothedL1 only

  static PenaltyModel l1(double lambda) { return {PenaltyKind::L1, lambda, 0.0}; }
  static PenaltyModel smoothed_l1(double lambda, double epsilon) {
    return {PenaltyKind::SmoothedL1, lambda, epsilon};
  }
  static PenaltyModel ridge(double lambda) {
    return {PenaltyKind::Ridge, lambda, 0.0};
  }

  void validate() const {
    if (lambda < 0.0) throw std::domain_error("penalty: lambda must be >= 0");
    if (kind == PenaltyKind::SmoothedL1 && !(epsilon > 0.0)) {
      throw std::domain_error("penalty: smoothed_l1 requires epsilon > 0");
    }
  }

  double value(double x) const {
    switch (kind) {
      case PenaltyKind::L1: return lambda * std::abs(x);
      case PenaltyKind::SmoothedL1:
        return lambda * std::sqrt(x * x + epsilon * epsilon);
      case PenaltyKind::Ridge: return 0.5 * lambda * x * x;
    }
    return 0.0;
  }

  // sign(0) := 0 at the L1 kink
  double deriv(double x) const {
    switch (kind) {
      case PenaltyKind::L1:
        return x > 0.0 ? lambda : (x < 0.0 ? -lambda : 0.0);
      case PenaltyKind::SmoothedL1:
        return lambda * x / std::sqrt(x * x + epsilon * epsilon);
      case PenaltyKind::Ridge: return lambda * x;
    }
    return 0.0;
  }

  // defined for the smooth kinds only
  double second_deriv(double x) const {
    switch (kind) {
      case PenaltyKind::SmoothedL1: {
        const double r2 = x * x + epsilon * epsilon;
        return lambda * epsilon * epsilon / (r2 * std::sqrt(r2));
      }
      case PenaltyKind::Ridge: return lambda;
      case PenaltyKind::L1:
        throw std::domain_error("penalty: L1 has no second derivative");
    }
    return 0.0;
  }

  bool smooth() const { return kind != PenaltyKind::L1; }
};

}  // namespace cavreg
