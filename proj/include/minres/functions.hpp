#pragma once

// Builtin target functions for approximation experiments, with bounds on
// their modulus of continuity.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>

#include "minres/errors.hpp"

namespace minres {

struct TargetFunction {
  std::string name;
  int n = 0;  // 0: any dimension
  std::function<double(std::span<const double>)> f;
  double lipschitz = 0.0;    // upper bound on |f(x) - f(y)| / |x - y|
  double oscillation = 0.0;  // upper bound on max f - min f over the cube

  double operator()(std::span<const double> x) const { return f(x); }

  /// Upper bound on the modulus of continuity omega_f(delta).
  [[nodiscard]] double omega(double delta) const { return std::min(lipschitz * delta, oscillation); }
};

/// x2 sin(2 pi x1).
inline double qsin(double x1, double x2) { return x2 * std::sin(2.0 * std::numbers::pi * x1); }

/// The MATLAB-style peaks surface.
inline double peaks(double x1, double x2) {
  return 3.0 * (1.0 - x1) * (1.0 - x1) * std::exp(-x1 * x1 - (x2 + 1.0) * (x2 + 1.0)) -
         10.0 * (x1 / 5.0 - x1 * x1 * x1 - std::pow(x2, 5)) * std::exp(-x1 * x1 - x2 * x2) -
         (1.0 / 3.0) * std::exp(-(x1 + 1.0) * (x1 + 1.0) - x2 * x2);
}

inline TargetFunction builtin_function(const std::string& name) {
  if (name == "qsin") {
    // |grad| = sqrt(4 pi^2 x2^2 cos^2 + sin^2) <= sqrt(4 pi^2 + 1); range [-1, 1].
    return {"qsin", 2, [](std::span<const double> x) { return qsin(x[0], x[1]); },
            std::sqrt(4.0 * std::numbers::pi * std::numbers::pi + 1.0), 2.0};
  }
  if (name == "peaks") {
    // Gradient norm and range measured on a 4001 x 4001 grid (13.0315 and
    // 6.0614), rounded up.
    return {"peaks", 2, [](std::span<const double> x) { return peaks(x[0], x[1]); }, 13.05, 6.07};
  }
  if (name == "one") return {"one", 0, [](std::span<const double>) { return 1.0; }, 0.0, 0.0};
  throw ParameterError("unknown builtin function '" + name + "' (expected qsin, peaks or one)");
}

}  // namespace minres
