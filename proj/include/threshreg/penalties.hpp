#pragma once

#include "threshreg/types.hpp"

#include <span>

namespace threshreg {

struct ThresholdResult {
  double value = 0.0;
  bool was_thresholded = false;  // true iff value == 0 while z != 0
};

// p_lambda(t) for t >= 0. Hard: (lambda^2 - (lambda - t)_+^2)/2;
// L0: lambda^2/2 * 1{t != 0}; SICA: lambda (a+1) t / (a+t); Lasso: lambda t.
double penalty_value(const PenaltySpec& pen, double t);

// dp/dt on (0, inf); right derivative at t = 0.
double penalty_derivative(const PenaltySpec& pen, double t);

// Global minimizer of (z - b)^2 / 2 + p_lambda(|b|) over b in R.
// Hard/L0: z 1{|z| > lambda} (ties at |z| = lambda go to 0).
// Lasso: sgn(z)(|z| - lambda)_+. SICA: best of 0 and the real roots of the
// cubic stationarity condition.
ThresholdResult univariate_minimize(double z, const PenaltySpec& pen);

// Numeric maximum concavity: sup over grid pairs t1 < t2 of
// -(p'(t2) - p'(t1)) / (t2 - t1), with p' evaluated analytically.
double max_concavity(const PenaltySpec& pen, std::span<const double> grid);

// Real roots of x^3 + a2 x^2 + a1 x + a0, Newton-polished. Exposed for the
// SICA threshold and its tests.
int solve_cubic(double a2, double a1, double a0, double roots[3]);

}  // namespace threshreg
