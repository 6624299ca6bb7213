#include "threshreg/penalties.hpp"

#include <algorithm>
#include <cmath>

namespace threshreg {

double penalty_value(const PenaltySpec& pen, double t) {
  if (t < 0.0) throw UsageError("penalty_value: t must be nonnegative");
  pen.validate();
  const double lam = pen.lambda;
  switch (pen.family) {
    case PenaltyFamily::Hard: {
      const double r = std::max(lam - t, 0.0);
      return 0.5 * (lam * lam - r * r);
    }
    case PenaltyFamily::L0:
      return t != 0.0 ? 0.5 * lam * lam : 0.0;
    case PenaltyFamily::Sica: {
      const double a = pen.shape_a;
      return lam * (a + 1.0) * t / (a + t);
    }
    case PenaltyFamily::Lasso:
      return lam * t;
  }
  return 0.0;
}

double penalty_derivative(const PenaltySpec& pen, double t) {
  if (t < 0.0) throw UsageError("penalty_derivative: t must be nonnegative");
  pen.validate();
  const double lam = pen.lambda;
  switch (pen.family) {
    case PenaltyFamily::Hard:
      return std::max(lam - t, 0.0);
    case PenaltyFamily::L0:
      return 0.0;  // flat on (0, inf); the jump at 0 is not differentiable
    case PenaltyFamily::Sica: {
      const double a = pen.shape_a;
      const double d = a + t;
      return lam * a * (a + 1.0) / (d * d);
    }
    case PenaltyFamily::Lasso:
      return lam;
  }
  return 0.0;
}

int solve_cubic(double a2, double a1, double a0, double roots[3]) {
  // Depressed form x = u - a2/3: u^3 + p u + q = 0.
  const double shift = a2 / 3.0;
  const double p = a1 - a2 * a2 / 3.0;
  const double q = a0 - a1 * a2 / 3.0 + 2.0 * a2 * a2 * a2 / 27.0;
  int count = 0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    roots[count++] = u + v - shift;
  } else if (p == 0.0 && q == 0.0) {
    roots[count++] = -shift;
  } else {
    // Three real roots (trigonometric form).
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots[count++] = m * std::cos(theta - 2.0 * M_PI * k / 3.0) - shift;
  }
  // Newton polish against the monic cubic.
  for (int i = 0; i < count; ++i) {
    double x = roots[i];
    for (int it = 0; it < 3; ++it) {
      const double f = ((x + a2) * x + a1) * x + a0;
      const double fp = (3.0 * x + 2.0 * a2) * x + a1;
      if (fp == 0.0) break;
      x -= f / fp;
    }
    roots[i] = x;
  }
  return count;
}

namespace {

double sica_minimize(double z, double lam, double a) {
  // For z >= 0 the minimizer lies in [0, z]; candidates are 0 and positive
  // roots of (b - z)(a + b)^2 + lam a (a + 1) = 0.
  const double az = std::abs(z);
  double best = 0.0;
  double best_val = 0.5 * az * az;
  double roots[3];
  const int k = solve_cubic(2.0 * a - az, a * (a - 2.0 * az),
                            lam * a * (a + 1.0) - a * a * az, roots);
  for (int i = 0; i < k; ++i) {
    const double b = roots[i];
    if (!(b > 0.0) || !std::isfinite(b)) continue;
    const double d = az - b;
    const double val = 0.5 * d * d + lam * (a + 1.0) * b / (a + b);
    if (val < best_val) {
      best_val = val;
      best = b;
    }
  }
  return z >= 0.0 ? best : -best;
}

}  // namespace

ThresholdResult univariate_minimize(double z, const PenaltySpec& pen) {
  pen.validate();
  const double lam = pen.lambda;
  double value = 0.0;
  switch (pen.family) {
    case PenaltyFamily::Hard:
    case PenaltyFamily::L0:
      value = std::abs(z) > lam ? z : 0.0;
      break;
    case PenaltyFamily::Lasso: {
      const double mag = std::abs(z) - lam;
      value = mag > 0.0 ? (z > 0.0 ? mag : -mag) : 0.0;
      break;
    }
    case PenaltyFamily::Sica:
      value = sica_minimize(z, lam, pen.shape_a);
      break;
  }
  return {value, value == 0.0 && z != 0.0};
}

double max_concavity(const PenaltySpec& pen, std::span<const double> grid) {
  pen.validate();
  if (grid.size() < 2)
    throw UsageError("max_concavity: grid needs at least 2 points");
  std::vector<double> deriv(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw UsageError("max_concavity: grid must be increasing and positive");
    deriv[i] = penalty_derivative(pen, grid[i]);
  }
  double sup = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    for (size_t j = i + 1; j < grid.size(); ++j)
      sup = std::max(sup, -(deriv[j] - deriv[i]) / (grid[j] - grid[i]));
  return sup;
}

}  // namespace threshreg
