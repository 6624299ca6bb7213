#include "threshreg/penalties.hpp"
#include "threshreg/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace threshreg;

namespace {

// Independent oracle: exhaustive scan of the univariate objective
// (z - b)^2/2 + p(|b|). For z >= 0 the minimizer lies in [0, z] because the
// quadratic term grows outside that interval while the penalty is
// nondecreasing in |b|; the objective is even under (z, b) -> (-z, -b).
double grid_minimizer(double z, const PenaltySpec& pen, double step) {
  const double az = std::abs(z);
  double best_b = 0.0;
  double best_val = 0.5 * az * az;
  const long count = static_cast<long>(az / step) + 1;
  for (long k = 1; k <= count; ++k) {
    const double b = std::min(k * step, az);
    const double d = az - b;
    const double val = 0.5 * d * d + penalty_value(pen, b);
    if (val < best_val) {
      best_val = val;
      best_b = b;
    }
  }
  return z >= 0.0 ? best_b : -best_b;
}

}  // namespace

TEST_CASE("penalty values match the closed forms") {
  PenaltySpec hard{PenaltyFamily::Hard, 1.0, 1e-2};
  CHECK(penalty_value(hard, 2.0) == doctest::Approx(0.5));
  CHECK(penalty_value(hard, 0.5) == doctest::Approx(0.375));
  CHECK(penalty_value(hard, 0.0) == 0.0);

  PenaltySpec sica{PenaltyFamily::Sica, 1.0, 1.0};
  CHECK(penalty_value(sica, 1.0) == doctest::Approx(1.0));

  PenaltySpec l0{PenaltyFamily::L0, 0.6, 1e-2};
  CHECK(penalty_value(l0, 1e-12) == doctest::Approx(0.18));
  CHECK(penalty_value(l0, 0.0) == 0.0);

  CHECK_THROWS_AS(penalty_value(hard, -0.1), UsageError);
}

TEST_CASE("penalty values are nondecreasing in t and lambda") {
  for (PenaltyFamily fam : {PenaltyFamily::Hard, PenaltyFamily::L0,
                            PenaltyFamily::Sica, PenaltyFamily::Lasso}) {
    double prev = 0.0;
    for (double t = 0.0; t <= 2.0; t += 0.05) {
      const double v = penalty_value({fam, 0.8, 0.05}, t);
      CHECK(v >= prev - 1e-15);
      CHECK(v <= penalty_value({fam, 1.2, 0.05}, t) + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("hard threshold rule") {
  PenaltySpec pen{PenaltyFamily::Hard, 0.7, 1e-2};
  CHECK(univariate_minimize(0.5, pen).value == 0.0);
  CHECK(univariate_minimize(0.5, pen).was_thresholded);
  CHECK(univariate_minimize(1.2, pen).value == 1.2);
  CHECK_FALSE(univariate_minimize(1.2, pen).was_thresholded);
  // tie |z| = lambda goes to zero
  CHECK(univariate_minimize(0.7, pen).value == 0.0);
  CHECK(univariate_minimize(-0.7, pen).value == 0.0);
}

TEST_CASE("soft threshold rule") {
  PenaltySpec pen{PenaltyFamily::Lasso, 0.7, 1e-2};
  CHECK(univariate_minimize(1.2, pen).value == doctest::Approx(0.5));
  CHECK(univariate_minimize(-1.2, pen).value == doctest::Approx(-0.5));
  CHECK(univariate_minimize(0.6, pen).value == 0.0);
}

TEST_CASE("SICA threshold matches the grid oracle on the spec instance") {
  PenaltySpec pen{PenaltyFamily::Sica, 0.5, 0.01};
  const double got = univariate_minimize(0.6, pen).value;
  const double want = grid_minimizer(0.6, pen, 1e-6);
  CHECK(std::abs(got - want) < 1e-5);
}

TEST_CASE("hard and L0 rules are bitwise identical") {
  RandomStream rng(101, 0, 1);
  for (int t = 0; t < 500; ++t) {
    const double z = 4.0 * (rng.uniform() - 0.5);
    const double lam = 1.5 * rng.uniform();
    const double h =
        univariate_minimize(z, {PenaltyFamily::Hard, lam, 1e-2}).value;
    const double l =
        univariate_minimize(z, {PenaltyFamily::L0, lam, 1e-2}).value;
    CHECK(h == l);
  }
}

TEST_CASE("univariate minimizer is odd and monotone in |z|") {
  RandomStream rng(103, 0, 1);
  for (PenaltyFamily fam : {PenaltyFamily::Hard, PenaltyFamily::Sica,
                            PenaltyFamily::Lasso}) {
    for (int t = 0; t < 200; ++t) {
      const double z = 3.0 * (rng.uniform() - 0.5);
      const double lam = rng.uniform();
      const double a = 0.01 + rng.uniform();
      PenaltySpec pen{fam, lam, a};
      CHECK(univariate_minimize(-z, pen).value ==
            doctest::Approx(-univariate_minimize(z, pen).value));
      const double z2 = z * 1.3;
      CHECK(std::abs(univariate_minimize(z2, pen).value) + 1e-12 >=
            std::abs(univariate_minimize(z, pen).value));
    }
  }
}

TEST_CASE("univariate minimizer agrees with brute force across families") {
  RandomStream rng(107, 0, 1);
  const PenaltyFamily fams[] = {PenaltyFamily::Hard, PenaltyFamily::L0,
                                PenaltyFamily::Sica, PenaltyFamily::Lasso};
  for (int t = 0; t < 200; ++t) {
    const double z = 6.0 * (rng.uniform() - 0.5);
    const double lam = 1.2 * rng.uniform();
    const double a = t % 2 == 0 ? 0.01 : 0.3 * rng.uniform() + 0.01;
    PenaltySpec pen{fams[t % 4], lam, a};
    const double got = univariate_minimize(z, pen).value;
    const double want = grid_minimizer(z, pen, 1e-4);
    // a coarse step suffices here; the acceptance suite runs step 1e-6
    CHECK(std::abs(got - want) < 2e-4);
  }
}

TEST_CASE("maximum concavity of the hard penalty is 1") {
  std::vector<double> grid;
  for (double t = 0.01; t < 2.0; t += 0.01) grid.push_back(t);
  PenaltySpec pen{PenaltyFamily::Hard, 1.0, 1e-2};
  CHECK(std::abs(max_concavity(pen, grid) - 1.0) < 1e-6);
}

TEST_CASE("maximum concavity of the lasso penalty is 0") {
  std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
  CHECK(max_concavity({PenaltyFamily::Lasso, 0.8, 1e-2}, grid) == 0.0);
}

TEST_CASE("SICA concavity matches the analytic difference quotient") {
  // p'(t) = lam a (a+1)/(a+t)^2, so the quotient over [t1, t2] simplifies to
  // lam a (a+1) (2a + t1 + t2) / ((a+t1)^2 (a+t2)^2) -- an independent route.
  const double lam = 1.0, a = 0.01;
  std::vector<double> grid;
  for (double t = 1e-4; t < 0.1; t *= 1.25) grid.push_back(t);
  double expected = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    for (size_t j = i + 1; j < grid.size(); ++j) {
      const double t1 = grid[i], t2 = grid[j];
      const double q = lam * a * (a + 1.0) * (2.0 * a + t1 + t2) /
                       ((a + t1) * (a + t1) * (a + t2) * (a + t2));
      expected = std::max(expected, q);
    }
  const double got = max_concavity({PenaltyFamily::Sica, lam, a}, grid);
  CHECK(got == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("max_concavity rejects degenerate grids") {
  std::vector<double> one{0.5};
  CHECK_THROWS_AS(max_concavity({PenaltyFamily::Hard, 1.0, 1e-2}, one),
                  UsageError);
  std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(max_concavity({PenaltyFamily::Hard, 1.0, 1e-2}, bad),
                  UsageError);
}

TEST_CASE("cubic solver finds all real roots") {
  double roots[3];
  // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
  const int k = solve_cubic(-6.0, 11.0, -6.0, roots);
  REQUIRE(k == 3);
  std::vector<double> sorted(roots, roots + 3);
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted[0] == doctest::Approx(1.0));
  CHECK(sorted[1] == doctest::Approx(2.0));
  CHECK(sorted[2] == doctest::Approx(3.0));
  // single real root: x^3 + x + 1
  CHECK(solve_cubic(0.0, 1.0, 1.0, roots) == 1);
  CHECK(roots[0] == doctest::Approx(-0.6823278038280193));
}
