#include "threshreg/refit_shrinkage.hpp"

#include "threshreg/parallel.hpp"
#include "threshreg/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>

namespace threshreg {

RidgeRefit ridge_refit(const RegressionData& data,
                       std::span<const Index> support, double lambda1) {
  if (support.empty()) throw UsageError("ridge_refit: empty support");
  if (!(lambda1 >= 0.0)) throw UsageError("ridge_refit: lambda1 must be >= 0");
  const Index s = static_cast<Index>(support.size());
  Matrix X1(data.n(), s);
  for (Index k = 0; k < s; ++k) {
    if (support[k] < 0 || support[k] >= data.p())
      throw DataError("ridge_refit: support index out of range");
    X1.col(k) = data.X.col(support[k]);
  }
  Vector coef(s);
  if (lambda1 == 0.0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(X1);
    if (qr.rank() < s)
      throw NumericalError(
          "ridge_refit: singular system at lambda1 = 0 (rank " +
          std::to_string(qr.rank()) + " < " + std::to_string(s) + ")");
    coef = qr.solve(data.y);
  } else {
    Matrix gram = X1.transpose() * X1;
    gram.diagonal().array() += lambda1;
    coef = Eigen::LLT<Matrix>(gram).solve(X1.transpose() * data.y);
  }
  RidgeRefit out;
  out.support.assign(support.begin(), support.end());
  out.lambda1 = lambda1;
  out.beta_refitted = Vector::Zero(data.p());
  for (Index k = 0; k < s; ++k) out.beta_refitted[support[k]] = coef[k];
  return out;
}

SpectralModel spectral_model(const Matrix& X0, const Vector& beta0_1,
                             double sigma) {
  if (X0.cols() != beta0_1.size())
    throw DataError("spectral_model: beta0 length != columns of X0");
  if (!X0.allFinite() || !beta0_1.allFinite())
    throw NumericalError("spectral_model: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(X0.transpose() * X0);
  const Index s = X0.cols();
  SpectralModel m;
  m.d.resize(s);
  m.b.resize(s);
  // Eigen returns ascending order; flip to descending. Rows of P are the
  // (transposed) eigenvectors, so b = P beta0_1.
  for (Index i = 0; i < s; ++i) {
    m.d[i] = std::max(0.0, es.eigenvalues()[s - 1 - i]);
    m.b[i] = es.eigenvectors().col(s - 1 - i).dot(beta0_1);
  }
  m.lambda_max = m.d[0];
  m.lambda_min = m.d[s - 1];
  m.sigma = sigma;
  return m;
}

double l2_risk(const SpectralModel& model, double lambda1) {
  const double s2 = model.sigma * model.sigma;
  double sum = 0.0;
  for (Index i = 0; i < model.s(); ++i) {
    const double denom = model.d[i] + lambda1;
    sum += (lambda1 * lambda1 * model.b[i] * model.b[i] + s2 * model.d[i]) /
           (denom * denom);
  }
  return sum;
}

double l2_risk_derivative(const SpectralModel& model, double lambda1) {
  const double s2 = model.sigma * model.sigma;
  double sum = 0.0;
  for (Index i = 0; i < model.s(); ++i) {
    const double denom = model.d[i] + lambda1;
    sum += 2.0 * model.d[i] * (lambda1 * model.b[i] * model.b[i] - s2) /
           (denom * denom * denom);
  }
  return sum;
}

double pred_risk(const SpectralModel& model, double lambda1, Index n) {
  if (n < 1) throw UsageError("pred_risk: n must be >= 1");
  const double s2 = model.sigma * model.sigma;
  double sum = 0.0;
  for (Index i = 0; i < model.s(); ++i) {
    const double denom = model.d[i] + lambda1;
    sum += model.d[i] *
           (lambda1 * lambda1 * model.b[i] * model.b[i] + s2 * model.d[i]) /
           (denom * denom);
  }
  return sum / static_cast<double>(n);
}

double pred_risk_derivative(const SpectralModel& model, double lambda1) {
  const double s2 = model.sigma * model.sigma;
  double sum = 0.0;
  for (Index i = 0; i < model.s(); ++i) {
    const double denom = model.d[i] + lambda1;
    sum += 2.0 * model.d[i] * model.d[i] *
           (lambda1 * model.b[i] * model.b[i] - s2) /
           (denom * denom * denom);
  }
  return sum;
}

namespace {

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double rel_tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > rel_tol * std::max(1.0, std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double optimal_ridge(const SpectralModel& model, RiskTarget target) {
  if (model.s() < 1) throw UsageError("optimal_ridge: empty model");
  if (model.sigma == 0.0) return 0.0;  // risk strictly increases from 0
  const auto value = [&](double l) {
    return target == RiskTarget::L2 ? l2_risk(model, l)
                                    : pred_risk(model, l, 1);
  };
  const auto deriv = [&](double l) {
    return target == RiskTarget::L2 ? l2_risk_derivative(model, l)
                                    : pred_risk_derivative(model, l);
  };
  const double bnorm2 = model.b.squaredNorm();
  const double scale =
      bnorm2 > 0.0
          ? model.s() * model.sigma * model.sigma / bnorm2
          : model.sigma * model.sigma;
  // Expand until the derivative turns positive; beyond every sigma^2/b_i^2
  // it must, so the cap is only a guard for degenerate b.
  double hi = std::max(scale, 1e-12);
  while (deriv(hi) <= 0.0 && hi < 1e15 * scale) hi *= 4.0;
  double opt = golden_section(value, 0.0, hi, 1e-10);
  // Polish on the derivative sign change around the golden-section result.
  double a = 0.0, b = hi;
  if (deriv(opt) > 0.0)
    b = opt;
  else
    a = opt;
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    if (deriv(mid) > 0.0)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

RiskCurve risk_curve(const SpectralModel& model, std::span<const double> grid,
                     Index n) {
  if (grid.empty()) throw UsageError("risk_curve: empty grid");
  RiskCurve curve;
  curve.lambda1_grid.assign(grid.begin(), grid.end());
  size_t best_l2 = 0, best_pred = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && grid[i] < grid[i - 1]))
      throw UsageError("risk_curve: grid must be sorted and nonnegative");
    curve.l2_risk.push_back(l2_risk(model, grid[i]));
    curve.pred_risk.push_back(pred_risk(model, grid[i], n));
    if (curve.l2_risk[i] < curve.l2_risk[best_l2]) best_l2 = i;
    if (curve.pred_risk[i] < curve.pred_risk[best_pred]) best_pred = i;
  }
  curve.argmin_l2 = grid[best_l2];
  curve.argmin_pred = grid[best_pred];
  return curve;
}

std::vector<double> default_lambda1_grid(double s, double sigma,
                                         double beta0_norm2, int count) {
  const double hat =
      beta0_norm2 > 0.0 ? s * sigma * sigma / beta0_norm2 : 1.0;
  std::vector<double> grid{0.0};
  if (hat <= 0.0) return grid;
  const double lo = std::log(hat / 100.0), hi = std::log(hat * 100.0);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    grid.push_back(std::exp(lo + t * (hi - lo)));
  }
  return grid;
}

std::string risk_curve_to_csv(const RiskCurve& curve) {
  std::string out = "lambda1,l2_risk,pred_risk\n";
  char buf[128];
  for (size_t i = 0; i < curve.lambda1_grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                  curve.lambda1_grid[i], curve.l2_risk[i],
                  curve.pred_risk[i]);
    out += buf;
  }
  return out;
}

void write_risk_curve_csv(const RiskCurve& curve, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write '" + file + "'");
  out << risk_curve_to_csv(curve);
}

EmpiricalRisk empirical_risk(const Matrix& X, const Vector& beta0,
                             double sigma, double lambda1, int reps,
                             std::uint64_t seed,
                             const SupportSelector& selector, int threads) {
  if (reps < 1) throw UsageError("empirical_risk: reps must be >= 1");
  const Index n = X.rows();
  const Vector mean = X * beta0;
  std::vector<Index> oracle_support;
  for (Index j = 0; j < beta0.size(); ++j)
    if (beta0[j] != 0.0) oracle_support.push_back(j);

  std::vector<double> l2(reps), pred(reps);
  parallel_for(reps, threads, [&](int rep) {
    RandomStream noise(seed, static_cast<std::uint64_t>(rep), 0x45535231u);
    Vector y = mean;
    for (Index i = 0; i < n; ++i) y[i] += sigma * noise.gaussian();
    const std::vector<Index> support =
        selector ? selector(y, static_cast<unsigned>(rep)) : oracle_support;
    RegressionData d;
    d.X = X;
    d.y = y;
    d.is_rescaled = true;
    const RidgeRefit refit = ridge_refit(d, support, lambda1);
    const Vector delta = refit.beta_refitted - beta0;
    l2[rep] = delta.squaredNorm();
    pred[rep] = (X * delta).squaredNorm() / static_cast<double>(n);
  });

  EmpiricalRisk out;
  for (int r = 0; r < reps; ++r) {
    out.l2_mean += l2[r];
    out.pred_mean += pred[r];
  }
  out.l2_mean /= reps;
  out.pred_mean /= reps;
  if (reps > 1) {
    double v1 = 0.0, v2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      v1 += (l2[r] - out.l2_mean) * (l2[r] - out.l2_mean);
      v2 += (pred[r] - out.pred_mean) * (pred[r] - out.pred_mean);
    }
    out.l2_se = std::sqrt(v1 / (reps - 1) / reps);
    out.pred_se = std::sqrt(v2 / (reps - 1) / reps);
  }
  return out;
}

}  // namespace threshreg
