#pragma once

#include "threshreg/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace threshreg {

struct RidgeRefit {
  std::vector<Index> support;
  double lambda1 = 0.0;
  Vector beta_refitted;  // length p, zeros off support
};

// Solves (X1'X1 + lambda1 I) b = X1'y on the support columns. lambda1 = 0
// falls back to a rank-revealing least squares and reproduces the OLS refit.
RidgeRefit ridge_refit(const RegressionData& data,
                       std::span<const Index> support, double lambda1);

// Eigendecomposition X0'X0 = P' D P with b = P beta_{0,1}; d descending.
struct SpectralModel {
  Vector d;      // eigenvalues of X0'X0, descending
  Vector b;      // rotated true coefficients
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double sigma = 0.0;

  Index s() const { return d.size(); }
};

SpectralModel spectral_model(const Matrix& X0, const Vector& beta0_1,
                             double sigma);

// f(l) = sum l^2 b_i^2/(d_i+l)^2 + sum sigma^2 d_i/(d_i+l)^2, the dominant
// term of E||refit - beta0||^2 on the selection event.
double l2_risk(const SpectralModel& model, double lambda1);
double l2_risk_derivative(const SpectralModel& model, double lambda1);

// g(l)/n with g(l) = l^2 sum b_i^2 d_i/(d_i+l)^2 + sum sigma^2 d_i^2/(d_i+l)^2.
double pred_risk(const SpectralModel& model, double lambda1, Index n);
double pred_risk_derivative(const SpectralModel& model, double lambda1);

enum class RiskTarget { L2, Prediction };

// Minimizer of f (or g) over [0, inf): bracketing plus golden section to
// relative tolerance 1e-10, polished on the analytic derivative sign change.
double optimal_ridge(const SpectralModel& model, RiskTarget target);

struct RiskCurve {
  std::vector<double> lambda1_grid;
  std::vector<double> l2_risk;
  std::vector<double> pred_risk;
  double argmin_l2 = 0.0;
  double argmin_pred = 0.0;
};

RiskCurve risk_curve(const SpectralModel& model, std::span<const double> grid,
                     Index n);

// 200 log-spaced points on [hat/100, 100 hat] with hat = s sigma^2/||b||^2,
// plus 0 at the front.
std::vector<double> default_lambda1_grid(double s, double sigma,
                                         double beta0_norm2, int count = 200);

std::string risk_curve_to_csv(const RiskCurve& curve);
void write_risk_curve_csv(const RiskCurve& curve, const std::string& file);

struct EmpiricalRisk {
  double l2_mean = 0.0, l2_se = 0.0;
  double pred_mean = 0.0, pred_se = 0.0;
};

using SupportSelector =
    std::function<std::vector<Index>(const Vector& y, unsigned rep)>;

// Monte Carlo risk of the ridge refit at a fixed lambda1: fresh noise
// epsilon ~ N(0, sigma^2 I) per replication, y = X beta0 + eps, support
// chosen by `selector` (default: supp(beta0)), refit, losses averaged.
EmpiricalRisk empirical_risk(const Matrix& X, const Vector& beta0,
                             double sigma, double lambda1, int reps,
                             std::uint64_t seed,
                             const SupportSelector& selector = {},
                             int threads = 1);

}  // namespace threshreg
