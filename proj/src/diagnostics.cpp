#include "threshreg/diagnostics.hpp"

#include "threshreg/parallel.hpp"
#include "threshreg/rng.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace threshreg {

namespace {

double binom_capped(Index p, Index k, double cap) {
  double v = 1.0;
  for (Index i = 0; i < k; ++i) {
    v *= static_cast<double>(p - i) / static_cast<double>(i + 1);
    if (v > cap) return cap + 1.0;
  }
  return v;
}

// Smallest singular value of n^{-1/2} X_S via the Gram submatrix.
double subset_min_singular(const Matrix& gram,
                           const std::vector<Index>& subset) {
  const Index s = static_cast<Index>(subset.size());
  Matrix g(s, s);
  for (Index a = 0; a < s; ++a)
    for (Index b = 0; b <= a; ++b)
      g(a, b) = g(b, a) = gram(subset[a], subset[b]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

Matrix normalized_gram(const RegressionData& data) {
  return data.X.transpose() * data.X / static_cast<double>(data.n());
}

}  // namespace

SparkCertificate robust_spark_exact(const RegressionData& data, double c,
                                    Index tau_max) {
  if (tau_max < 1 || tau_max > data.p())
    throw UsageError("robust_spark_exact: tau_max out of range");
  if (binom_capped(data.p(), tau_max, 1e7) > 1e7)
    throw UsageError(
        "robust_spark_exact: combinatorial budget exceeded; use "
        "robust_spark_heuristic");
  const Matrix gram = normalized_gram(data);

  // Subsets of smaller size cannot attain a smaller singular value than the
  // best tau_max-subset containing them, so only size tau_max is enumerated.
  std::vector<Index> subset(tau_max);
  for (Index i = 0; i < tau_max; ++i) subset[i] = i;
  SparkCertificate cert;
  cert.c = c;
  cert.tau_checked = tau_max;
  cert.exhaustive = true;
  cert.min_singular_found = std::numeric_limits<double>::infinity();
  while (true) {
    const double sv = subset_min_singular(gram, subset);
    if (sv < cert.min_singular_found) {
      cert.min_singular_found = sv;
      cert.witness_subset = subset;
    }
    // next combination in lexicographic order
    Index i = tau_max - 1;
    while (i >= 0 && subset[i] == data.p() - tau_max + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (Index k = i + 1; k < tau_max; ++k) subset[k] = subset[k - 1] + 1;
  }
  cert.is_lower_bound_valid = cert.min_singular_found >= c;
  return cert;
}

SparkCertificate robust_spark_heuristic(const RegressionData& data, double c,
                                        Index tau, int restarts,
                                        std::uint64_t seed, int threads) {
  if (tau < 1 || tau > data.p())
    throw UsageError("robust_spark_heuristic: tau out of range");
  const Matrix gram = normalized_gram(data);
  const Index p = data.p();
  const int runs = restarts + 1;

  std::vector<double> best_sv(runs);
  std::vector<std::vector<Index>> best_subset(runs);
  parallel_for(runs, threads, [&](int run) {
    RandomStream rng(seed, static_cast<std::uint64_t>(run), 0x53504152u);
    // random tau-subset via partial Fisher-Yates
    std::vector<Index> perm(p);
    for (Index i = 0; i < p; ++i) perm[i] = i;
    for (Index i = 0; i < tau; ++i) {
      const Index j = i + static_cast<Index>(rng.next_u64() % (p - i));
      std::swap(perm[i], perm[j]);
    }
    std::vector<Index> subset(perm.begin(), perm.begin() + tau);
    std::vector<bool> in_subset(p, false);
    for (Index j : subset) in_subset[j] = true;
    double sv = subset_min_singular(gram, subset);
    bool improved = true;
    while (improved) {
      improved = false;
      for (Index pos = 0; pos < tau && !improved; ++pos) {
        const Index out = subset[pos];
        for (Index cand = 0; cand < p; ++cand) {
          if (in_subset[cand]) continue;
          subset[pos] = cand;
          const double trial = subset_min_singular(gram, subset);
          if (trial < sv - 1e-13) {
            sv = trial;
            in_subset[out] = false;
            in_subset[cand] = true;
            improved = true;
            break;
          }
          subset[pos] = out;
        }
      }
    }
    best_sv[run] = sv;
    best_subset[run] = subset;
  });

  SparkCertificate cert;
  cert.c = c;
  cert.tau_checked = tau;
  cert.exhaustive = false;
  cert.is_lower_bound_valid = false;  // upper bound only, never a certificate
  int best = 0;
  for (int r = 1; r < runs; ++r)
    if (best_sv[r] < best_sv[best]) best = r;
  cert.min_singular_found = best_sv[best];
  cert.witness_subset = best_subset[best];
  std::sort(cert.witness_subset.begin(), cert.witness_subset.end());
  return cert;
}

OracleBoundParams OracleBoundParams::defaults(double c,
                                              const TrueModel& truth, Index n,
                                              Index p) {
  OracleBoundParams params;
  params.c = c;
  params.sigma = truth.sigma;
  params.c2 = std::sqrt(10.0) * truth.sigma;
  params.c2_prime = std::sqrt(2.0) * truth.sigma;
  params.b0 = truth.b0;
  params.s = truth.s;
  params.p_tilde = std::max(n, p);
  return params;
}

EventFrequencyReport event_frequency(const RegressionData& data,
                                     const TrueModel& truth,
                                     const OracleBoundParams& params, int reps,
                                     std::uint64_t seed, NoiseKind noise,
                                     int t_df, int threads) {
  if (reps < 1) throw UsageError("event_frequency: reps must be >= 1");
  const Index n = data.n();
  const double log_pt = std::log(static_cast<double>(params.p_tilde));
  const double log_n = std::log(static_cast<double>(n));
  const double thresh_E = params.c2 * std::sqrt(log_pt / n);
  const double thresh_Ep = params.c2_prime * std::sqrt(log_n / n);
  const std::vector<Index> supp = truth.support();

  std::vector<char> hit_E(reps), hit_Ep(reps);
  parallel_for(reps, threads, [&](int rep) {
    RandomStream rng(seed, static_cast<std::uint64_t>(rep), 0x45564e54u);
    Vector eps(n);
    for (Index i = 0; i < n; ++i)
      eps[i] = noise == NoiseKind::Gaussian
                   ? truth.sigma * rng.gaussian()
                   : truth.sigma * rng.student_t(t_df);
    const Vector corr = data.X.transpose() * eps / static_cast<double>(n);
    hit_E[rep] = corr.cwiseAbs().maxCoeff() <= thresh_E;
    double max0 = 0.0;
    for (Index j : supp) max0 = std::max(max0, std::abs(corr[j]));
    hit_Ep[rep] = max0 <= thresh_Ep;
  });

  EventFrequencyReport report;
  for (int r = 0; r < reps; ++r) {
    report.freq_E += hit_E[r];
    report.freq_E_prime += hit_Ep[r];
  }
  report.freq_E /= reps;
  report.freq_E_prime /= reps;
  if (truth.sigma == 0.0) {
    report.bound_E = report.bound_E_prime = 1.0;
  } else {
    const double root = std::sqrt(2.0 / M_PI);
    report.bound_E =
        1.0 - root * truth.sigma / (params.c2 * std::sqrt(log_pt)) *
                  std::pow(static_cast<double>(params.p_tilde),
                           1.0 - params.c2 * params.c2 /
                                     (2.0 * truth.sigma * truth.sigma));
    report.bound_E_prime =
        1.0 - root * truth.sigma * static_cast<double>(params.s) /
                  (params.c2_prime * std::sqrt(log_n)) *
                  std::pow(static_cast<double>(n),
                           -params.c2_prime * params.c2_prime /
                               (2.0 * truth.sigma * truth.sigma));
  }
  return report;
}

AuditReport audit_oracle_bounds(const Vector& beta_hat, const TrueModel& truth,
                                const OracleBoundParams& params,
                                const RegressionData& data, double lambda) {
  if (beta_hat.size() != truth.beta0.size())
    throw DataError("audit: beta length mismatch");
  AuditReport report;
  report.lambda = lambda;
  const Index n = data.n();
  const double log_pt = std::log(static_cast<double>(params.p_tilde));
  const double log_n = std::log(static_cast<double>(n));
  const double s = static_cast<double>(params.s);

  report.lambda_window_lo =
      params.c2 / params.c * std::sqrt((2.0 * s + 1.0) * log_pt / n);
  report.lambda_window_hi =
      params.b0 * std::min(1.0, std::sqrt(params.c * params.c / 2.0));
  report.lambda_admissible = report.lambda_window_lo < lambda &&
                             lambda < report.lambda_window_hi;

  report.support_match = true;
  for (Index j = 0; j < beta_hat.size(); ++j)
    if ((beta_hat[j] != 0.0) != (truth.beta0[j] != 0.0))
      report.support_match = false;

  const Vector delta = beta_hat - truth.beta0;
  report.prediction_loss =
      (data.X * delta).norm() / std::sqrt(static_cast<double>(n));
  report.l1_loss = delta.lpNorm<1>();
  report.l2_loss = delta.norm();
  report.linf_loss = delta.lpNorm<Eigen::Infinity>();

  const double root_logn_n = std::sqrt(log_n / n);
  const double pred_rhs =
      2.0 * params.c2_prime / params.c * std::sqrt(s * log_n / n);
  const double est_base = 2.0 * params.c2_prime / (params.c * params.c);
  report.bounds = {
      {"prediction", report.prediction_loss, pred_rhs,
       report.prediction_loss <= pred_rhs},
      {"l1", report.l1_loss, est_base * s * root_logn_n,
       report.l1_loss <= est_base * s * root_logn_n},
      {"l2", report.l2_loss, est_base * std::sqrt(s) * root_logn_n,
       report.l2_loss <= est_base * std::sqrt(s) * root_logn_n},
      {"linf", report.linf_loss, est_base * std::sqrt(s) * root_logn_n,
       report.linf_loss <= est_base * std::sqrt(s) * root_logn_n},
  };
  return report;
}

std::string audit_to_json(const AuditReport& report) {
  nlohmann::json root;
  root["support_match"] = report.support_match;
  root["lambda"] = report.lambda;
  root["lambda_admissible"] = report.lambda_admissible;
  root["lambda_window"] = {report.lambda_window_lo, report.lambda_window_hi};
  root["losses"] = {{"prediction", report.prediction_loss},
                    {"l1", report.l1_loss},
                    {"l2", report.l2_loss},
                    {"linf", report.linf_loss}};
  auto& bounds = root["bounds"] = nlohmann::json::array();
  for (const auto& b : report.bounds)
    bounds.push_back({{"name", b.name},
                      {"lhs", b.lhs},
                      {"rhs", b.rhs},
                      {"holds", b.holds}});
  return root.dump(2);
}

}  // namespace threshreg
