#pragma once

#include "threshreg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace threshreg {

struct SparkCertificate {
  double c = 0.0;
  Index tau_checked = 0;
  double min_singular_found = 0.0;
  std::vector<Index> witness_subset;
  // True only for exhaustive runs where every subset cleared c, certifying
  // rspark_c(X) > tau_checked. Heuristic runs always report false ("no
  // violation found" is not a certificate).
  bool is_lower_bound_valid = false;
  bool exhaustive = false;
};

// Exhaustive minimum singular value over all tau_max-column subsets of
// n^{-1/2} X. Errors out when C(p, tau_max) exceeds 1e7.
SparkCertificate robust_spark_exact(const RegressionData& data, double c,
                                    Index tau_max);

// Greedy swap local search with seeded restarts; returns the smallest value
// found, an upper bound on the exhaustive minimum. restarts = 0 runs a
// single descent.
SparkCertificate robust_spark_heuristic(const RegressionData& data, double c,
                                        Index tau, int restarts,
                                        std::uint64_t seed, int threads = 1);

struct OracleBoundParams {
  double c = 1.0;         // robust spark bound
  double c2 = 0.0;        // event E constant, >= sqrt(10) sigma
  double c2_prime = 0.0;  // event E' constant, >= sqrt(2) sigma
  double b0 = 0.0;
  Index s = 0;
  double sigma = 0.0;
  Index p_tilde = 0;  // max(n, p)

  static OracleBoundParams defaults(double c, const TrueModel& truth, Index n,
                                    Index p);
};

enum class NoiseKind { Gaussian, StudentT };

struct EventFrequencyReport {
  double freq_E = 0.0;
  double freq_E_prime = 0.0;
  double bound_E = 0.0;        // analytic lower bound on P(E)
  double bound_E_prime = 0.0;  // analytic lower bound on P(E')
};

// Monte Carlo frequency of the noise events
//   E  = { ||n^{-1} X' eps||_inf  <= c2 sqrt(log(p~)/n) }
//   E' = { ||n^{-1} X0' eps||_inf <= c2' sqrt(log(n)/n) }
// against their analytic lower bounds.
EventFrequencyReport event_frequency(const RegressionData& data,
                                     const TrueModel& truth,
                                     const OracleBoundParams& params, int reps,
                                     std::uint64_t seed,
                                     NoiseKind noise = NoiseKind::Gaussian,
                                     int t_df = 10, int threads = 1);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct AuditReport {
  bool support_match = false;
  bool lambda_admissible = false;
  double lambda = 0.0;
  double lambda_window_lo = 0.0;
  double lambda_window_hi = 0.0;
  double prediction_loss = 0.0;  // n^{-1/2} ||X(beta_hat - beta0)||_2
  double l1_loss = 0.0;
  double l2_loss = 0.0;
  double linf_loss = 0.0;
  std::vector<BoundCheck> bounds;

  bool all_bounds_hold() const {
    for (const auto& b : bounds)
      if (!b.holds) return false;
    return true;
  }
};

// Checks the selection-consistency claim and the prediction/estimation loss
// bounds with the supplied constants, plus the admissibility window
// c^{-1} c2 sqrt((2s+1) log(p~)/n) < lambda < b0 (1 ^ sqrt(c^2/2)).
AuditReport audit_oracle_bounds(const Vector& beta_hat,
                                const TrueModel& truth,
                                const OracleBoundParams& params,
                                const RegressionData& data, double lambda);

std::string audit_to_json(const AuditReport& report);

}  // namespace threshreg
