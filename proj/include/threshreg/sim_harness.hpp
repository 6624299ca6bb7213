#pragma once

#include "threshreg/ica_solver.hpp"
#include "threshreg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace threshreg {

enum class ErrorFamily { Gaussian, StudentT };

struct SimDesign {
  Index n = 100;
  Index p = 1000;
  int q_repeats = 3;
  std::vector<double> beta_strong = {0.6, 0, 0, -0.6, 0, 0};
  std::vector<double> beta_weak = {0.05, 0, 0, -0.05, 0, 0};
  double sigma = 0.4;
  double corr_rho = 0.5;  // AR(1) parameter of the covariate covariance
  ErrorFamily error_family = ErrorFamily::Gaussian;
  int t_df = 10;
  Index n_val = 0;  // 0 -> n (validation set of the training sample size)
  Index n_test = 10000;
  int reps = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

// beta0 = (v', ..., v', 0')' with v = (beta_strong', beta_weak')' repeated
// q_repeats times.
Vector assemble_beta0(const SimDesign& design);

struct GeneratedData {
  RegressionData train;  // unscaled
  RegressionData val;
  RegressionData test;
  TrueModel truth;
  std::vector<Index> strong_idx;
  std::vector<Index> weak_idx;
};

// Rows of X i.i.d. N(0, Sigma) with Sigma_ij = rho^|i-j| via the AR(1)
// recursion; y = X beta0 + sigma * eta with Gaussian or t_df errors.
// Deterministic given (design.seed, rep_index).
GeneratedData generate_dataset(const SimDesign& design, int rep_index);

enum class Method { Lasso, Hard, Sica, Oracle };
const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct MetricRow {
  Method method = Method::Hard;
  double pe = 0.0;        // mean squared prediction error on the test set
  double l2_loss = 0.0;
  double l1_loss = 0.0;
  double linf_loss = 0.0;
  int fp = 0;
  int fn_strong = 0;
  int fn_weak = 0;
  double sigma_hat = 0.0;
};

// All losses on the original coefficient scale. sigma_hat is the training
// residual norm over sqrt(n - ||beta||_0).
MetricRow evaluate_fit(const Vector& beta_hat_orig, const TrueModel& truth,
                       const std::vector<Index>& strong_idx,
                       const std::vector<Index>& weak_idx,
                       const RegressionData& test,
                       const RegressionData& train);

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;
};

struct MethodAggregates {
  Method method;
  Aggregate pe, l2_loss, l1_loss, linf_loss, fp, fn_strong, fn_weak,
      sigma_hat;
};

struct SimReport {
  SimDesign design;
  std::vector<Method> methods;
  std::vector<std::vector<MetricRow>> rows;  // [replication][method]

  std::vector<MethodAggregates> aggregates() const;
};

// Per replication and method: path fit on training data, lambda selected by
// validation prediction error, metrics on the fresh test sample. Oracle is
// OLS on the true support.
SimReport run_study(const SimDesign& design, const std::vector<Method>& methods,
                    const PathConfig& cfg, int threads = 0);

struct RefitRow {
  Method method = Method::Hard;
  // each metric at its own risk-minimizing lambda1 (test-set tuned)
  double pe = 0.0, l2_loss = 0.0, l1_loss = 0.0, linf_loss = 0.0;
  double lambda1_pe = 0.0, lambda1_l2 = 0.0, lambda1_l1 = 0.0,
         lambda1_linf = 0.0;
};

struct RefitCurves {
  // mean across replications, indexed [method][grid point]
  std::vector<double> lambda1_grid;
  std::vector<std::vector<double>> l2_risk;    // mean squared L2 loss
  std::vector<std::vector<double>> pred_risk;  // mean test PE
};

struct RefitReport {
  SimReport base;                            // identical to run_study
  std::vector<std::vector<RefitRow>> rows;   // [replication][method]
  RefitCurves curves;

  std::vector<MethodAggregates> refit_aggregates() const;
};

// run_study plus an L2-regularized refit of each selected support across the
// lambda1 grid. By default each metric is reported at its risk-minimizing
// lambda1 (oracle-style tuning on the test risk); with tune_on_validation a
// single lambda1 per fit is chosen by validation prediction error instead.
RefitReport run_refit_study(const SimDesign& design,
                            const std::vector<Method>& methods,
                            const PathConfig& cfg,
                            const std::vector<double>& lambda1_grid,
                            int threads = 0,
                            bool tune_on_validation = false);

struct SplitMethodSummary {
  Method method;
  Aggregate pe;
  double median_model_size = 0.0;
  std::vector<double> selection_freq;  // per predictor
  std::vector<double> coef_mean;       // across splits, zeros included
  std::vector<double> coef_sd;
  std::vector<double> t_stat;          // mean / sd
};

struct SplitRecord {
  Method method;
  double pe = 0.0;
  Index model_size = 0;
};

struct SplitReport {
  std::vector<std::string> column_names;
  int splits = 0;
  Index n_train = 0;
  Index n_val = 0;
  std::vector<std::vector<SplitRecord>> records;  // [split][method]
  std::vector<SplitMethodSummary> methods;
};

// Random-split protocol: `splits` random partitions into a training part of
// round(train_frac * n) rows and a validation part of the rest; per split
// each method's path is tuned by validation prediction error.
SplitReport random_split_study(const RegressionData& data,
                               const std::vector<std::string>& column_names,
                               int splits, double train_frac,
                               const std::vector<Method>& methods,
                               const PathConfig& cfg, std::uint64_t seed,
                               int threads = 0);

// Quadratic model expansion: base columns, squares of non-dummy columns
// (those with more than two distinct values), then all pairwise
// interactions. 10 base columns with one dummy give p = 64.
struct ExpandedDesign {
  Matrix X;
  std::vector<std::string> names;
};
ExpandedDesign quadratic_expansion(const Matrix& base,
                                   const std::vector<std::string>& names);

// Monte Carlo audit of the selection-consistency/loss-bound regime: s
// well-separated coefficients of size b0, AR(rho) design, Hard-penalty path
// fit warm-started down to an admissible lambda, audited per replication.
struct AuditStudyConfig {
  Index n = 100;
  Index p = 200;
  Index s = 3;
  double b0 = 0.6;
  double sigma = 0.1;
  double rho = 0.5;
  double c = 1.2;       // robust spark bound supplied to the audit
  double lambda = 0.0;  // 0 -> geometric mean of the admissible window
  int path_length = 20;
  int reps = 200;
  std::uint64_t seed = 7;
};

struct AuditStudySummary {
  AuditStudyConfig config;
  double lambda = 0.0;
  double lambda_window_lo = 0.0, lambda_window_hi = 0.0;
  int reps = 0;
  int support_ok = 0;
  int all_bounds_ok = 0;
  int support_and_bounds_ok = 0;
  std::vector<std::string> bound_names;
  std::vector<int> bound_ok;  // per bound
};

AuditStudySummary run_audit_study(const AuditStudyConfig& config,
                                  int threads = 0);
std::string audit_summary_to_json(const AuditStudySummary& summary);

// Serialization.
SimDesign design_from_json_file(const std::string& path);
std::string design_to_json(const SimDesign& design);
std::string report_rows_to_csv(const SimReport& report);
std::string aggregates_to_json(const SimReport& report);
std::string refit_rows_to_csv(const RefitReport& report);
std::string refit_aggregates_to_json(const RefitReport& report);
std::string refit_curves_to_csv(const RefitReport& report);
std::string split_report_to_json(const SplitReport& report);

}  // namespace threshreg
