#include "threshreg/sim_harness.hpp"

#include "threshreg/diagnostics.hpp"
#include "threshreg/model_core.hpp"
#include "threshreg/parallel.hpp"
#include "threshreg/refit_shrinkage.hpp"
#include "threshreg/rng.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace threshreg {

namespace {

enum StreamPurpose : std::uint32_t {
  kTrainX = 1,
  kTrainEps = 2,
  kValX = 3,
  kValEps = 4,
  kTestX = 5,
  kTestEps = 6,
  kSplit = 7,
};

void fill_ar1_rows(Matrix& X, double rho, RandomStream& rng) {
  const double innov = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < X.rows(); ++i) {
    double prev = rng.gaussian();
    X(i, 0) = prev;
    for (Index j = 1; j < X.cols(); ++j) {
      prev = rho * prev + innov * rng.gaussian();
      X(i, j) = prev;
    }
  }
}

Vector draw_errors(Index n, double sigma, ErrorFamily family, int t_df,
                   RandomStream& rng) {
  Vector eps(n);
  for (Index i = 0; i < n; ++i)
    eps[i] = family == ErrorFamily::Gaussian
                 ? sigma * rng.gaussian()
                 : sigma * rng.student_t(t_df);
  return eps;
}

RegressionData draw_block(const SimDesign& design, const Vector& beta0,
                          Index rows, int rep, StreamPurpose x_purpose,
                          StreamPurpose eps_purpose) {
  RegressionData data;
  data.X.resize(rows, design.p);
  RandomStream xs(design.seed, static_cast<std::uint64_t>(rep), x_purpose);
  fill_ar1_rows(data.X, design.corr_rho, xs);
  RandomStream es(design.seed, static_cast<std::uint64_t>(rep), eps_purpose);
  data.y = data.X * beta0 +
           draw_errors(rows, design.sigma, design.error_family, design.t_df,
                       es);
  return data;
}

}  // namespace

void SimDesign::validate() const {
  if (n < 1 || p < 1) throw UsageError("design: n and p must be >= 1");
  if (q_repeats < 0) throw UsageError("design: q_repeats must be >= 0");
  const Index pattern =
      static_cast<Index>(beta_strong.size() + beta_weak.size());
  if (q_repeats * pattern > p)
    throw UsageError("design: repeated pattern longer than p");
  if (!(sigma >= 0.0)) throw UsageError("design: sigma must be >= 0");
  if (!(corr_rho > -1.0 && corr_rho < 1.0))
    throw UsageError("design: corr_rho must be in (-1, 1)");
  if (error_family == ErrorFamily::StudentT && t_df < 3)
    throw UsageError("design: t_df must be >= 3");
  if (n_test < 1) throw UsageError("design: n_test must be >= 1");
  if (reps < 1) throw UsageError("design: reps must be >= 1");
}

Vector assemble_beta0(const SimDesign& design) {
  Vector beta0 = Vector::Zero(design.p);
  Index at = 0;
  for (int rep = 0; rep < design.q_repeats; ++rep) {
    for (double v : design.beta_strong) beta0[at++] = v;
    for (double v : design.beta_weak) beta0[at++] = v;
  }
  return beta0;
}

GeneratedData generate_dataset(const SimDesign& design, int rep_index) {
  design.validate();
  GeneratedData gd;
  const Vector beta0 = assemble_beta0(design);
  gd.truth = TrueModel::from_beta(beta0, design.sigma);
  Index at = 0;
  for (int rep = 0; rep < design.q_repeats; ++rep) {
    for (double v : design.beta_strong) {
      if (v != 0.0) gd.strong_idx.push_back(at);
      ++at;
    }
    for (double v : design.beta_weak) {
      if (v != 0.0) gd.weak_idx.push_back(at);
      ++at;
    }
  }
  const Index n_val = design.n_val > 0 ? design.n_val : design.n;
  gd.train = draw_block(design, beta0, design.n, rep_index, kTrainX,
                        kTrainEps);
  gd.val = draw_block(design, beta0, n_val, rep_index, kValX, kValEps);
  gd.test = draw_block(design, beta0, design.n_test, rep_index, kTestX,
                       kTestEps);
  return gd;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Lasso: return "lasso";
    case Method::Hard: return "hard";
    case Method::Sica: return "sica";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "lasso") return Method::Lasso;
  if (name == "hard") return Method::Hard;
  if (name == "sica") return Method::Sica;
  if (name == "oracle") return Method::Oracle;
  throw UsageError("unknown method '" + name + "'");
}

MetricRow evaluate_fit(const Vector& beta_hat_orig, const TrueModel& truth,
                       const std::vector<Index>& strong_idx,
                       const std::vector<Index>& weak_idx,
                       const RegressionData& test,
                       const RegressionData& train) {
  if (beta_hat_orig.size() != truth.beta0.size())
    throw DataError("evaluate_fit: beta length mismatch");
  if (test.n() < 1) throw DataError("evaluate_fit: empty test set");
  MetricRow row;

  std::vector<Index> support;
  for (Index j = 0; j < beta_hat_orig.size(); ++j)
    if (beta_hat_orig[j] != 0.0) support.push_back(j);

  Vector pred = Vector::Zero(test.n());
  for (Index j : support) pred += beta_hat_orig[j] * test.X.col(j);
  row.pe = (test.y - pred).squaredNorm() / static_cast<double>(test.n());

  const Vector delta = beta_hat_orig - truth.beta0;
  row.l2_loss = delta.norm();
  row.l1_loss = delta.lpNorm<1>();
  row.linf_loss = delta.lpNorm<Eigen::Infinity>();

  for (Index j : support)
    if (truth.beta0[j] == 0.0) ++row.fp;
  for (Index j : strong_idx)
    if (beta_hat_orig[j] == 0.0) ++row.fn_strong;
  for (Index j : weak_idx)
    if (beta_hat_orig[j] == 0.0) ++row.fn_weak;

  Vector resid = train.y;
  for (Index j : support) resid -= beta_hat_orig[j] * train.X.col(j);
  const Index df = std::max<Index>(
      1, train.n() - static_cast<Index>(support.size()));
  row.sigma_hat = resid.norm() / std::sqrt(static_cast<double>(df));
  return row;
}

namespace {

struct MethodFit {
  Vector beta_orig;
  std::vector<Index> support;
};

MethodFit fit_method(Method method, const RegressionData& train_rescaled,
                     const GeneratedData& gd, const PathConfig& cfg) {
  if (method == Method::Oracle) {
    const std::vector<Index> supp = gd.truth.support();
    MethodFit fit;
    fit.support = supp;
    if (supp.empty()) {
      fit.beta_orig = Vector::Zero(train_rescaled.p());
    } else {
      const RidgeRefit rr = ridge_refit(train_rescaled, supp, 0.0);
      fit.beta_orig = to_original_scale(
          rr.beta_refitted, train_rescaled.column_norms, train_rescaled.n());
    }
    return fit;
  }
  PenaltyFamily family = PenaltyFamily::Hard;
  if (method == Method::Lasso) family = PenaltyFamily::Lasso;
  if (method == Method::Sica) family = PenaltyFamily::Sica;
  const SolutionPath path = solve_path(train_rescaled, family, cfg);
  ValidationChoice choice = select_by_validation(path, gd.val);
  return {std::move(choice.beta_original), std::move(choice.fit.support)};
}

Aggregate aggregate_of(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  for (double x : xs) a.mean += x;
  a.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

}  // namespace

std::vector<MethodAggregates> SimReport::aggregates() const {
  std::vector<MethodAggregates> out;
  for (size_t m = 0; m < methods.size(); ++m) {
    MethodAggregates agg;
    agg.method = methods[m];
    const auto collect = [&](auto pick) {
      std::vector<double> xs;
      xs.reserve(rows.size());
      for (const auto& rep : rows) xs.push_back(pick(rep[m]));
      return aggregate_of(xs);
    };
    agg.pe = collect([](const MetricRow& r) { return r.pe; });
    agg.l2_loss = collect([](const MetricRow& r) { return r.l2_loss; });
    agg.l1_loss = collect([](const MetricRow& r) { return r.l1_loss; });
    agg.linf_loss = collect([](const MetricRow& r) { return r.linf_loss; });
    agg.fp = collect([](const MetricRow& r) { return double(r.fp); });
    agg.fn_strong =
        collect([](const MetricRow& r) { return double(r.fn_strong); });
    agg.fn_weak =
        collect([](const MetricRow& r) { return double(r.fn_weak); });
    agg.sigma_hat =
        collect([](const MetricRow& r) { return r.sigma_hat; });
    out.push_back(agg);
  }
  return out;
}

SimReport run_study(const SimDesign& design,
                    const std::vector<Method>& methods, const PathConfig& cfg,
                    int threads) {
  design.validate();
  if (methods.empty()) throw UsageError("run_study: no methods");
  SimReport report;
  report.design = design;
  report.methods = methods;
  report.rows.resize(design.reps);
  parallel_for(design.reps, resolve_threads(threads), [&](int rep) {
    const GeneratedData gd = generate_dataset(design, rep);
    const RegressionData train_rescaled = rescale_columns(gd.train);
    auto& out = report.rows[rep];
    out.reserve(methods.size());
    for (Method m : methods) {
      try {
        const MethodFit fit = fit_method(m, train_rescaled, gd, cfg);
        MetricRow row = evaluate_fit(fit.beta_orig, gd.truth, gd.strong_idx,
                                     gd.weak_idx, gd.test, gd.train);
        row.method = m;
        out.push_back(row);
      } catch (const std::exception& e) {
        throw NumericalError("run_study: rep " + std::to_string(rep) +
                             ", method " + method_name(m) + ": " + e.what());
      }
    }
  });
  return report;
}

namespace {

// Ridge refits across the lambda1 grid for one selected support, evaluated
// through sufficient statistics so the test matrix is touched once.
struct RefitEvaluator {
  Vector eigval;        // of X1'X1 on the rescaled training design
  Matrix eigvec;
  Vector w;             // eigvec' X1' y
  Vector scale_back;    // sqrt(n)/column_norm per support column
  Matrix test_gram;     // X_test_S' X_test_S (original scale)
  Vector test_xty;
  double test_yy = 0.0;
  Index n_test = 0;
  Matrix val_gram;
  Vector val_xty;
  double val_yy = 0.0;
  Index n_val = 0;
  Vector beta0_s;       // true coefficients on the support
  double off_l2sq = 0.0, off_l1 = 0.0, off_linf = 0.0;

  RefitEvaluator(const RegressionData& train_rescaled,
                 const std::vector<Index>& support,
                 const RegressionData& test, const RegressionData& val,
                 const Vector& beta0) {
    const Index s = static_cast<Index>(support.size());
    Matrix X1(train_rescaled.n(), s);
    for (Index k = 0; k < s; ++k) X1.col(k) = train_rescaled.X.col(support[k]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(X1.transpose() * X1);
    eigval = es.eigenvalues();
    eigvec = es.eigenvectors();
    w = eigvec.transpose() * (X1.transpose() * train_rescaled.y);
    scale_back.resize(s);
    const double root_n = std::sqrt(double(train_rescaled.n()));
    for (Index k = 0; k < s; ++k)
      scale_back[k] = root_n / train_rescaled.column_norms[support[k]];

    Matrix test_S(test.n(), s);
    for (Index k = 0; k < s; ++k) test_S.col(k) = test.X.col(support[k]);
    test_gram = test_S.transpose() * test_S;
    test_xty = test_S.transpose() * test.y;
    test_yy = test.y.squaredNorm();
    n_test = test.n();

    Matrix val_S(val.n(), s);
    for (Index k = 0; k < s; ++k) val_S.col(k) = val.X.col(support[k]);
    val_gram = val_S.transpose() * val_S;
    val_xty = val_S.transpose() * val.y;
    val_yy = val.y.squaredNorm();
    n_val = val.n();

    beta0_s.resize(s);
    std::set<Index> in_support(support.begin(), support.end());
    for (Index k = 0; k < s; ++k) beta0_s[k] = beta0[support[k]];
    for (Index j = 0; j < beta0.size(); ++j) {
      if (in_support.count(j)) continue;
      const double a = std::abs(beta0[j]);
      off_l2sq += a * a;
      off_l1 += a;
      off_linf = std::max(off_linf, a);
    }
  }

  Vector coef_at(double lambda1) const {
    const Index s = eigval.size();
    Vector coef_spec(s);
    for (Index i = 0; i < s; ++i)
      coef_spec[i] = w[i] / (eigval[i] + lambda1);
    return (eigvec * coef_spec).cwiseProduct(scale_back);
  }

  // losses and test PE at a given lambda1
  void at(double lambda1, double& pe, double& l2, double& l1,
          double& linf) const {
    const Vector coef = coef_at(lambda1);
    pe = (test_yy - 2.0 * coef.dot(test_xty) +
          coef.dot(test_gram * coef)) /
         static_cast<double>(n_test);
    const Vector delta = coef - beta0_s;
    l2 = std::sqrt(off_l2sq + delta.squaredNorm());
    l1 = off_l1 + delta.lpNorm<1>();
    linf = std::max(off_linf, delta.lpNorm<Eigen::Infinity>());
  }

  double val_pe_at(double lambda1) const {
    const Vector coef = coef_at(lambda1);
    return (val_yy - 2.0 * coef.dot(val_xty) + coef.dot(val_gram * coef)) /
           static_cast<double>(n_val);
  }
};

}  // namespace

std::vector<MethodAggregates> RefitReport::refit_aggregates() const {
  std::vector<MethodAggregates> out;
  for (size_t m = 0; m < base.methods.size(); ++m) {
    MethodAggregates agg;
    agg.method = base.methods[m];
    const auto collect = [&](auto pick) {
      std::vector<double> xs;
      for (const auto& rep : rows) xs.push_back(pick(rep[m]));
      return aggregate_of(xs);
    };
    agg.pe = collect([](const RefitRow& r) { return r.pe; });
    agg.l2_loss = collect([](const RefitRow& r) { return r.l2_loss; });
    agg.l1_loss = collect([](const RefitRow& r) { return r.l1_loss; });
    agg.linf_loss = collect([](const RefitRow& r) { return r.linf_loss; });
    out.push_back(agg);
  }
  return out;
}

RefitReport run_refit_study(const SimDesign& design,
                            const std::vector<Method>& methods,
                            const PathConfig& cfg,
                            const std::vector<double>& lambda1_grid,
                            int threads, bool tune_on_validation) {
  design.validate();
  if (methods.empty()) throw UsageError("run_refit_study: no methods");
  if (lambda1_grid.empty())
    throw UsageError("run_refit_study: empty lambda1 grid");
  RefitReport report;
  report.base.design = design;
  report.base.methods = methods;
  report.base.rows.resize(design.reps);
  report.rows.resize(design.reps);
  const size_t g = lambda1_grid.size();
  report.curves.lambda1_grid = lambda1_grid;
  report.curves.l2_risk.assign(methods.size(),
                               std::vector<double>(g, 0.0));
  report.curves.pred_risk.assign(methods.size(),
                                 std::vector<double>(g, 0.0));
  // per-replication curve samples, reduced in order afterwards
  std::vector<std::vector<std::vector<double>>> l2_samples(
      design.reps), pe_samples(design.reps);

  parallel_for(design.reps, resolve_threads(threads), [&](int rep) {
    const GeneratedData gd = generate_dataset(design, rep);
    const RegressionData train_rescaled = rescale_columns(gd.train);
    auto& base_out = report.base.rows[rep];
    auto& refit_out = report.rows[rep];
    l2_samples[rep].assign(methods.size(), std::vector<double>(g, 0.0));
    pe_samples[rep].assign(methods.size(), std::vector<double>(g, 0.0));
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      const Method m = methods[mi];
      const MethodFit fit = fit_method(m, train_rescaled, gd, cfg);
      MetricRow base_row = evaluate_fit(fit.beta_orig, gd.truth,
                                        gd.strong_idx, gd.weak_idx, gd.test,
                                        gd.train);
      base_row.method = m;
      base_out.push_back(base_row);

      RefitRow rr;
      rr.method = m;
      if (fit.support.empty()) {
        // nothing to refit; metrics are those of the zero estimator
        rr.pe = base_row.pe;
        rr.l2_loss = base_row.l2_loss;
        rr.l1_loss = base_row.l1_loss;
        rr.linf_loss = base_row.linf_loss;
        for (size_t k = 0; k < g; ++k) {
          l2_samples[rep][mi][k] = base_row.l2_loss * base_row.l2_loss;
          pe_samples[rep][mi][k] = base_row.pe;
        }
      } else {
        const RefitEvaluator ev(train_rescaled, fit.support, gd.test,
                                gd.val, gd.truth.beta0);
        size_t val_pick = 0;
        if (tune_on_validation) {
          double best_val = 0.0;
          for (size_t k = 0; k < g; ++k) {
            const double v = ev.val_pe_at(lambda1_grid[k]);
            if (k == 0 || v < best_val) {
              best_val = v;
              val_pick = k;
            }
          }
        }
        bool first = true;
        for (size_t k = 0; k < g; ++k) {
          double pe, l2, l1, linf;
          ev.at(lambda1_grid[k], pe, l2, l1, linf);
          l2_samples[rep][mi][k] = l2 * l2;
          pe_samples[rep][mi][k] = pe;
          if (tune_on_validation) {
            if (k == val_pick) {
              rr.pe = pe;
              rr.l2_loss = l2;
              rr.l1_loss = l1;
              rr.linf_loss = linf;
              rr.lambda1_pe = rr.lambda1_l2 = rr.lambda1_l1 =
                  rr.lambda1_linf = lambda1_grid[k];
            }
            continue;
          }
          if (first || pe < rr.pe) {
            rr.pe = pe;
            rr.lambda1_pe = lambda1_grid[k];
          }
          if (first || l2 < rr.l2_loss) {
            rr.l2_loss = l2;
            rr.lambda1_l2 = lambda1_grid[k];
          }
          if (first || l1 < rr.l1_loss) {
            rr.l1_loss = l1;
            rr.lambda1_l1 = lambda1_grid[k];
          }
          if (first || linf < rr.linf_loss) {
            rr.linf_loss = linf;
            rr.lambda1_linf = lambda1_grid[k];
          }
          first = false;
        }
      }
      refit_out.push_back(rr);
    }
  });

  for (int rep = 0; rep < design.reps; ++rep)
    for (size_t mi = 0; mi < methods.size(); ++mi)
      for (size_t k = 0; k < g; ++k) {
        report.curves.l2_risk[mi][k] +=
            l2_samples[rep][mi][k] / design.reps;
        report.curves.pred_risk[mi][k] +=
            pe_samples[rep][mi][k] / design.reps;
      }
  return report;
}

ExpandedDesign quadratic_expansion(const Matrix& base,
                                   const std::vector<std::string>& names) {
  if (static_cast<Index>(names.size()) != base.cols())
    throw DataError("quadratic_expansion: names/columns mismatch");
  const Index p0 = base.cols();
  std::vector<bool> dummy(p0, false);
  for (Index j = 0; j < p0; ++j) {
    std::set<double> vals;
    for (Index i = 0; i < base.rows() && vals.size() <= 2; ++i)
      vals.insert(base(i, j));
    dummy[j] = vals.size() <= 2;
  }
  ExpandedDesign out;
  Index extra = 0;
  for (Index j = 0; j < p0; ++j)
    if (!dummy[j]) ++extra;
  out.X.resize(base.rows(), p0 + extra + p0 * (p0 - 1) / 2);
  Index at = 0;
  for (Index j = 0; j < p0; ++j, ++at) {
    out.X.col(at) = base.col(j);
    out.names.push_back(names[j]);
  }
  for (Index j = 0; j < p0; ++j) {
    if (dummy[j]) continue;
    out.X.col(at++) = base.col(j).cwiseProduct(base.col(j));
    out.names.push_back(names[j] + "^2");
  }
  for (Index a = 0; a < p0; ++a)
    for (Index b = a + 1; b < p0; ++b) {
      out.X.col(at++) = base.col(a).cwiseProduct(base.col(b));
      out.names.push_back(names[a] + "*" + names[b]);
    }
  return out;
}

SplitReport random_split_study(const RegressionData& data,
                               const std::vector<std::string>& column_names,
                               int splits, double train_frac,
                               const std::vector<Method>& methods,
                               const PathConfig& cfg, std::uint64_t seed,
                               int threads) {
  if (splits < 1) throw UsageError("split study: splits must be >= 1");
  const Index n = data.n();
  const Index n_train =
      static_cast<Index>(std::lround(train_frac * static_cast<double>(n)));
  if (n_train < 2 || n_train >= n)
    throw UsageError("split study: infeasible train fraction");
  for (Method m : methods)
    if (m == Method::Oracle)
      throw UsageError("split study: oracle needs a known true model");

  SplitReport report;
  report.column_names = column_names;
  report.splits = splits;
  report.n_train = n_train;
  report.n_val = n - n_train;
  report.records.resize(splits);
  // coefficient and selection bookkeeping per split, merged afterwards
  std::vector<std::vector<Vector>> coefs(
      splits, std::vector<Vector>(methods.size()));

  parallel_for(splits, resolve_threads(threads), [&](int split) {
    RandomStream rng(seed, static_cast<std::uint64_t>(split), kSplit);
    std::vector<Index> perm(n);
    for (Index i = 0; i < n; ++i) perm[i] = i;
    for (Index i = 0; i + 1 < n; ++i) {
      const Index j = i + static_cast<Index>(rng.next_u64() % (n - i));
      std::swap(perm[i], perm[j]);
    }
    RegressionData train, val;
    train.X.resize(n_train, data.p());
    train.y.resize(n_train);
    val.X.resize(n - n_train, data.p());
    val.y.resize(n - n_train);
    for (Index i = 0; i < n_train; ++i) {
      train.X.row(i) = data.X.row(perm[i]);
      train.y[i] = data.y[perm[i]];
    }
    for (Index i = n_train; i < n; ++i) {
      val.X.row(i - n_train) = data.X.row(perm[i]);
      val.y[i - n_train] = data.y[perm[i]];
    }
    const RegressionData train_rescaled = rescale_columns(std::move(train));
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      PenaltyFamily family = PenaltyFamily::Hard;
      if (methods[mi] == Method::Lasso) family = PenaltyFamily::Lasso;
      if (methods[mi] == Method::Sica) family = PenaltyFamily::Sica;
      const SolutionPath path = solve_path(train_rescaled, family, cfg);
      const ValidationChoice choice = select_by_validation(path, val);
      SplitRecord rec;
      rec.method = methods[mi];
      rec.pe = choice.val_mse;
      rec.model_size = static_cast<Index>(choice.fit.support.size());
      report.records[split].push_back(rec);
      coefs[split][mi] = choice.beta_original;
    }
  });

  for (size_t mi = 0; mi < methods.size(); ++mi) {
    SplitMethodSummary summary;
    summary.method = methods[mi];
    std::vector<double> pes, sizes;
    for (int s = 0; s < splits; ++s) {
      pes.push_back(report.records[s][mi].pe);
      sizes.push_back(static_cast<double>(report.records[s][mi].model_size));
    }
    summary.pe = aggregate_of(pes);
    std::sort(sizes.begin(), sizes.end());
    summary.median_model_size =
        splits % 2 == 1 ? sizes[splits / 2]
                        : 0.5 * (sizes[splits / 2 - 1] + sizes[splits / 2]);
    const Index p = data.p();
    summary.selection_freq.assign(p, 0.0);
    summary.coef_mean.assign(p, 0.0);
    summary.coef_sd.assign(p, 0.0);
    summary.t_stat.assign(p, 0.0);
    for (int s = 0; s < splits; ++s)
      for (Index j = 0; j < p; ++j) {
        if (coefs[s][mi][j] != 0.0) summary.selection_freq[j] += 1.0;
        summary.coef_mean[j] += coefs[s][mi][j];
      }
    for (Index j = 0; j < p; ++j) {
      summary.selection_freq[j] /= splits;
      summary.coef_mean[j] /= splits;
    }
    if (splits > 1) {
      for (int s = 0; s < splits; ++s)
        for (Index j = 0; j < p; ++j) {
          const double d = coefs[s][mi][j] - summary.coef_mean[j];
          summary.coef_sd[j] += d * d;
        }
      for (Index j = 0; j < p; ++j) {
        summary.coef_sd[j] = std::sqrt(summary.coef_sd[j] / (splits - 1));
        summary.t_stat[j] = summary.coef_sd[j] > 0.0
                                ? summary.coef_mean[j] / summary.coef_sd[j]
                                : 0.0;
      }
    }
    report.methods.push_back(summary);
  }
  return report;
}

namespace {

enum AuditPurpose : std::uint32_t { kAuditX = 11, kAuditEps = 12 };

}  // namespace

AuditStudySummary run_audit_study(const AuditStudyConfig& config,
                                  int threads) {
  if (config.s < 1 || config.s > config.p)
    throw UsageError("audit study: s out of range");
  if (config.reps < 1) throw UsageError("audit study: reps must be >= 1");

  // evenly spaced support keeps the true covariates weakly correlated
  Vector beta0 = Vector::Zero(config.p);
  for (Index k = 0; k < config.s; ++k)
    beta0[(config.p * (2 * k + 1)) / (2 * config.s)] = config.b0;
  const TrueModel truth = TrueModel::from_beta(beta0, config.sigma);
  OracleBoundParams params =
      OracleBoundParams::defaults(config.c, truth, config.n, config.p);

  const double log_pt = std::log(static_cast<double>(params.p_tilde));
  const double lo = params.c2 / params.c *
                    std::sqrt((2.0 * config.s + 1.0) * log_pt / config.n);
  const double hi =
      config.b0 * std::min(1.0, std::sqrt(config.c * config.c / 2.0));
  double lambda = config.lambda;
  if (lambda == 0.0) {
    if (!(lo < hi))
      throw UsageError("audit study: empty admissible lambda window");
    lambda = std::sqrt(lo * hi);
  }

  AuditStudySummary summary;
  summary.config = config;
  summary.lambda = lambda;
  summary.lambda_window_lo = lo;
  summary.lambda_window_hi = hi;
  summary.reps = config.reps;

  std::vector<AuditReport> reports(config.reps);
  parallel_for(config.reps, resolve_threads(threads), [&](int rep) {
    RegressionData data;
    data.X.resize(config.n, config.p);
    RandomStream xs(config.seed, static_cast<std::uint64_t>(rep), kAuditX);
    fill_ar1_rows(data.X, config.rho, xs);
    RandomStream es(config.seed, static_cast<std::uint64_t>(rep), kAuditEps);
    data.y = data.X * beta0 + draw_errors(config.n, config.sigma,
                                          ErrorFamily::Gaussian, 10, es);
    const RegressionData rescaled = rescale_columns(data);

    PathConfig cfg;
    const double lambda_max =
        (rescaled.X.transpose() * rescaled.y).cwiseAbs().maxCoeff() /
        static_cast<double>(config.n);
    const int len = std::max(2, config.path_length);
    for (int i = 0; i < len; ++i) {
      const double t = static_cast<double>(i) / (len - 1);
      cfg.lambda_grid.push_back(std::exp(
          std::log(std::max(lambda_max, lambda * 1.0001)) * (1.0 - t) +
          std::log(lambda) * t));
    }
    const SolutionPath path =
        solve_path(rescaled, PenaltyFamily::Hard, cfg);
    const Vector beta_hat = to_original_scale(
        path.entries.back().fit.beta, rescaled.column_norms, config.n);
    reports[rep] = audit_oracle_bounds(beta_hat, truth, params, data, lambda);
  });

  for (const auto& b : reports[0].bounds) summary.bound_names.push_back(b.name);
  summary.bound_ok.assign(summary.bound_names.size(), 0);
  for (const AuditReport& r : reports) {
    if (r.support_match) ++summary.support_ok;
    if (r.all_bounds_hold()) ++summary.all_bounds_ok;
    if (r.support_match && r.all_bounds_hold())
      ++summary.support_and_bounds_ok;
    for (size_t b = 0; b < r.bounds.size(); ++b)
      if (r.bounds[b].holds) ++summary.bound_ok[b];
  }
  return summary;
}

std::string audit_summary_to_json(const AuditStudySummary& summary) {
  nlohmann::json root;
  root["n"] = summary.config.n;
  root["p"] = summary.config.p;
  root["s"] = summary.config.s;
  root["b0"] = summary.config.b0;
  root["sigma"] = summary.config.sigma;
  root["rho"] = summary.config.rho;
  root["c"] = summary.config.c;
  root["seed"] = summary.config.seed;
  root["lambda"] = summary.lambda;
  root["lambda_window"] = {summary.lambda_window_lo, summary.lambda_window_hi};
  root["reps"] = summary.reps;
  root["support_recovery_rate"] =
      static_cast<double>(summary.support_ok) / summary.reps;
  root["all_bounds_rate"] =
      static_cast<double>(summary.all_bounds_ok) / summary.reps;
  root["support_and_bounds_rate"] =
      static_cast<double>(summary.support_and_bounds_ok) / summary.reps;
  auto& bounds = root["bound_rates"] = nlohmann::json::object();
  for (size_t b = 0; b < summary.bound_names.size(); ++b)
    bounds[summary.bound_names[b]] =
        static_cast<double>(summary.bound_ok[b]) / summary.reps;
  return root.dump(2);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

double round4(double x) { return std::round(x * 1e4) / 1e4; }

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"mean", round4(a.mean)}, {"sd", round4(a.sd)}};
}

nlohmann::json design_json(const SimDesign& d) {
  return {{"n", d.n},
          {"p", d.p},
          {"q_repeats", d.q_repeats},
          {"beta_strong", d.beta_strong},
          {"beta_weak", d.beta_weak},
          {"sigma", d.sigma},
          {"corr_rho", d.corr_rho},
          {"error_family",
           d.error_family == ErrorFamily::Gaussian ? "gaussian" : "t"},
          {"t_df", d.t_df},
          {"n_val", d.n_val},
          {"n_test", d.n_test},
          {"reps", d.reps},
          {"seed", d.seed}};
}

}  // namespace

std::string design_to_json(const SimDesign& design) {
  return design_json(design).dump(2);
}

SimDesign design_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open design file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("design file '" + path + "': " + e.what());
  }
  SimDesign d;
  d.n = j.value("n", d.n);
  d.p = j.value("p", d.p);
  d.q_repeats = j.value("q_repeats", d.q_repeats);
  if (j.contains("beta_strong"))
    d.beta_strong = j["beta_strong"].get<std::vector<double>>();
  if (j.contains("beta_weak"))
    d.beta_weak = j["beta_weak"].get<std::vector<double>>();
  d.sigma = j.value("sigma", d.sigma);
  d.corr_rho = j.value("corr_rho", d.corr_rho);
  if (j.contains("error_family")) {
    const std::string f = j["error_family"];
    if (f == "gaussian")
      d.error_family = ErrorFamily::Gaussian;
    else if (f == "t")
      d.error_family = ErrorFamily::StudentT;
    else
      throw DataError("design: unknown error_family '" + f + "'");
  }
  d.t_df = j.value("t_df", d.t_df);
  d.n_val = j.value("n_val", d.n_val);
  d.n_test = j.value("n_test", d.n_test);
  d.reps = j.value("reps", d.reps);
  d.seed = j.value("seed", d.seed);
  d.validate();
  return d;
}

std::string report_rows_to_csv(const SimReport& report) {
  std::string out =
      "rep,method,pe,l2_loss,l1_loss,linf_loss,fp,fn_strong,fn_weak,"
      "sigma_hat\n";
  char buf[256];
  for (size_t rep = 0; rep < report.rows.size(); ++rep)
    for (const MetricRow& r : report.rows[rep]) {
      std::snprintf(buf, sizeof(buf),
                    "%zu,%s,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%.17g\n", rep,
                    method_name(r.method), r.pe, r.l2_loss, r.l1_loss,
                    r.linf_loss, r.fp, r.fn_strong, r.fn_weak, r.sigma_hat);
      out += buf;
    }
  return out;
}

std::string aggregates_to_json(const SimReport& report) {
  nlohmann::json root;
  root["design"] = design_json(report.design);
  auto& methods = root["methods"] = nlohmann::json::object();
  for (const MethodAggregates& a : report.aggregates()) {
    methods[method_name(a.method)] = {
        {"pe", aggregate_json(a.pe)},
        {"l2_loss", aggregate_json(a.l2_loss)},
        {"l1_loss", aggregate_json(a.l1_loss)},
        {"linf_loss", aggregate_json(a.linf_loss)},
        {"fp", aggregate_json(a.fp)},
        {"fn_strong", aggregate_json(a.fn_strong)},
        {"fn_weak", aggregate_json(a.fn_weak)},
        {"sigma_hat", aggregate_json(a.sigma_hat)}};
  }
  return root.dump(2);
}

std::string refit_rows_to_csv(const RefitReport& report) {
  std::string out =
      "rep,method,pe,l2_loss,l1_loss,linf_loss,lambda1_pe,lambda1_l2,"
      "lambda1_l1,lambda1_linf\n";
  char buf[320];
  for (size_t rep = 0; rep < report.rows.size(); ++rep)
    for (const RefitRow& r : report.rows[rep]) {
      std::snprintf(buf, sizeof(buf),
                    "%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rep, method_name(r.method), r.pe, r.l2_loss, r.l1_loss,
                    r.linf_loss, r.lambda1_pe, r.lambda1_l2, r.lambda1_l1,
                    r.lambda1_linf);
      out += buf;
    }
  return out;
}

std::string refit_aggregates_to_json(const RefitReport& report) {
  nlohmann::json root;
  root["design"] = design_json(report.base.design);
  auto& methods = root["methods"] = nlohmann::json::object();
  for (const MethodAggregates& a : report.refit_aggregates()) {
    methods[std::string(method_name(a.method)) + "-l2"] = {
        {"pe", aggregate_json(a.pe)},
        {"l2_loss", aggregate_json(a.l2_loss)},
        {"l1_loss", aggregate_json(a.l1_loss)},
        {"linf_loss", aggregate_json(a.linf_loss)}};
  }
  return root.dump(2);
}

std::string refit_curves_to_csv(const RefitReport& report) {
  std::string out = "method,lambda1,l2_risk,pred_risk\n";
  char buf[192];
  for (size_t mi = 0; mi < report.base.methods.size(); ++mi)
    for (size_t k = 0; k < report.curves.lambda1_grid.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n",
                    method_name(report.base.methods[mi]),
                    report.curves.lambda1_grid[k],
                    report.curves.l2_risk[mi][k],
                    report.curves.pred_risk[mi][k]);
      out += buf;
    }
  return out;
}

std::string split_report_to_json(const SplitReport& report) {
  nlohmann::json root;
  root["splits"] = report.splits;
  root["n_train"] = report.n_train;
  root["n_val"] = report.n_val;
  auto& methods = root["methods"] = nlohmann::json::object();
  for (const SplitMethodSummary& m : report.methods) {
    nlohmann::json jm;
    jm["pe"] = {{"mean", m.pe.mean}, {"sd", m.pe.sd}};
    jm["median_model_size"] = m.median_model_size;
    auto& preds = jm["predictors"] = nlohmann::json::array();
    for (size_t j = 0; j < m.selection_freq.size(); ++j) {
      if (m.selection_freq[j] == 0.0) continue;
      preds.push_back({{"name", report.column_names[j]},
                       {"selection_freq", m.selection_freq[j]},
                       {"coef_mean", m.coef_mean[j]},
                       {"coef_sd", m.coef_sd[j]},
                       {"t_stat", m.t_stat[j]}});
    }
    methods[method_name(m.method)] = std::move(jm);
  }
  return root.dump(2);
}

}  // namespace threshreg
