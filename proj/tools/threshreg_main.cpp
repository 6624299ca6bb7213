#include "threshreg/diagnostics.hpp"
#include "threshreg/ica_solver.hpp"
#include "threshreg/model_core.hpp"
#include "threshreg/parallel.hpp"
#include "threshreg/penalties.hpp"
#include "threshreg/refit_shrinkage.hpp"
#include "threshreg/sim_harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace threshreg;
using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> methods;
  std::string cur;
  for (char ch : csv + ",") {
    if (ch == ',') {
      if (!cur.empty()) methods.push_back(method_from_name(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (methods.empty()) throw UsageError("no methods given");
  return methods;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> vals;
  std::string cur;
  for (char ch : csv + ",") {
    if (ch == ',') {
      if (!cur.empty()) vals.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return vals;
}

std::vector<Index> parse_indices(const std::string& csv) {
  std::vector<Index> vals;
  for (double v : parse_doubles(csv)) vals.push_back(static_cast<Index>(v));
  return vals;
}

struct DataArgs {
  std::string file;
  std::string response;
  Index response_index = -1;
  bool center = false;

  CsvDataset load() const {
    CsvOptions opts;
    if (!response.empty())
      opts.response_name = response;
    else if (response_index >= 0)
      opts.response_index = response_index;
    else
      throw UsageError("select the response with --response or "
                       "--response-index");
    opts.center = center;
    return load_csv(file, opts);
  }
};

void add_data_args(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.file, "input CSV")->required();
  cmd->add_option("--response", args.response, "response column name");
  cmd->add_option("--response-index", args.response_index,
                  "response column 0-based index");
  cmd->add_flag("--center", args.center, "center y and the columns of X");
}

json fit_to_json(const SparseFit& fit, const Vector& beta_orig,
                 const PenaltySpec& pen, const PathConfig& cfg, Index n) {
  json j;
  j["penalty"] = family_name(pen.family);
  j["lambda"] = pen.lambda;
  if (pen.family == PenaltyFamily::Sica) j["shape_a"] = pen.shape_a;
  j["support"] = fit.support;
  std::vector<double> nz, nz_orig;
  for (Index idx : fit.support) {
    nz.push_back(fit.beta[idx]);
    nz_orig.push_back(beta_orig[idx]);
  }
  j["beta_nonzero"] = nz;
  j["beta_nonzero_original_scale"] = nz_orig;
  j["objective"] = fit.objective;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  if (fit.support.empty())
    j["min_singular_value"] = nullptr;
  else
    j["min_singular_value"] = fit.min_singular_value;
  if (fit.cap_rejections > 0) j["cap_rejections"] = fit.cap_rejections;
  j["config"] = {{"tol", cfg.tol},
                 {"max_iter", cfg.max_iter},
                 {"max_support", cfg.effective_max_support(n)}};
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"thresholded regression toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (default: THRESHREG_THREADS or all cores)");

  // ---- fit -----------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "single penalized fit");
  DataArgs fit_data;
  add_data_args(fit_cmd, fit_data);
  std::string fit_penalty = "hard";
  double fit_lambda = -1.0, fit_shape = 1e-2;
  bool fit_warm_path = false;
  PathConfig fit_cfg;
  std::string fit_out;
  fit_cmd->add_option("--penalty", fit_penalty, "hard|l0|sica|lasso");
  fit_cmd->add_option("--lambda", fit_lambda, "regularization strength")
      ->required();
  fit_cmd->add_option("--shape-a", fit_shape, "SICA shape parameter");
  fit_cmd->add_flag("--warm-path", fit_warm_path,
                    "warm-start from a decreasing lambda path");
  fit_cmd->add_option("--tol", fit_cfg.tol, "convergence tolerance");
  fit_cmd->add_option("--max-iter", fit_cfg.max_iter, "max sweeps");
  fit_cmd->add_option("--max-support", fit_cfg.max_support,
                      "support cap (default n/2)");
  fit_cmd->add_option("--out", fit_out, "output JSON file");

  // ---- path ----------------------------------------------------------
  auto* path_cmd = app.add_subcommand("path", "solution path over a grid");
  DataArgs path_data;
  add_data_args(path_cmd, path_data);
  std::string path_penalty = "hard";
  double path_shape = 1e-2;
  PathConfig path_cfg;
  std::string path_grid, path_out, path_validation;
  int path_grid_count = 100;
  double path_grid_ratio = 1e-3;
  bool path_auto_grid = false;
  path_cmd->add_option("--penalty", path_penalty, "hard|l0|sica|lasso");
  path_cmd->add_option("--shape-a", path_shape, "SICA shape parameter");
  path_cmd->add_option("--lambda-grid", path_grid,
                       "comma-separated decreasing grid");
  path_cmd->add_flag("--auto-grid", path_auto_grid,
                     "log-spaced default grid (also used when no grid given)");
  path_cmd->add_option("--grid-count", path_grid_count, "auto grid size");
  path_cmd->add_option("--grid-ratio", path_grid_ratio,
                       "auto grid lambda_min/lambda_max");
  path_cmd->add_option("--tol", path_cfg.tol, "convergence tolerance");
  path_cmd->add_option("--max-iter", path_cfg.max_iter, "max sweeps");
  path_cmd->add_option("--max-support", path_cfg.max_support,
                       "support cap (default n/2)");
  path_cmd->add_option("--validation", path_validation,
                       "validation CSV for lambda selection");
  path_cmd->add_option("--out", path_out, "output JSON file");

  // ---- refit ---------------------------------------------------------
  auto* refit_cmd = app.add_subcommand("refit", "L2-regularized refit");
  DataArgs refit_data;
  add_data_args(refit_cmd, refit_data);
  std::string refit_support;
  double refit_lambda1 = 0.0;
  std::string refit_out;
  refit_cmd->add_option("--support", refit_support,
                        "comma-separated column indices")
      ->required();
  refit_cmd->add_option("--lambda1", refit_lambda1, "ridge parameter")
      ->required();
  refit_cmd->add_option("--out", refit_out, "output JSON file");

  // ---- risk-curve ----------------------------------------------------
  auto* risk_cmd =
      app.add_subcommand("risk-curve", "analytic risk curves and optima");
  std::string risk_spectral, risk_out;
  int risk_grid_count = 200;
  Index risk_n = 0;
  risk_cmd->add_option("--spectral", risk_spectral,
                       "JSON with fields d[], b[], sigma")
      ->required();
  risk_cmd->add_option("--grid-count", risk_grid_count, "grid size");
  risk_cmd->add_option("--n", risk_n,
                       "sample size for the prediction risk (default: s)");
  risk_cmd->add_option("--out", risk_out, "output CSV file");

  // ---- spark ---------------------------------------------------------
  auto* spark_cmd =
      app.add_subcommand("spark", "robust spark diagnostics");
  std::string spark_file, spark_out;
  double spark_c = 0.5;
  Index spark_tau = 2;
  bool spark_heuristic = false;
  int spark_restarts = 20;
  std::uint64_t spark_seed = 1;
  spark_cmd->add_option("--data", spark_file, "CSV of design columns")
      ->required();
  spark_cmd->add_option("--c", spark_c, "singular value bound")->required();
  spark_cmd->add_option("--tau", spark_tau, "subset size")->required();
  spark_cmd->add_flag("--heuristic", spark_heuristic,
                      "greedy search instead of exhaustive enumeration");
  spark_cmd->add_option("--restarts", spark_restarts, "heuristic restarts");
  spark_cmd->add_option("--seed", spark_seed, "heuristic seed");
  spark_cmd->add_option("--out", spark_out, "output JSON file");

  // ---- simulate ------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study");
  std::string sim_design, sim_methods = "lasso,hard,sica,oracle";
  std::string sim_out_dir = ".";
  int sim_reps = 0;
  std::uint64_t sim_seed = 0;
  PathConfig sim_cfg;
  sim_cmd->add_option("--design", sim_design, "design JSON file")->required();
  sim_cmd->add_option("--methods", sim_methods, "comma-separated methods");
  sim_cmd->add_option("--reps", sim_reps, "override replication count");
  sim_cmd->add_option("--seed", sim_seed, "override seed");
  sim_cmd->add_option("--max-iter", sim_cfg.max_iter, "max sweeps");
  sim_cmd->add_option("--tol", sim_cfg.tol, "convergence tolerance");
  sim_cmd->add_option("--out-dir", sim_out_dir, "output directory");

  // ---- refit-study ---------------------------------------------------
  auto* rstudy_cmd =
      app.add_subcommand("refit-study", "study with L2-regularized refits");
  std::string rstudy_design, rstudy_methods = "lasso,hard,sica,oracle";
  std::string rstudy_out_dir = ".", rstudy_grid;
  int rstudy_reps = 0;
  std::uint64_t rstudy_seed = 0;
  int rstudy_grid_count = 50;
  bool rstudy_val_tuned = false;
  PathConfig rstudy_cfg;
  rstudy_cmd->add_option("--design", rstudy_design, "design JSON file")
      ->required();
  rstudy_cmd->add_option("--methods", rstudy_methods,
                         "comma-separated methods");
  rstudy_cmd->add_option("--reps", rstudy_reps, "override replication count");
  rstudy_cmd->add_option("--seed", rstudy_seed, "override seed");
  rstudy_cmd->add_option("--lambda1-grid", rstudy_grid,
                         "comma-separated ridge grid (default: log-spaced "
                         "around s sigma^2/||beta0||^2, plus 0)");
  rstudy_cmd->add_option("--lambda1-grid-count", rstudy_grid_count,
                         "size of the default ridge grid");
  rstudy_cmd->add_flag("--tune-on-validation", rstudy_val_tuned,
                       "choose one lambda1 per fit by validation PE instead "
                       "of per-metric test-risk tuning");
  rstudy_cmd->add_option("--max-iter", rstudy_cfg.max_iter, "max sweeps");
  rstudy_cmd->add_option("--out-dir", rstudy_out_dir, "output directory");

  // ---- split-study ---------------------------------------------------
  auto* split_cmd =
      app.add_subcommand("split-study", "random-split protocol on a CSV");
  DataArgs split_data;
  add_data_args(split_cmd, split_data);
  int split_count = 100;
  double split_train_frac = 0.9;
  std::string split_methods = "lasso,hard,sica";
  bool split_quadratic = false;
  std::uint64_t split_seed = 1;
  std::string split_out;
  PathConfig split_cfg;
  split_cmd->add_option("--splits", split_count, "number of random splits");
  split_cmd->add_option("--train-frac", split_train_frac,
                        "training fraction of rows");
  split_cmd->add_option("--methods", split_methods,
                        "comma-separated methods");
  split_cmd->add_flag("--quadratic", split_quadratic,
                      "expand to squares and pairwise interactions");
  split_cmd->add_option("--seed", split_seed, "split seed");
  split_cmd->add_option("--max-support", split_cfg.max_support,
                        "support cap (default n/2)");
  split_cmd->add_option("--out", split_out, "output JSON file");

  // ---- audit ---------------------------------------------------------
  auto* audit_cmd = app.add_subcommand(
      "audit", "selection-consistency and loss-bound audit");
  AuditStudyConfig audit_cfg;
  int audit_event_reps = 0;
  std::string audit_out;
  audit_cmd->add_option("--n", audit_cfg.n, "sample size");
  audit_cmd->add_option("--p", audit_cfg.p, "dimension");
  audit_cmd->add_option("--s", audit_cfg.s, "true support size");
  audit_cmd->add_option("--b0", audit_cfg.b0, "signal magnitude");
  audit_cmd->add_option("--sigma", audit_cfg.sigma, "noise level");
  audit_cmd->add_option("--rho", audit_cfg.rho, "AR(1) correlation");
  audit_cmd->add_option("--c", audit_cfg.c, "robust spark bound");
  audit_cmd->add_option("--lambda", audit_cfg.lambda,
                        "threshold level (default: admissible window center)");
  audit_cmd->add_option("--reps", audit_cfg.reps, "replications");
  audit_cmd->add_option("--seed", audit_cfg.seed, "seed");
  audit_cmd->add_option("--event-reps", audit_event_reps,
                        "also estimate noise-event frequencies");
  audit_cmd->add_option("--out", audit_out, "output JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (fit_cmd->parsed()) {
    const CsvDataset ds = fit_data.load();
    const RegressionData data = rescale_columns(ds.data);
    PenaltySpec pen{family_from_name(fit_penalty), fit_lambda, fit_shape};
    SparseFit fit;
    if (fit_warm_path) {
      PathConfig cfg = fit_cfg;
      const auto grid = default_lambda_grid(data);
      for (double l : grid)
        if (l > fit_lambda) cfg.lambda_grid.push_back(l);
      cfg.lambda_grid.push_back(fit_lambda);
      fit = solve_path(data, pen.family, cfg, pen.shape_a)
                .entries.back()
                .fit;
    } else {
      fit = ica_fit(data, pen, Vector::Zero(data.p()), fit_cfg);
    }
    const Vector beta_orig =
        to_original_scale(fit.beta, data.column_norms, data.n());
    const std::string text =
        fit_to_json(fit, beta_orig, pen, fit_cfg, data.n()).dump(2);
    if (!fit_out.empty()) write_file(fit_out, text);
    std::cout << text << '\n';
    return 0;
  }

  if (path_cmd->parsed()) {
    const CsvDataset ds = path_data.load();
    const RegressionData data = rescale_columns(ds.data);
    if (!path_grid.empty()) {
      if (path_auto_grid)
        throw UsageError("path: give either --lambda-grid or --auto-grid");
      path_cfg.lambda_grid = parse_doubles(path_grid);
    } else {
      path_cfg.lambda_grid =
          default_lambda_grid(data, path_grid_count, path_grid_ratio);
    }
    const SolutionPath path =
        solve_path(data, family_from_name(path_penalty), path_cfg,
                   path_shape);
    std::string text = path_to_json(path);
    if (!path_validation.empty()) {
      CsvOptions vopts;
      if (!path_data.response.empty())
        vopts.response_name = path_data.response;
      else
        vopts.response_index = path_data.response_index;
      vopts.center = path_data.center;
      const CsvDataset val = load_csv(path_validation, vopts);
      const ValidationChoice choice = select_by_validation(path, val.data);
      json j = json::parse(text);
      j["selected"] = {{"lambda", choice.lambda},
                       {"val_mse", choice.val_mse},
                       {"entry_index", choice.entry_index},
                       {"support", choice.fit.support}};
      text = j.dump(2);
    }
    if (!path_out.empty()) write_file(path_out, text);
    std::cout << text << '\n';
    return 0;
  }

  if (refit_cmd->parsed()) {
    const CsvDataset ds = refit_data.load();
    const RegressionData data = rescale_columns(ds.data);
    const std::vector<Index> support = parse_indices(refit_support);
    const RidgeRefit refit = ridge_refit(data, support, refit_lambda1);
    const Vector beta_orig =
        to_original_scale(refit.beta_refitted, data.column_norms, data.n());
    json j;
    j["support"] = refit.support;
    j["lambda1"] = refit.lambda1;
    std::vector<double> nz, nz_orig;
    for (Index idx : refit.support) {
      nz.push_back(refit.beta_refitted[idx]);
      nz_orig.push_back(beta_orig[idx]);
    }
    j["beta_nonzero"] = nz;
    j["beta_nonzero_original_scale"] = nz_orig;
    const std::string text = j.dump(2);
    if (!refit_out.empty()) write_file(refit_out, text);
    std::cout << text << '\n';
    return 0;
  }

  if (risk_cmd->parsed()) {
    std::ifstream in(risk_spectral);
    if (!in) throw DataError("cannot open '" + risk_spectral + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError("spectral file: " + std::string(e.what()));
    }
    SpectralModel model;
    const auto d = j.at("d").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (d.size() != b.size() || d.empty())
      throw DataError("spectral file: d and b must be equal-length, nonempty");
    model.d = Eigen::Map<const Vector>(d.data(), d.size());
    model.b = Eigen::Map<const Vector>(b.data(), b.size());
    std::sort(model.d.begin(), model.d.end(), std::greater<double>());
    model.lambda_max = model.d[0];
    model.lambda_min = model.d[model.d.size() - 1];
    model.sigma = j.at("sigma").get<double>();
    const Index n = risk_n > 0 ? risk_n : model.s();
    const auto grid = default_lambda1_grid(
        double(model.s()), model.sigma, model.b.squaredNorm(),
        risk_grid_count);
    const RiskCurve curve = risk_curve(model, grid, n);
    const std::string text = risk_curve_to_csv(curve);
    if (!risk_out.empty()) write_file(risk_out, text);
    json summary;
    summary["lambda1_opt_l2"] = optimal_ridge(model, RiskTarget::L2);
    summary["lambda1_opt_prediction"] =
        optimal_ridge(model, RiskTarget::Prediction);
    summary["argmin_l2"] = curve.argmin_l2;
    summary["argmin_pred"] = curve.argmin_pred;
    std::cout << summary.dump(2) << '\n';
    if (risk_out.empty()) std::cout << text;
    return 0;
  }

  if (spark_cmd->parsed()) {
    const CsvMatrix mat = load_csv_matrix(spark_file);
    RegressionData data;
    data.X = mat.X;
    data.y = Vector::Zero(mat.X.rows());
    const RegressionData rescaled = rescale_columns(data);
    const SparkCertificate cert =
        spark_heuristic
            ? robust_spark_heuristic(rescaled, spark_c, spark_tau,
                                     spark_restarts, spark_seed,
                                     resolve_threads(threads))
            : robust_spark_exact(rescaled, spark_c, spark_tau);
    json j;
    j["c"] = cert.c;
    j["tau_checked"] = cert.tau_checked;
    j["min_singular_found"] = cert.min_singular_found;
    j["witness_subset"] = cert.witness_subset;
    j["exhaustive"] = cert.exhaustive;
    j["is_lower_bound_valid"] = cert.is_lower_bound_valid;
    if (cert.is_lower_bound_valid)
      j["certifies"] = "rspark_c(X) > " + std::to_string(cert.tau_checked);
    const std::string text = j.dump(2);
    if (!spark_out.empty()) write_file(spark_out, text);
    std::cout << text << '\n';
    return 0;
  }

  if (sim_cmd->parsed()) {
    SimDesign design = design_from_json_file(sim_design);
    if (sim_reps > 0) design.reps = sim_reps;
    if (sim_seed > 0) design.seed = sim_seed;
    const SimReport report = run_study(design, parse_methods(sim_methods),
                                       sim_cfg, resolve_threads(threads));
    write_file(sim_out_dir + "/rows.csv", report_rows_to_csv(report));
    write_file(sim_out_dir + "/aggregates.json", aggregates_to_json(report));
    for (const MethodAggregates& a : report.aggregates())
      std::printf("%-7s PE %.4f (%.4f)  L2 %.4f (%.4f)  FP %.2f  "
                  "FN-strong %.2f  FN-weak %.2f\n",
                  method_name(a.method), a.pe.mean, a.pe.sd, a.l2_loss.mean,
                  a.l2_loss.sd, a.fp.mean, a.fn_strong.mean, a.fn_weak.mean);
    return 0;
  }

  if (rstudy_cmd->parsed()) {
    SimDesign design = design_from_json_file(rstudy_design);
    if (rstudy_reps > 0) design.reps = rstudy_reps;
    if (rstudy_seed > 0) design.seed = rstudy_seed;
    std::vector<double> grid;
    if (!rstudy_grid.empty()) {
      grid = parse_doubles(rstudy_grid);
    } else {
      const Vector beta0 = assemble_beta0(design);
      const TrueModel truth = TrueModel::from_beta(beta0, design.sigma);
      grid = default_lambda1_grid(double(truth.s), design.sigma,
                                  beta0.squaredNorm(), rstudy_grid_count);
    }
    const RefitReport report =
        run_refit_study(design, parse_methods(rstudy_methods), rstudy_cfg,
                        grid, resolve_threads(threads), rstudy_val_tuned);
    write_file(rstudy_out_dir + "/rows.csv",
               report_rows_to_csv(report.base));
    write_file(rstudy_out_dir + "/aggregates.json",
               aggregates_to_json(report.base));
    write_file(rstudy_out_dir + "/refit_rows.csv",
               refit_rows_to_csv(report));
    write_file(rstudy_out_dir + "/refit_aggregates.json",
               refit_aggregates_to_json(report));
    write_file(rstudy_out_dir + "/risk_curves.csv",
               refit_curves_to_csv(report));
    for (const MethodAggregates& a : report.refit_aggregates())
      std::printf("%-7s-L2 PE %.4f (%.4f)  L2 %.4f (%.4f)\n",
                  method_name(a.method), a.pe.mean, a.pe.sd, a.l2_loss.mean,
                  a.l2_loss.sd);
    return 0;
  }

  if (split_cmd->parsed()) {
    CsvDataset ds = split_data.load();
    std::vector<std::string> names = ds.column_names;
    if (split_quadratic) {
      const ExpandedDesign expanded = quadratic_expansion(ds.data.X, names);
      ds.data.X = expanded.X;
      names = expanded.names;
    }
    const SplitReport report = random_split_study(
        ds.data, names, split_count, split_train_frac,
        parse_methods(split_methods), split_cfg, split_seed,
        resolve_threads(threads));
    const std::string text = split_report_to_json(report);
    if (!split_out.empty()) write_file(split_out, text);
    std::cout << text << '\n';
    return 0;
  }

  if (audit_cmd->parsed()) {
    const AuditStudySummary summary =
        run_audit_study(audit_cfg, resolve_threads(threads));
    json j = json::parse(audit_summary_to_json(summary));
    if (audit_event_reps > 0) {
      Vector beta0 = Vector::Zero(audit_cfg.p);
      for (Index k = 0; k < audit_cfg.s; ++k)
        beta0[(audit_cfg.p * (2 * k + 1)) / (2 * audit_cfg.s)] =
            audit_cfg.b0;
      const TrueModel truth = TrueModel::from_beta(beta0, audit_cfg.sigma);
      SimDesign d;
      d.n = audit_cfg.n;
      d.p = audit_cfg.p;
      d.q_repeats = 0;
      d.sigma = audit_cfg.sigma;
      d.corr_rho = audit_cfg.rho;
      d.seed = audit_cfg.seed;
      const GeneratedData gd = generate_dataset(d, 0);
      RegressionData fixed = gd.train;
      fixed.y = fixed.X * beta0;  // design fixed; only noise is redrawn
      const OracleBoundParams params = OracleBoundParams::defaults(
          audit_cfg.c, truth, audit_cfg.n, audit_cfg.p);
      const EventFrequencyReport ev =
          event_frequency(fixed, truth, params, audit_event_reps,
                          audit_cfg.seed, NoiseKind::Gaussian, 10,
                          resolve_threads(threads));
      j["events"] = {{"freq_E", ev.freq_E},
                     {"freq_E_prime", ev.freq_E_prime},
                     {"bound_E", ev.bound_E},
                     {"bound_E_prime", ev.bound_E_prime}};
    }
    const std::string text = j.dump(2);
    if (!audit_out.empty()) write_file(audit_out, text);
    std::cout << text << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const threshreg::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const threshreg::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const threshreg::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
