#include "threshreg/ica_solver.hpp"

#include "threshreg/model_core.hpp"
#include "threshreg/penalties.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace threshreg {

void PathConfig::validate(Index n) const {
  for (size_t i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] < lambda_grid[i - 1]))
      throw UsageError("path: lambda grid must be strictly decreasing");
  if (!lambda_grid.empty() && !(lambda_grid.back() >= 0.0))
    throw UsageError("path: lambda grid must be nonnegative");
  if (!(tol > 0.0)) throw UsageError("path: tol must be positive");
  if (max_iter < 1) throw UsageError("path: max_iter must be >= 1");
  if (effective_max_support(n) > n)
    throw UsageError("path: max_support must be <= n");
}

std::vector<double> default_lambda_grid(const RegressionData& data,
                                        int count, double ratio) {
  const double lambda_max =
      (data.X.transpose() * data.y).cwiseAbs().maxCoeff() /
      static_cast<double>(data.n());
  std::vector<double> grid(count);
  if (lambda_max == 0.0) return {0.0};
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * ratio);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0
                                : static_cast<double>(i) / (count - 1);
    grid[i] = std::exp(log_max + t * (log_min - log_max));
  }
  return grid;
}

namespace {

double min_singular_of_support(const RegressionData& data,
                               const std::vector<Index>& support) {
  if (support.empty()) return std::numeric_limits<double>::infinity();
  const Index s = static_cast<Index>(support.size());
  Matrix gram(s, s);
  for (Index a = 0; a < s; ++a)
    for (Index b = 0; b <= a; ++b) {
      const double v = data.X.col(support[a]).dot(data.X.col(support[b])) /
                       static_cast<double>(data.n());
      gram(a, b) = v;
      gram(b, a) = v;
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram,
                                           Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

double objective_on_residual(const Vector& residual, const Vector& beta,
                             const PenaltySpec& pen, Index n) {
  double pensum = 0.0;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) pensum += penalty_value(pen, std::abs(beta[j]));
  return residual.squaredNorm() / (2.0 * static_cast<double>(n)) + pensum;
}

}  // namespace

SparseFit ica_fit(const RegressionData& data, const PenaltySpec& pen,
                  const Vector& init, const PathConfig& cfg) {
  if (!data.is_rescaled) throw UsageError("ica_fit: data must be rescaled");
  if (init.size() != data.p()) throw DataError("ica_fit: init length != p");
  pen.validate();
  cfg.validate(data.n());

  const Index n = data.n(), p = data.p();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Index cap = cfg.effective_max_support(n);

  SparseFit fit;
  fit.beta = init;
  Index nnz = 0;
  for (Index j = 0; j < p; ++j)
    if (fit.beta[j] != 0.0) ++nnz;
  Vector residual = data.y;
  for (Index j = 0; j < p; ++j)
    if (fit.beta[j] != 0.0) residual -= fit.beta[j] * data.X.col(j);

  for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double old = fit.beta[j];
      const double z = inv_n * residual.dot(data.X.col(j)) + old;
      if (!std::isfinite(z))
        throw NumericalError("ica_fit: non-finite value at coordinate " +
                             std::to_string(j));
      const double next = univariate_minimize(z, pen).value;
      if (next == old) continue;
      if (next != 0.0 && old == 0.0 && nnz >= cap) {
        ++fit.cap_rejections;  // entering coordinate refused, stays zero
        continue;
      }
      residual -= (next - old) * data.X.col(j);
      if (next == 0.0)
        --nnz;
      else if (old == 0.0)
        ++nnz;
      fit.beta[j] = next;
      max_change = std::max(max_change, std::abs(next - old));
      if (cfg.trace_objectives)
        fit.objective_trace.push_back(
            objective_on_residual(residual, fit.beta, pen, n));
    }
    fit.iterations = sweep + 1;
    if (max_change < cfg.tol) {
      fit.converged = true;
      break;
    }
  }

  for (Index j = 0; j < p; ++j)
    if (fit.beta[j] != 0.0) fit.support.push_back(j);
  fit.objective = objective(data, fit.beta, pen);
  fit.min_singular_value = min_singular_of_support(data, fit.support);
  return fit;
}

SolutionPath solve_path(const RegressionData& data, PenaltyFamily family,
                        const PathConfig& cfg, double shape_a) {
  if (!data.is_rescaled) throw UsageError("solve_path: data must be rescaled");
  cfg.validate(data.n());
  SolutionPath path;
  path.column_norms = data.column_norms;
  path.n = data.n();
  path.family = family;
  path.shape_a = family == PenaltyFamily::Sica ? shape_a : 0.0;

  const std::vector<double> grid =
      cfg.lambda_grid.empty() ? default_lambda_grid(data) : cfg.lambda_grid;

  Vector warm = Vector::Zero(data.p());
  for (double lambda : grid) {
    PenaltySpec pen{family, lambda, shape_a};
    try {
      if (family == PenaltyFamily::Sica) {
        for (double pilot : cfg.sica_pilot_shapes) {
          if (pilot <= shape_a) continue;
          PenaltySpec pilot_pen{family, lambda, pilot};
          warm = ica_fit(data, pilot_pen, warm, cfg).beta;
        }
      }
      SparseFit fit = ica_fit(data, pen, warm, cfg);
      warm = fit.beta;
      path.entries.push_back({lambda, std::move(fit)});
    } catch (const NumericalError& e) {
      throw NumericalError("solve_path: lambda=" + std::to_string(lambda) +
                           ": " + e.what());
    }
  }
  return path;
}

ValidationChoice select_by_validation(const SolutionPath& path,
                                      const RegressionData& val) {
  if (path.entries.empty())
    throw UsageError("select_by_validation: empty path");
  if (val.p() != path.column_norms.size())
    throw DataError("select_by_validation: validation p mismatch");
  ValidationChoice best;
  bool first = true;
  for (size_t i = 0; i < path.entries.size(); ++i) {
    const auto& entry = path.entries[i];
    Vector beta_orig =
        to_original_scale(entry.fit.beta, path.column_norms, path.n);
    Vector pred = Vector::Zero(val.n());
    for (Index j : entry.fit.support) pred += beta_orig[j] * val.X.col(j);
    const double mse =
        (val.y - pred).squaredNorm() / static_cast<double>(val.n());
    // strict < keeps the earlier (larger lambda, sparser) entry on ties
    if (first || mse < best.val_mse) {
      first = false;
      best.lambda = entry.lambda;
      best.fit = entry.fit;
      best.beta_original = std::move(beta_orig);
      best.val_mse = mse;
      best.entry_index = i;
    }
  }
  return best;
}

std::string path_to_json(const SolutionPath& path) {
  nlohmann::json root;
  root["family"] = family_name(path.family);
  if (path.family == PenaltyFamily::Sica) root["shape_a"] = path.shape_a;
  root["n"] = path.n;
  auto& entries = root["entries"] = nlohmann::json::array();
  for (const auto& e : path.entries) {
    nlohmann::json j;
    j["lambda"] = e.lambda;
    j["support"] = e.fit.support;
    std::vector<double> nz;
    for (Index idx : e.fit.support) nz.push_back(e.fit.beta[idx]);
    j["beta_nonzero"] = nz;
    j["objective"] = e.fit.objective;
    if (e.fit.support.empty())
      j["min_singular_value"] = nullptr;
    else
      j["min_singular_value"] = e.fit.min_singular_value;
    j["iterations"] = e.fit.iterations;
    j["converged"] = e.fit.converged;
    if (e.fit.cap_rejections > 0)
      j["cap_rejections"] = e.fit.cap_rejections;
    entries.push_back(std::move(j));
  }
  return root.dump(2);
}

void write_path_json(const SolutionPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write '" + file + "'");
  out << path_to_json(path) << '\n';
}

}  // namespace threshreg
