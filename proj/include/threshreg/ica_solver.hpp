#pragma once

#include "threshreg/types.hpp"

#include <string>
#include <vector>

namespace threshreg {

struct PathConfig {
  std::vector<double> lambda_grid;  // strictly decreasing; empty -> default
  int max_iter = 500;               // full cyclic sweeps
  double tol = 1e-7;                // max absolute coefficient change
  Index max_support = 0;            // 0 -> floor(n/2)
  std::vector<double> sica_pilot_shapes = {1.0, 0.1};
  bool trace_objectives = false;    // record Q after every accepted update

  void validate(Index n) const;
  Index effective_max_support(Index n) const {
    return max_support > 0 ? max_support : n / 2;
  }
};

struct PathEntry {
  double lambda = 0.0;
  SparseFit fit;
};

struct SolutionPath {
  std::vector<PathEntry> entries;  // ordered by decreasing lambda
  Vector column_norms;             // training scaling, for original-scale use
  Index n = 0;
  PenaltyFamily family = PenaltyFamily::Hard;
  double shape_a = 0.0;  // final SICA shape (0 for other families)
};

// 100 log-spaced values from lambda_max = max_j |n^{-1} x_j' y| down to
// ratio * lambda_max.
std::vector<double> default_lambda_grid(const RegressionData& data,
                                        int count = 100, double ratio = 1e-3);

// Cyclic coordinate optimization of Q(beta): each coordinate is set to the
// univariate global minimizer at z_j = n^{-1} (y - X beta_{-j})' x_j.
// Growth of the support beyond the cap is rejected and recorded. Stops when
// the largest applied coefficient change falls below tol.
SparseFit ica_fit(const RegressionData& data, const PenaltySpec& pen,
                  const Vector& init, const PathConfig& cfg);

// Warm-started path over the lambda grid, largest to smallest. For SICA,
// pilot fits with larger shape parameters stabilize each lambda's solution
// before the final shape is fit.
SolutionPath solve_path(const RegressionData& data, PenaltyFamily family,
                        const PathConfig& cfg, double shape_a = 1e-2);

struct ValidationChoice {
  double lambda = 0.0;
  SparseFit fit;           // in rescaled coordinates
  Vector beta_original;    // mapped through training column norms
  double val_mse = 0.0;
  size_t entry_index = 0;
};

// Entry minimizing ||y_val - X_val beta||^2 / n_val with beta on the original
// scale; ties go to the larger lambda. `val` is unscaled data.
ValidationChoice select_by_validation(const SolutionPath& path,
                                      const RegressionData& val);

std::string path_to_json(const SolutionPath& path);
void write_path_json(const SolutionPath& path, const std::string& file);

}  // namespace threshreg
