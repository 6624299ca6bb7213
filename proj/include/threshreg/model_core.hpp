#pragma once

#include "threshreg/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace threshreg {

// Rescales every column of X to L2-norm sqrt(n), storing the original norms.
// Throws DataError naming the column if one is identically zero.
RegressionData rescale_columns(RegressionData data);

// Applies a previously computed column scaling (e.g. training norms) to
// another data set with the same p.
RegressionData rescale_with_norms(RegressionData data, const Vector& norms);

// Penalized least squares Q(beta) = (2n)^{-1} ||y - X beta||_2^2 + sum_j
// p_lambda(|beta_j|). Requires rescaled data.
double objective(const RegressionData& data, const Vector& beta,
                 const PenaltySpec& pen);

// Maps coefficients fitted on the rescaled design back to the original
// column scale: beta_orig_j = beta_j * sqrt(n) / column_norms_j.
Vector to_original_scale(const Vector& beta, const Vector& column_norms,
                         Index n);

// Centers y and the columns of X (in place); the model carries no intercept,
// so centering is optional and off by default.
void center_in_place(RegressionData& data);

struct CsvOptions {
  // Response column by name (needs a header row) or 0-based index.
  std::optional<std::string> response_name;
  std::optional<Index> response_index;
  bool center = false;
};

struct CsvDataset {
  RegressionData data;                    // not rescaled
  std::vector<std::string> column_names;  // predictors, in X column order
  std::string response_name;
};

// Strict CSV reader: first row is treated as a header iff any cell in it
// fails to parse as a number. Malformed cells are DataErrors with 1-based
// row/column location.
CsvDataset load_csv(const std::string& path, const CsvOptions& opts);
CsvDataset load_csv_stream(std::istream& in, const std::string& origin,
                           const CsvOptions& opts);

// All columns as a matrix (no response), e.g. for design diagnostics.
struct CsvMatrix {
  Matrix X;
  std::vector<std::string> column_names;
};
CsvMatrix load_csv_matrix(const std::string& path);

}  // namespace threshreg
