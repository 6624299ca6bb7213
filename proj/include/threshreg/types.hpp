#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace threshreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy mapped to CLI exit codes: usage 1, data 2, numerical 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Design matrix and response. Columns are rescaled to L2-norm sqrt(n) before
// fitting; the original norms are kept so coefficients can be mapped back.
struct RegressionData {
  Matrix X;
  Vector y;
  Vector column_norms;  // original L2 norms, length p
  bool is_rescaled = false;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

enum class PenaltyFamily { Hard, L0, Sica, Lasso };

struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::Hard;
  double lambda = 0.0;
  double shape_a = 1e-2;  // SICA shape parameter, ignored otherwise

  void validate() const {
    if (!(lambda >= 0.0)) throw UsageError("penalty: lambda must be >= 0");
    if (family == PenaltyFamily::Sica && !(shape_a > 0.0))
      throw UsageError("penalty: SICA shape parameter must be > 0");
  }
};

const char* family_name(PenaltyFamily f);
PenaltyFamily family_from_name(const std::string& name);

struct SparseFit {
  Vector beta;
  std::vector<Index> support;  // ascending indices of nonzero coordinates
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double min_singular_value = 0.0;  // of n^{-1/2} X restricted to support
  int cap_rejections = 0;           // updates refused by the support cap
  std::vector<double> objective_trace;  // per accepted update, when traced
};

struct TrueModel {
  Vector beta0;
  Index s = 0;       // number of nonzeros of beta0
  double b0 = 0.0;   // minimum absolute nonzero coefficient
  double sigma = 0.0;

  static TrueModel from_beta(const Vector& beta0, double sigma);
  std::vector<Index> support() const;
};

}  // namespace threshreg
