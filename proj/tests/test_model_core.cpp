#include "threshreg/model_core.hpp"
#include "threshreg/penalties.hpp"
#include "threshreg/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace threshreg;

namespace {

RegressionData make_random_data(Index n, Index p, std::uint64_t seed) {
  RandomStream rng(seed, 0, 1);
  RegressionData d;
  d.X.resize(n, p);
  d.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) d.X(i, j) = rng.gaussian();
    d.y[i] = rng.gaussian();
  }
  return d;
}

}  // namespace

TEST_CASE("rescale leaves unit-variance-style columns alone") {
  RegressionData d;
  d.X.resize(4, 1);
  d.X.col(0) << 1, 1, 1, 1;  // norm 2 = sqrt(4)
  d.y = Vector::Zero(4);
  const RegressionData r = rescale_columns(d);
  CHECK(r.X.col(0).isApprox(d.X.col(0), 1e-15));
  CHECK(r.column_norms[0] == doctest::Approx(2.0));
}

TEST_CASE("rescale scales a short column up") {
  RegressionData d;
  d.X.resize(4, 1);
  d.X.col(0) << 3, 0, 0, 0;
  d.y = Vector::Zero(4);
  const RegressionData r = rescale_columns(d);
  CHECK(r.X(0, 0) == doctest::Approx(2.0));
  CHECK(r.X(1, 0) == 0.0);
}

TEST_CASE("rescale rejects a zero column, naming it") {
  RegressionData d;
  d.X = Matrix::Zero(3, 2);
  d.X.col(0) << 1, 2, 3;
  d.y = Vector::Zero(3);
  CHECK_THROWS_WITH_AS(rescale_columns(d),
                       doctest::Contains("column 1"), DataError);
}

TEST_CASE("rescaled columns have norm sqrt(n) to 1e-10 relative") {
  const RegressionData r = rescale_columns(make_random_data(17, 5, 3));
  const double root_n = std::sqrt(17.0);
  for (Index j = 0; j < 5; ++j)
    CHECK(std::abs(r.X.col(j).norm() - root_n) <= 1e-10 * root_n);
}

TEST_CASE("objective at beta = 0 is ||y||^2 / (2n)") {
  const RegressionData r = rescale_columns(make_random_data(8, 3, 5));
  PenaltySpec pen{PenaltyFamily::Hard, 0.7, 1e-2};
  CHECK(objective(r, Vector::Zero(3), pen) ==
        doctest::Approx(r.y.squaredNorm() / 16.0));
}

TEST_CASE("objective with zero residual and L0 penalty is s lambda^2 / 2") {
  RegressionData d = make_random_data(10, 4, 7);
  Vector beta(4);
  beta << 1.5, 0.0, -2.0, 0.0;
  d = rescale_columns(d);
  d.y = d.X * beta;
  PenaltySpec pen{PenaltyFamily::L0, 0.3, 1e-2};
  CHECK(objective(d, beta, pen) == doctest::Approx(2 * 0.5 * 0.3 * 0.3));
}

TEST_CASE("objective matches a term-by-term recomputation") {
  const RegressionData r = rescale_columns(make_random_data(5, 3, 11));
  RandomStream rng(13, 0, 1);
  Vector beta(3);
  for (Index j = 0; j < 3; ++j) beta[j] = rng.gaussian();
  for (PenaltyFamily fam : {PenaltyFamily::Hard, PenaltyFamily::L0,
                            PenaltyFamily::Sica, PenaltyFamily::Lasso}) {
    PenaltySpec pen{fam, 0.4, 0.05};
    double rss = 0.0;
    for (Index i = 0; i < 5; ++i) {
      double fit = 0.0;
      for (Index j = 0; j < 3; ++j) fit += r.X(i, j) * beta[j];
      rss += (r.y[i] - fit) * (r.y[i] - fit);
    }
    double pensum = 0.0;
    for (Index j = 0; j < 3; ++j)
      pensum += penalty_value(pen, std::abs(beta[j]));
    CHECK(objective(r, beta, pen) == doctest::Approx(rss / 10.0 + pensum));
  }
}

TEST_CASE("objective is invariant under column/coefficient permutation") {
  const RegressionData r = rescale_columns(make_random_data(9, 4, 17));
  RandomStream rng(19, 0, 1);
  Vector beta(4);
  for (Index j = 0; j < 4; ++j) beta[j] = rng.gaussian();
  PenaltySpec pen{PenaltyFamily::Hard, 0.5, 1e-2};
  const double base = objective(r, beta, pen);

  std::vector<Index> perm(4);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  RegressionData shuffled = r;
  Vector beta_shuffled(4);
  for (Index j = 0; j < 4; ++j) {
    shuffled.X.col(j) = r.X.col(perm[j]);
    shuffled.column_norms[j] = r.column_norms[perm[j]];
    beta_shuffled[j] = beta[perm[j]];
  }
  CHECK(objective(shuffled, beta_shuffled, pen) == doctest::Approx(base));
}

TEST_CASE("Hard and L0 objectives agree when all nonzeros exceed lambda") {
  const RegressionData r = rescale_columns(make_random_data(12, 5, 23));
  Vector beta(5);
  beta << 0.9, 0.0, -1.4, 0.0, 0.71;
  const double lam = 0.7;
  PenaltySpec hard{PenaltyFamily::Hard, lam, 1e-2};
  PenaltySpec l0{PenaltyFamily::L0, lam, 1e-2};
  CHECK(objective(r, beta, hard) == doctest::Approx(objective(r, beta, l0)));
}

TEST_CASE("objective is nonnegative") {
  const RegressionData r = rescale_columns(make_random_data(6, 2, 29));
  RandomStream rng(31, 0, 1);
  for (int t = 0; t < 20; ++t) {
    Vector beta(2);
    beta << rng.gaussian(), rng.gaussian();
    PenaltySpec pen{PenaltyFamily::Sica, 0.2, 0.1};
    CHECK(objective(r, beta, pen) >= 0.0);
  }
}

TEST_CASE("csv: header, response by name, centering flag") {
  std::istringstream in("y,a,b\n1,2,3\n4,5,6\n7,8,10\n");
  CsvOptions opts;
  opts.response_name = "y";
  const CsvDataset ds = load_csv_stream(in, "test", opts);
  CHECK(ds.data.n() == 3);
  CHECK(ds.data.p() == 2);
  CHECK(ds.data.y[1] == 4.0);
  CHECK(ds.data.X(2, 1) == 10.0);
  CHECK(ds.column_names == std::vector<std::string>{"a", "b"});

  std::istringstream in2("y,a,b\n1,2,3\n4,5,6\n7,8,10\n");
  CsvOptions centered = opts;
  centered.center = true;
  const CsvDataset ds2 = load_csv_stream(in2, "test", centered);
  CHECK(ds2.data.y.mean() == doctest::Approx(0.0));
  CHECK(ds2.data.X.col(0).mean() == doctest::Approx(0.0));
}

TEST_CASE("csv: no header, response by index") {
  std::istringstream in("1,2\n3,4\n");
  CsvOptions opts;
  opts.response_index = 1;
  const CsvDataset ds = load_csv_stream(in, "test", opts);
  CHECK(ds.data.y[0] == 2.0);
  CHECK(ds.data.X(1, 0) == 3.0);
}

TEST_CASE("csv: malformed cell reports row and column") {
  std::istringstream in("y,a\n1,2\n3,oops\n");
  CsvOptions opts;
  opts.response_name = "y";
  CHECK_THROWS_WITH_AS(load_csv_stream(in, "test", opts),
                       doctest::Contains("row 3, column 2"), DataError);
}

TEST_CASE("csv: ragged row is an error") {
  std::istringstream in("y,a\n1,2\n3\n");
  CsvOptions opts;
  opts.response_name = "y";
  CHECK_THROWS_AS(load_csv_stream(in, "test", opts), DataError);
}

TEST_CASE("to_original_scale undoes the column scaling") {
  RegressionData d = make_random_data(20, 3, 37);
  const Matrix X_raw = d.X;
  const RegressionData r = rescale_columns(d);
  Vector beta(3);
  beta << 0.5, -1.0, 2.0;
  const Vector beta_orig = to_original_scale(beta, r.column_norms, r.n());
  CHECK((X_raw * beta_orig).isApprox(r.X * beta, 1e-12));
}

TEST_CASE("true model bookkeeping") {
  Vector beta0(5);
  beta0 << 0.0, 0.6, 0.0, -0.05, 0.0;
  const TrueModel m = TrueModel::from_beta(beta0, 0.4);
  CHECK(m.s == 2);
  CHECK(m.b0 == doctest::Approx(0.05));
  CHECK(m.support() == std::vector<Index>{1, 3});
}
