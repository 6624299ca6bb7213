#include "threshreg/model_core.hpp"

#include "threshreg/penalties.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace threshreg {

const char* family_name(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::Hard: return "hard";
    case PenaltyFamily::L0: return "l0";
    case PenaltyFamily::Sica: return "sica";
    case PenaltyFamily::Lasso: return "lasso";
  }
  return "?";
}

PenaltyFamily family_from_name(const std::string& name) {
  if (name == "hard") return PenaltyFamily::Hard;
  if (name == "l0") return PenaltyFamily::L0;
  if (name == "sica") return PenaltyFamily::Sica;
  if (name == "lasso") return PenaltyFamily::Lasso;
  throw UsageError("unknown penalty family '" + name +
                   "' (expected hard|l0|sica|lasso)");
}

TrueModel TrueModel::from_beta(const Vector& beta0, double sigma) {
  TrueModel m;
  m.beta0 = beta0;
  m.sigma = sigma;
  m.b0 = 0.0;
  for (Index j = 0; j < beta0.size(); ++j) {
    if (beta0[j] != 0.0) {
      ++m.s;
      const double a = std::abs(beta0[j]);
      if (m.b0 == 0.0 || a < m.b0) m.b0 = a;
    }
  }
  return m;
}

std::vector<Index> TrueModel::support() const {
  std::vector<Index> idx;
  for (Index j = 0; j < beta0.size(); ++j)
    if (beta0[j] != 0.0) idx.push_back(j);
  return idx;
}

RegressionData rescale_columns(RegressionData data) {
  const Index n = data.n(), p = data.p();
  if (n < 1 || p < 1) throw DataError("rescale: empty design matrix");
  if (data.y.size() != n) throw DataError("rescale: y length != n");
  data.column_norms.resize(p);
  const double target = std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < p; ++j) {
    const double norm = data.X.col(j).norm();
    if (norm == 0.0)
      throw DataError("rescale: column " + std::to_string(j) +
                      " is identically zero");
    data.column_norms[j] = norm;
    data.X.col(j) *= target / norm;
  }
  data.is_rescaled = true;
  return data;
}

RegressionData rescale_with_norms(RegressionData data, const Vector& norms) {
  if (norms.size() != data.p())
    throw DataError("rescale_with_norms: norms length != p");
  const double target = std::sqrt(static_cast<double>(data.n()));
  for (Index j = 0; j < data.p(); ++j) {
    if (norms[j] == 0.0)
      throw DataError("rescale_with_norms: zero norm for column " +
                      std::to_string(j));
    data.X.col(j) *= target / norms[j];
  }
  data.column_norms = norms;
  data.is_rescaled = true;
  return data;
}

double objective(const RegressionData& data, const Vector& beta,
                 const PenaltySpec& pen) {
  if (beta.size() != data.p())
    throw DataError("objective: beta length != p");
  pen.validate();
  const double rss = (data.y - data.X * beta).squaredNorm();
  double pensum = 0.0;
  for (Index j = 0; j < beta.size(); ++j)
    pensum += penalty_value(pen, std::abs(beta[j]));
  return rss / (2.0 * static_cast<double>(data.n())) + pensum;
}

Vector to_original_scale(const Vector& beta, const Vector& column_norms,
                         Index n) {
  if (beta.size() != column_norms.size())
    throw DataError("to_original_scale: size mismatch");
  const double root_n = std::sqrt(static_cast<double>(n));
  Vector out(beta.size());
  for (Index j = 0; j < beta.size(); ++j)
    out[j] = beta[j] * root_n / column_norms[j];
  return out;
}

void center_in_place(RegressionData& data) {
  data.y.array() -= data.y.mean();
  for (Index j = 0; j < data.p(); ++j)
    data.X.col(j).array() -= data.X.col(j).mean();
}

namespace {

// RFC-4180-lite: no quoting, comma separated, optional trailing \r.
std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  if (b == e) return false;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e;
}

}  // namespace

CsvDataset load_csv_stream(std::istream& in, const std::string& origin,
                           const CsvOptions& opts) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  size_t lineno = 0;
  size_t width = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.peek() == EOF) break;
    const auto cells = split_row(line);
    if (lineno == 1) {
      width = cells.size();
      bool all_numeric = true;
      double tmp;
      for (const auto& c : cells)
        if (!parse_double(c, tmp)) all_numeric = false;
      if (!all_numeric) {
        header = cells;
        saw_header = true;
        continue;
      }
    }
    if (cells.size() != width)
      throw DataError(origin + ": row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(width));
    std::vector<double> vals(cells.size());
    for (size_t k = 0; k < cells.size(); ++k) {
      if (!parse_double(cells[k], vals[k]))
        throw DataError(origin + ": malformed cell at row " +
                        std::to_string(lineno) + ", column " +
                        std::to_string(k + 1) + ": '" + cells[k] + "'");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DataError(origin + ": no data rows");

  Index resp = -1;
  if (opts.response_name) {
    if (!saw_header)
      throw DataError(origin + ": response by name requires a header row");
    for (size_t k = 0; k < header.size(); ++k)
      if (header[k] == *opts.response_name) resp = static_cast<Index>(k);
    if (resp < 0)
      throw DataError(origin + ": response column '" + *opts.response_name +
                      "' not found");
  } else if (opts.response_index) {
    resp = *opts.response_index;
    if (resp < 0 || resp >= static_cast<Index>(width))
      throw DataError(origin + ": response index out of range");
  } else {
    throw UsageError("load_csv: no response column selected");
  }

  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(width) - 1;
  if (p < 1) throw DataError(origin + ": need at least one predictor column");
  CsvDataset out;
  out.data.X.resize(n, p);
  out.data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index k = 0; k < static_cast<Index>(width); ++k) {
      if (k == resp)
        out.data.y[i] = rows[i][k];
      else
        out.data.X(i, c++) = rows[i][k];
    }
  }
  for (Index k = 0; k < static_cast<Index>(width); ++k) {
    if (k == resp) continue;
    out.column_names.push_back(saw_header ? header[k]
                                          : "x" + std::to_string(k));
  }
  out.response_name =
      saw_header ? header[resp] : "col" + std::to_string(resp);
  if (opts.center) center_in_place(out.data);
  return out;
}

CsvDataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_csv_stream(in, path, opts);
}

CsvMatrix load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  // reuse the dataset reader by treating column 0 as response, then stitch
  // it back in front
  CsvOptions opts;
  opts.response_index = 0;
  CsvDataset ds = load_csv_stream(in, path, opts);
  CsvMatrix out;
  out.X.resize(ds.data.n(), ds.data.p() + 1);
  out.X.col(0) = ds.data.y;
  out.X.rightCols(ds.data.p()) = ds.data.X;
  out.column_names.push_back(ds.response_name);
  for (auto& name : ds.column_names) out.column_names.push_back(name);
  return out;
}

}  // namespace threshreg
