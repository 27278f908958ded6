#include "aduwt/ingest.hpp"

#include "aduwt/format.hpp"
#include "aduwt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace aduwt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ", column '" +
                                column + "': cannot parse '" + cell + "' as a number");
  }
  if (!std::isfinite(v)) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) + ", column '" +
                                column + "': non-finite value '" + cell + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open csv file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv file is empty: " + path);
  const std::vector<std::string> header = split_line(line);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::invalid_argument("csv header has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t label_idx = column_index(schema.label_column);
  std::vector<std::size_t> feature_idx;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != label_idx) feature_idx.push_back(c);
    }
  } else {
    for (const std::string& name : schema.feature_columns) {
      feature_idx.push_back(column_index(name));
    }
  }
  if (feature_idx.empty()) throw std::invalid_argument("csv schema selects no feature columns");

  std::vector<double> labels;
  std::vector<double> feats;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    const std::string& raw_label = cells[label_idx];
    const auto mapped = schema.label_mapping.find(raw_label);
    labels.push_back(mapped != schema.label_mapping.end()
                         ? mapped->second
                         : parse_cell(raw_label, line_no, schema.label_column));
    for (std::size_t c : feature_idx) {
      feats.push_back(parse_cell(cells[c], line_no, header[c]));
    }
  }
  if (labels.empty()) throw std::invalid_argument("csv file has no data rows: " + path);

  const std::size_t n = labels.size();
  const std::size_t d = feature_idx.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    y(static_cast<Eigen::Index>(i)) = labels[i];
    for (std::size_t j = 0; j < d; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = feats[i * d + j];
    }
  }
  return Dataset::make(std::move(X), std::move(y), schema.task);
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open csv file for writing: " + path);
  for (std::size_t j = 0; j < ds.d(); ++j) out << "x" << j << ",";
  out << "y\n";
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.d(); ++j) {
      out << fmt_double(ds.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << ",";
    }
    out << fmt_double(ds.label(i)) << "\n";
  }
}

Dataset synth_regression(std::size_t n, std::size_t d, std::uint64_t seed,
                         double noise_sd, double heterogeneity) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_regression requires n >= 1, d >= 1");
  if (heterogeneity < 0.0 || heterogeneity > 1.0)
    throw std::invalid_argument("heterogeneity must lie in [0, 1]");

  Rng rng(seed);
  Eigen::VectorXd w(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.normal();
  const double wn = w.norm();
  if (wn > 0.0) w /= wn;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
    y(i) = X.row(i).dot(w) + noise_sd * rng.normal();
  }

  // Promote a seeded ~5%*heterogeneity slice of labels to outlier magnitude.
  const std::size_t outliers =
      static_cast<std::size_t>(std::llround(0.05 * heterogeneity * static_cast<double>(n)));
  if (outliers > 0) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < outliers; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
    }
    const double magnitude = 1.0 + 49.0 * heterogeneity;
    for (std::size_t i = 0; i < outliers; ++i) {
      y(static_cast<Eigen::Index>(idx[i])) *= magnitude;
    }
  }
  return Dataset::make(std::move(X), std::move(y), Task::regression);
}

Dataset synth_classification(std::size_t n, std::size_t d, std::uint64_t seed,
                             double margin) {
  if (n < 2 || d < 1) throw std::invalid_argument("synth_classification requires n >= 2, d >= 1");
  if (margin < 0.0) throw std::invalid_argument("margin must be >= 0");

  Rng rng(seed);
  Eigen::VectorXd dir(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = rng.normal();
  const double nrm = dir.norm();
  if (nrm > 0.0) dir /= nrm;
  else dir(0) = 1.0;

  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  const std::size_t positives = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i < positives;
    const double side = positive ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(static_cast<Eigen::Index>(i), j) = rng.normal();
    X.row(static_cast<Eigen::Index>(i)) += (side * margin / 2.0) * dir.transpose();
    y(static_cast<Eigen::Index>(i)) = positive ? 1.0 : 0.0;
  }
  return Dataset::make(std::move(X), std::move(y), Task::binary_classification);
}

}  // namespace aduwt
