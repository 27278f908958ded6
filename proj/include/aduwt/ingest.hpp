#pragma once

#include "aduwt/core.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace aduwt {

/// Column selection and label handling for CSV ingestion. Feature columns
/// default to every non-label column in file order. label_mapping applies
/// to the label column only, before the numeric parse.
struct CsvSchema {
  std::string label_column;
  std::vector<std::string> feature_columns;  // empty => all others
  Task task = Task::regression;
  std::map<std::string, double> label_mapping;
};

/// Dialect: comma-separated, mandatory header row, '.' decimal separator,
/// no quoting. Malformed cells are reported with line number and column
/// name; non-finite values and non-binary classification labels are
/// rejected.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// Writes the same dialect load_csv reads: header x0..x{d-1},y.
void save_csv(const Dataset& ds, const std::string& path);

/// Seeded Gaussian features with a planted linear response plus noise.
/// heterogeneity in [0,1] promotes a small seeded fraction of labels to
/// large magnitude, giving the label-energy branch of the KRR oracle a
/// heavy tail.
Dataset synth_regression(std::size_t n, std::size_t d, std::uint64_t seed,
                         double noise_sd, double heterogeneity);

/// Two seeded Gaussian clusters pushed `margin` apart along a seeded random
/// direction. Labels are stored as {0,1}; relabel() gives the {-1,+1} view.
Dataset synth_classification(std::size_t n, std::size_t d, std::uint64_t seed,
                             double margin);

}  // namespace aduwt
