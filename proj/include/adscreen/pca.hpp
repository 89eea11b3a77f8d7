#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adscreen/forest.hpp"
#include "adscreen/table.hpp"

namespace adscreen {

/// One standardized PCA input: a Numeric/Binary column, or one indicator of
/// a Categorical column's level.
struct PcaInput {
  std::string column;
  /// Empty for Numeric and Binary columns.
  std::string level;
  std::string name() const { return level.empty() ? column : column + "=" + level; }
};

struct PcaModel {
  std::vector<PcaInput> inputs;
  std::vector<double> means;
  /// Population sd; constant inputs get scale 1.
  std::vector<double> scales;
  /// components[j] is the j-th unit eigenvector, by descending eigenvalue.
  /// Its largest-magnitude entry is positive.
  std::vector<std::vector<double>> components;
  std::vector<double> eigenvalues;

  std::size_t n_components() const { return components.size(); }
};

/// Covariance eigendecomposition of the z-scored predictors. Throws
/// TooFewRows below 2 rows and MissingValues on masked predictor cells.
PcaModel fit_pca(const Table& train);

/// Row-major standardized inputs of `table` (n x inputs).
std::vector<double> standardize(const PcaModel& model, const Table& table);

/// Row-major scores on the first k components. Throws BadComponentCount
/// unless 1 <= k <= n_components.
std::vector<double> pca_scores(const PcaModel& model, const Table& table, std::size_t k);

/// Standardized inputs rebuilt from k-component scores (row-major n x k).
std::vector<double> reconstruct(const PcaModel& model, const std::vector<double>& scores, std::size_t k);

/// Numeric columns PC1..PCk, plus the Target column when the table has one.
Table project(const PcaModel& model, const Table& table, std::size_t k);

/// Cumulative eigenvalue fractions; the last entry is 1.
std::vector<double> explained_variance(const PcaModel& model);

struct PcaCurvePoint {
  std::size_t k = 0;
  double test_accuracy = 0.0;
};

/// For each k: project train and test on a PCA fitted to train, fit a forest
/// on the train scores and score test accuracy (percent).
std::vector<PcaCurvePoint> accuracy_vs_components(const Table& train, const Table& test,
                                                  const std::vector<std::size_t>& ks,
                                                  const ForestConfig& forest_config);

std::string pca_curve_csv(const std::vector<PcaCurvePoint>& curve);
std::string variance_csv(const std::vector<double>& cumulative);

}  // namespace adscreen
