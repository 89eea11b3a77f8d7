#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "adscreen/table.hpp"

namespace adscreen {

struct ImputeConfig {
  std::size_t ntree = 100;
  std::size_t max_iter = 10;
  /// Unset: floor(p/3) for numeric columns, floor(sqrt(p)) for the others.
  std::optional<std::size_t> mtry;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct ImputeDiff {
  double numeric = 0.0;
  double categorical = 0.0;
};

struct ImputeResult {
  Table table;
  std::size_t iterations_run = 0;
  std::vector<ImputeDiff> diff_trace;
};

/// Numeric (and Date) masked cells get the observed mean, Binary, Categorical
/// and Target cells the mode with ties to the lexicographically first value.
/// Identifier cells are left alone. A column with cells but none observed
/// throws AllMissingColumn.
Table mean_mode_fill(const Table& table);

/// Iterative random-forest imputation of the Numeric, Binary and Categorical
/// columns. Every other predictor and a fully observed Target serve as model
/// inputs.
ImputeResult missforest(const Table& table, const ImputeConfig& config = {});

/// Pooled over every Numeric cell masked in `mask`:
/// sqrt(mean (imputed - true)^2) / population sd of the true values.
/// Throws NoEvalCells when no Numeric cell is masked.
double imputation_nrmse(const Table& completed, const Table& truth, const Table& mask);

}  // namespace adscreen
