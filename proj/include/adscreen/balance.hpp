#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adscreen/table.hpp"

namespace adscreen {

enum class SmoteTarget { Parity, Ratio };

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  SmoteTarget target = SmoteTarget::Parity;
  /// Minority/majority count ratio aimed for under SmoteTarget::Ratio, in (0, 1].
  double ratio = 1.0;
  std::uint64_t seed = 1;
};

struct NeighborLists {
  /// neighbors[i]: the k_used nearest other rows of row i, nearest first.
  std::vector<std::vector<std::size_t>> neighbors;
  std::size_t k_used = 0;
  /// True when k was reduced to rows - 1.
  bool clamped = false;
};

/// Euclidean k-nearest neighbors among `rows` (each the same length), after
/// standardizing every coordinate with the rows' own mean and population sd.
/// Distance ties go to the lower index. Throws TooFewMinority below 2 rows.
NeighborLists nearest_minority_neighbors(const std::vector<std::vector<double>>& rows, std::size_t k);

struct SmoteResult {
  /// Original rows in order, then the synthetic rows.
  Table table;
  std::string minority_class;
  std::size_t synthetic_rows = 0;
  /// (seed row, neighbor row) in `train` for each synthetic row.
  std::vector<std::pair<std::size_t, std::size_t>> parents;
  std::size_t k_used = 0;
  bool k_clamped = false;
};

/// Oversamples the minority class of a two-class target. Synthetic Numeric
/// values interpolate seed and neighbor with an independent u per feature;
/// Binary and Categorical values copy one parent by coin flip.
SmoteResult smote(const Table& train, const SmoteConfig& config = {});

}  // namespace adscreen
