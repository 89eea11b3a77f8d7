#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adscreen/random.hpp"
#include "adscreen/table.hpp"

namespace adscreen {

enum class Task { Classification, Regression };

struct FeatureInfo {
  std::string name;
  bool categorical = false;
  /// Level names of a categorical feature; encoded values are level indices.
  std::vector<std::string> levels;
};

struct ForestConfig {
  std::size_t ntree = 500;
  /// Candidate features per split. Unset means floor(sqrt(#predictors)).
  std::optional<std::size_t> mtry;
  /// A node is split only while its (bootstrap-weighted) size exceeds this.
  std::size_t min_node_size = 1;
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 1;
  /// Worker threads for tree fitting; 0 uses all cores. Output never depends on it.
  std::size_t threads = 1;
};

/// Column-major feature matrix plus response, with per-feature sort ranks
/// cached once so every tree can reuse them.
class TrainingData {
 public:
  static TrainingData classification(std::vector<FeatureInfo> features, std::size_t n_rows,
                                     std::vector<double> values, std::vector<int> labels,
                                     std::vector<std::string> classes);
  static TrainingData regression(std::vector<FeatureInfo> features, std::size_t n_rows,
                                 std::vector<double> values, std::vector<double> response);

  /// Predictors are the table's Numeric, Binary and Categorical columns (or
  /// the given names); the response is the Target column. Masked predictor
  /// or target cells throw MissingValues.
  static TrainingData from_table(const Table& table,
                                 const std::vector<std::string>& predictors = {});

  Task task() const { return task_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return features_.size(); }
  const std::vector<FeatureInfo>& features() const { return features_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t n_classes() const { return classes_.size(); }

  double value(std::size_t row, std::size_t feature) const {
    return values_[feature * n_rows_ + row];
  }
  std::span<const double> feature_column(std::size_t feature) const {
    return {values_.data() + feature * n_rows_, n_rows_};
  }
  int label(std::size_t row) const { return labels_[row]; }
  double response(std::size_t row) const { return response_[row]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& responses() const { return response_; }

  /// Dense rank of each row's value among the feature's sorted distinct values.
  const std::vector<std::uint32_t>& ranks(std::size_t feature) const { return ranks_[feature]; }
  const std::vector<double>& distinct(std::size_t feature) const { return distinct_[feature]; }

 private:
  void build_ranks();

  Task task_ = Task::Classification;
  std::vector<FeatureInfo> features_;
  std::size_t n_rows_ = 0;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::string> classes_;
  std::vector<double> response_;
  std::vector<std::vector<std::uint32_t>> ranks_;
  std::vector<std::vector<double>> distinct_;
};

/// Flat tree node. Internal nodes send a row left when its value is <=
/// threshold (numeric) or its level bit is set in left_levels (categorical).
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::uint64_t left_levels = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double impurity_decrease = 0.0;
  /// A numeric value up to threshold + tie_band goes left. The band is a tiny
  /// fraction of the gap between the two values the split separates, so a
  /// value sitting on the midpoint routes the same way after rescaling.
  double tie_band = 0.0;
  /// Bootstrap-weighted number of training rows that reached the node.
  double weight = 0.0;
  /// Leaf prediction: class index or regression mean.
  double value = 0.0;
  /// Leaf class counts (classification only).
  std::vector<double> counts;

  bool is_leaf() const { return feature < 0; }
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// Walks to a leaf; `get(feature)` supplies the row's encoded value.
  template <typename Get>
  const TreeNode& leaf_for(Get&& get) const {
    const TreeNode* n = &nodes_.front();
    while (!n->is_leaf()) {
      const double v = get(static_cast<std::size_t>(n->feature));
      bool go_left;
      if (n->left_levels != 0) {
        go_left = ((n->left_levels >> static_cast<unsigned>(v)) & 1u) != 0;
      } else {
        go_left = v <= n->threshold + n->tie_band;
      }
      n = &nodes_[static_cast<std::size_t>(go_left ? n->left : n->right)];
    }
    return *n;
  }

  const TreeNode& leaf_for_row(std::span<const double> row) const {
    return leaf_for([&](std::size_t f) { return row[f]; });
  }

 private:
  std::vector<TreeNode> nodes_;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// Non-zero for categorical splits: bit l set means level l goes left.
  std::uint64_t left_levels = 0;
  double impurity_decrease = 0.0;
  /// Distance between the two distinct values a numeric split separates.
  double gap = 0.0;
};

/// 1 - sum p_i^2. Throws EmptyNode when the counts sum to zero.
double gini_impurity(std::span<const double> class_counts);

/// Best weighted impurity decrease (Gini for classification, variance for
/// regression) over the candidate features. `rows` is a multiset: repeated
/// indices count with multiplicity. Numeric thresholds are midpoints between
/// consecutive distinct values; categorical levels are ordered by in-node
/// positive-class rate (or mean response) and cut as if ordinal. Ties go to
/// the lowest feature index, then the lowest threshold. nullopt when nothing
/// decreases impurity.
std::optional<Split> best_split(const TrainingData& data, std::span<const std::uint32_t> rows,
                                std::span<const std::size_t> candidate_features);

std::size_t resolve_mtry(const ForestConfig& config, std::size_t n_features);

/// Recursive CART on the in-bag multiset. Each node draws mtry candidate
/// features without replacement from `rng`.
Tree fit_tree(const TrainingData& data, std::span<const std::uint32_t> in_bag,
              const ForestConfig& config, Rng& rng);

struct ForestPrediction {
  std::size_t label = 0;
  std::vector<double> vote_fractions;
};

class RandomForest {
 public:
  Task task = Task::Classification;
  std::vector<FeatureInfo> features;
  std::vector<std::string> classes;
  ForestConfig config;
  std::size_t mtry = 1;
  std::size_t n_train = 0;
  std::vector<Tree> trees;
  /// Bootstrap multiplicity of each training row, per tree.
  std::vector<std::vector<std::uint32_t>> in_bag;

  /// Majority vote. An exact tie goes to the later class in `classes`
  /// (NonHC for the binarized diagnosis).
  ForestPrediction predict(std::span<const double> row) const;
  /// Mean of the tree predictions (regression forests).
  double predict_value(std::span<const double> row) const;

  /// Encodes a table row-major in this forest's feature order.
  /// Masked cells throw MissingAtPredict.
  std::vector<double> encode(const Table& table) const;
  std::vector<ForestPrediction> predict(const Table& table) const;
};

/// Picks the majority class from per-class tallies; ties go to the higher index.
std::size_t vote_winner(std::span<const double> tallies);

/// Tree i is built from a bootstrap sample drawn by Rng(derive_seed(seed, {i})).
RandomForest fit_forest(const TrainingData& data, const ForestConfig& config);
RandomForest fit_forest(const Table& train, const ForestConfig& config);

struct OobCurve {
  /// Error after the first t+1 trees, over rows with at least one OOB vote.
  std::vector<double> overall;
  /// per_class[c][t]: error among OOB-scored rows whose true class is c.
  std::vector<std::vector<double>> per_class;
  /// Rows with at least one OOB vote after all trees.
  std::size_t scored_rows = 0;
};

OobCurve oob_error(const RandomForest& forest, const TrainingData& train);
OobCurve oob_error(const RandomForest& forest, const Table& train);

struct TunePoint {
  std::size_t mtry = 0;
  double oob_error = 0.0;
};

struct TuneResult {
  std::size_t best_mtry = 0;
  std::vector<TunePoint> points;
};

/// Seed used for the grid point `mtry`.
std::uint64_t tune_seed(std::uint64_t base_seed, std::size_t mtry);

/// One forest per grid value; argmin of final OOB error, ties to the smaller
/// mtry. `on_fit` sees every fitted forest.
TuneResult tune_mtry(const TrainingData& train, const ForestConfig& base,
                     const std::vector<std::size_t>& grid,
                     const std::function<void(std::size_t, const RandomForest&)>& on_fit = {});
TuneResult tune_mtry(const Table& train, const ForestConfig& base,
                     const std::vector<std::size_t>& grid,
                     const std::function<void(std::size_t, const RandomForest&)>& on_fit = {});

/// Versioned JSON model file; round-trips trees, in-bag counts and config.
std::string forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const std::string& text);

}  // namespace adscreen
