#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adscreen/forest.hpp"
#include "adscreen/table.hpp"

namespace adscreen {

enum class ImportanceLoss { Accuracy, Auc };

struct FeatureImportance {
  std::string feature;
  double mean_loss_drop = 0.0;
  /// Sample sd over permutations; 0 for a single permutation.
  double stddev = 0.0;
  std::size_t n_permutations = 0;
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;
  ImportanceLoss loss = ImportanceLoss::Accuracy;
  double baseline_loss = 0.0;
};

/// Loss is 1 - accuracy (or 1 - AUC of the NonHC vote fraction). Each feature
/// column is shuffled afresh n_permutations times; the report holds the mean
/// and sd of (permuted loss - baseline loss). Throws EmptyConfig for zero
/// permutations.
ImportanceReport permutation_importance(const RandomForest& model, const Table& data,
                                        std::size_t n_permutations = 50, std::uint64_t seed = 1,
                                        ImportanceLoss loss = ImportanceLoss::Accuracy,
                                        std::size_t threads = 1);

enum class BorutaDecision { Confirmed, Rejected, Tentative };

std::string decision_name(BorutaDecision d);

struct BorutaConfig {
  std::size_t forest_ntree = 500;
  std::size_t max_rounds = 20;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct BorutaFeature {
  std::string feature;
  BorutaDecision decision = BorutaDecision::Tentative;
  std::size_t hits = 0;
  /// Rounds the feature took part in before being decided.
  std::size_t rounds = 0;
};

struct BorutaReport {
  std::vector<BorutaFeature> features;
  BorutaConfig config;
  std::size_t rounds_run = 0;
};

/// Shadow-feature selection. Each round shuffles a copy of every feature not
/// yet rejected (at least five shadows), fits a forest on features plus
/// shadows, scores OOB permutation importance, and counts a hit for each
/// undecided feature beating the best shadow. Undecided features are then
/// tested against Binomial(rounds, 1/2) two-sided at alpha / #undecided.
/// Throws EmptyConfig for max_rounds = 0.
BorutaReport boruta(const Table& train, const BorutaConfig& config = {});
BorutaReport boruta(const TrainingData& train, const BorutaConfig& config = {});

/// Per-feature OOB mean decrease in accuracy, averaged over trees.
std::vector<double> oob_permutation_importance(const RandomForest& forest, const TrainingData& data,
                                               std::uint64_t seed);

/// Two-sided exact binomial p-value for `hits` successes in `rounds` fair trials.
double binomial_two_sided(std::size_t hits, std::size_t rounds);

std::string importance_csv(const ImportanceReport& report);
std::string boruta_csv(const BorutaReport& report);

}  // namespace adscreen
