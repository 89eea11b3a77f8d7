#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adscreen/table.hpp"

namespace adscreen {

struct CohortConfig {
  std::size_t n_subjects = 862;
  std::uint64_t seed = 1;
  /// MCAR rate applied to every non-target cell after generation.
  double missing_rate = 0.05;
  /// Fraction of subjects labelled MCI or AD.
  double class_balance = 320.0 / 862.0;
  double neuropsych_signal = 1.0;
  double nuisance_signal = 0.15;
};

/// Linear-predictor weights of the generative model, per generated feature.
/// Features not listed carry weight 0.
struct GenerativeWeight {
  std::string feature;
  double weight = 0.0;
  /// Features are entered as (value - center) / scale.
  double center = 0.0;
  double scale = 1.0;
};

struct GroundTruth {
  CohortConfig config;
  /// Per subject: linear predictor and latent score (linear predictor plus
  /// logistic noise).
  std::vector<double> linear_predictor;
  std::vector<double> latent_score;
  /// HC, MCI or AD. The n * class_balance highest latent scores are MCI/AD.
  std::vector<std::string> labels;
  std::vector<GenerativeWeight> weights;
  /// Latent-score cut between HC and the rest in this sample.
  double threshold = 0.0;
};

/// 29 predictors (age, sex, 10 medical-history flags, apoe, 4 neuropsych
/// scores, 12 blood analytes) plus the 3-level `diagnosis` target.
Schema cohort_schema();

/// Feature names of each independence block of the generator.
std::vector<std::vector<std::string>> cohort_blocks();

/// Names of the predictors in a group, in schema order.
std::vector<std::string> group_features(FeatureGroup group);

/// Blocks generated with within-block correlation (neuropsych, erythrocyte
/// and renal analytes).
std::vector<std::string> correlated_numerics();

std::pair<Table, GroundTruth> generate_cohort(const CohortConfig& config = {});

/// Masks each non-Target, non-Identifier cell independently with probability `rate`.
Table inject_missing(const Table& table, double rate, std::uint64_t seed);

/// Monte-Carlo accuracy of the Bayes classifier for HC vs MCI/AD that sees
/// only `features` (names from cohort_schema()). The subset must consist of
/// whole independence blocks wherever a block carries weight.
double bayes_rate(const GroundTruth& truth, const std::vector<std::string>& features,
                  std::size_t draws = 100000);

/// Raw export of a cohort: an RID identifier plus birth_date and exam_date
/// in place of age. derive_age on the result gives back the age column.
Table to_raw_cohort(const Table& cohort, std::uint64_t seed);
Schema raw_cohort_schema();

/// Two-class table with `n_signal` predictive and `n_noise` pure-noise
/// standard-normal features (signal_1.., noise_1..) and target y in {HC, NonHC}.
Table generate_planted(std::size_t n, std::size_t n_signal, std::size_t n_noise, std::uint64_t seed);

/// CSV of per-subject ground truth: subject,linear_predictor,latent_score,label.
std::string truth_csv(const GroundTruth& truth);
/// CSV of generative weights: feature,weight,center,scale.
std::string weights_csv(const GroundTruth& truth);

}  // namespace adscreen
