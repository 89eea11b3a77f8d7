#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adscreen {

/// Binary confusion counts; the positive class is NonHC.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Labels are true for the positive class. Throws ShapeError on a length
/// mismatch or empty input.
ConfusionMatrix confusion_matrix(std::span<const bool> predicted, std::span<const bool> truth);
/// String-label overload; `positive` names the positive class.
ConfusionMatrix confusion_matrix(std::span<const std::string> predicted,
                                 std::span<const std::string> truth,
                                 const std::string& positive = "NonHC");

/// Percentages. precision/recall are nullopt when their denominator is zero.
struct Scores {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Throws EmptyMatrix when the matrix is all zeros.
Scores scores(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Rows scoring >= threshold are called positive. The first point uses +inf.
  double threshold = std::numeric_limits<double>::infinity();
  bool operator==(const RocPoint&) const = default;
};

/// Starts at (0,0), then one point per distinct score in descending order,
/// ending at (1,1). Throws DegenerateClass unless both classes occur.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> truth);

/// Trapezoidal area under the curve.
double auc(std::span<const RocPoint> roc);

struct EvalReport {
  ConfusionMatrix confusion;
  Scores scores;
  std::vector<RocPoint> roc;
  double auc = 0.0;
};

/// Confusion, scores, ROC and AUC from predicted labels and positive-class
/// vote fractions.
EvalReport evaluate(std::span<const bool> predicted, std::span<const double> positive_score,
                    std::span<const bool> truth);

struct MetricDiff {
  std::string metric;
  /// b - a rounded to 2 decimals; nullopt when either side is undefined.
  std::optional<double> value;
  std::string text;
};

/// b - a for accuracy, precision and recall, rendered with a sign and 2 decimals.
std::vector<MetricDiff> diff_report(const Scores& a, const Scores& b);

double round2(double v);
/// Fixed 2-decimal rendering; "undefined" for nullopt.
std::string format_percent(std::optional<double> v);

}  // namespace adscreen
