#include "adscreen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "adscreen/error.hpp"

namespace adscreen {

ConfusionMatrix confusion_matrix(std::span<const bool> predicted, std::span<const bool> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(Errc::ShapeError, "predicted and true label counts differ");
  }
  if (truth.empty()) throw Error(Errc::ShapeError, "no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i]) {
      ++(truth[i] ? cm.tp : cm.fp);
    } else {
      ++(truth[i] ? cm.fn : cm.tn);
    }
  }
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> predicted,
                                 std::span<const std::string> truth, const std::string& positive) {
  if (predicted.size() != truth.size()) {
    throw Error(Errc::ShapeError, "predicted and true label counts differ");
  }
  // std::vector<bool> is not contiguous.
  std::unique_ptr<bool[]> p(new bool[truth.size()]), t(new bool[truth.size()]);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    p[i] = predicted[i] == positive;
    t[i] = truth[i] == positive;
  }
  return confusion_matrix(std::span<const bool>(p.get(), truth.size()),
                          std::span<const bool>(t.get(), truth.size()));
}

Scores scores(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw Error(Errc::EmptyMatrix, "confusion matrix is empty");
  Scores s;
  s.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  if (cm.tp + cm.fp > 0) {
    s.precision = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn > 0) {
    s.recall = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  return s;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> truth) {
  if (scores.size() != truth.size()) throw Error(Errc::ShapeError, "score and label counts differ");
  const auto pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), true));
  const auto neg = truth.size() - pos;
  if (pos == 0 || neg == 0) throw Error(Errc::DegenerateClass, "ROC needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> roc{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double thr = scores[order[i]];
    while (i < order.size() && scores[order[i]] == thr) {
      ++(truth[order[i]] ? tp : fp);
      ++i;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos), thr});
  }
  return roc;
}

double auc(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
  }
  return area;
}

EvalReport evaluate(std::span<const bool> predicted, std::span<const double> positive_score,
                    std::span<const bool> truth) {
  EvalReport r;
  r.confusion = confusion_matrix(predicted, truth);
  r.scores = scores(r.confusion);
  r.roc = roc_curve(positive_score, truth);
  r.auc = auc(r.roc);
  return r;
}

double round2(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;
}

std::string format_percent(std::optional<double> v) {
  if (!v) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round2(*v));
  return buf;
}

std::vector<MetricDiff> diff_report(const Scores& a, const Scores& b) {
  auto diff = [](const char* name, std::optional<double> x, std::optional<double> y) {
    MetricDiff d{name, std::nullopt, "undefined"};
    if (x && y) {
      d.value = round2(*y - *x);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%+.2f", *d.value);
      d.text = buf;
    }
    return d;
  };
  return {diff("accuracy", a.accuracy, b.accuracy), diff("precision", a.precision, b.precision),
          diff("recall", a.recall, b.recall)};
}

}  // namespace adscreen
