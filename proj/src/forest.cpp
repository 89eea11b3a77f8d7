#include "adscreen/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adscreen/error.hpp"
#include "adscreen/parallel.hpp"

namespace adscreen {

namespace {

constexpr double kMinDecrease = 1e-12;
// Relative half-width, in units of the split gap, of the band around a
// numeric threshold that still routes left.
constexpr double kTieBand = 1e-9;

// Sufficient statistics of the rows in one node.
struct NodeTotals {
  double weight = 0.0;
  std::vector<double> counts;  // classification
  double sum = 0.0;            // regression
  double min_y = 0.0;
  double max_y = 0.0;
};

bool better(double dec, std::size_t f, double thr, const std::optional<Split>& best) {
  if (!best) return dec > kMinDecrease;
  if (dec != best->impurity_decrease) return dec > best->impurity_decrease;
  if (f != best->feature) return f < best->feature;
  return thr < best->threshold;
}

double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi)) mid = lo;
  return mid;
}

// Split search over a node's unique rows with per-row weights. Holds scratch
// buffers so one instance serves a whole tree.
class SplitSearch {
 public:
  SplitSearch(const TrainingData& data, std::span<const double> weight)
      : data_(data), weight_(weight), n_classes_(std::max<std::size_t>(data.n_classes(), 1)) {}

  NodeTotals totals(std::span<const std::uint32_t> rows) const {
    NodeTotals t;
    const bool cls = data_.task() == Task::Classification;
    if (cls) t.counts.assign(n_classes_, 0.0);
    bool first = true;
    for (auto r : rows) {
      const double w = weight_[r];
      t.weight += w;
      if (cls) {
        t.counts[static_cast<std::size_t>(data_.label(r))] += w;
      } else {
        const double y = data_.response(r);
        t.sum += w * y;
        if (first || y < t.min_y) t.min_y = y;
        if (first || y > t.max_y) t.max_y = y;
        first = false;
      }
    }
    return t;
  }

  bool pure(const NodeTotals& t) const {
    if (data_.task() == Task::Classification) {
      return *std::max_element(t.counts.begin(), t.counts.end()) >= t.weight;
    }
    return t.min_y == t.max_y;
  }

  std::optional<Split> run(std::span<const std::uint32_t> rows,
                           std::span<const std::size_t> features, const NodeTotals& tot) {
    std::optional<Split> best;
    if (data_.task() == Task::Classification) {
      parent_sq_ = 0.0;
      for (double c : tot.counts) parent_sq_ += c * c;
    }
    for (auto f : features) {
      if (data_.features()[f].categorical) {
        categorical(rows, f, tot, best);
      } else if (data_.distinct(f).size() <= 2 * rows.size()) {
        numeric_histogram(rows, f, tot, best);
      } else {
        numeric_sorted(rows, f, tot, best);
      }
    }
    return best;
  }

 private:
  // Impurity decrease given left-side statistics.
  double decrease_cls(double wl, double sql, double wr, double sqr, double w) const {
    const double score = sql / wl + sqr / wr;
    return score / w - parent_sq_ / (w * w);
  }
  static double decrease_reg(double wl, double sl, double w, double s) {
    const double wr = w - wl;
    const double sr = s - sl;
    const double score = sl * sl / wl + sr * sr / wr;
    return (score - s * s / w) / w;
  }

  // Streaming left-side statistics for a scan over ordered rows.
  struct ClassScan {
    std::vector<double> left;
    double wl = 0.0, sql = 0.0, sqr = 0.0;
    void reset(std::size_t k, double parent_sq) {
      left.assign(k, 0.0);
      wl = 0.0;
      sql = 0.0;
      sqr = parent_sq;
    }
    void add(std::size_t c, double a, const std::vector<double>& tot) {
      const double l_old = left[c];
      sql += 2.0 * a * l_old + a * a;
      sqr += -2.0 * a * (tot[c] - l_old) + a * a;
      left[c] = l_old + a;
      wl += a;
    }
  };

  void numeric_histogram(std::span<const std::uint32_t> rows, std::size_t f,
                         const NodeTotals& tot, std::optional<Split>& best) {
    const auto& ranks = data_.ranks(f);
    const auto& distinct = data_.distinct(f);
    const std::size_t k = distinct.size();
    const bool cls = data_.task() == Task::Classification;
    const std::size_t stride = cls ? n_classes_ : 1;
    hist_.assign(k * stride, 0.0);
    hist_w_.assign(k, 0.0);
    for (auto r : rows) {
      const auto rk = ranks[r];
      const double w = weight_[r];
      hist_w_[rk] += w;
      if (cls) hist_[rk * stride + static_cast<std::size_t>(data_.label(r))] += w;
      else hist_[rk] += w * data_.response(r);
    }
    std::size_t prev = k;
    if (cls) {
      scan_.reset(n_classes_, parent_sq_);
      for (std::size_t i = 0; i < k; ++i) {
        if (hist_w_[i] == 0.0) continue;
        if (prev != k) {
          const double thr = midpoint(distinct[prev], distinct[i]);
          const double dec = decrease_cls(scan_.wl, scan_.sql, tot.weight - scan_.wl, scan_.sqr, tot.weight);
          if (better(dec, f, thr, best)) best = Split{f, thr, 0, dec, distinct[i] - distinct[prev]};
        }
        const double* cnt = hist_.data() + i * stride;
        for (std::size_t c = 0; c < n_classes_; ++c) {
          if (cnt[c] != 0.0) scan_.add(c, cnt[c], tot.counts);
        }
        prev = i;
      }
    } else {
      double wl = 0.0, sl = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (hist_w_[i] == 0.0) continue;
        if (prev != k) {
          const double thr = midpoint(distinct[prev], distinct[i]);
          const double dec = decrease_reg(wl, sl, tot.weight, tot.sum);
          if (better(dec, f, thr, best)) best = Split{f, thr, 0, dec, distinct[i] - distinct[prev]};
        }
        wl += hist_w_[i];
        sl += hist_[i];
        prev = i;
      }
    }
  }

  void numeric_sorted(std::span<const std::uint32_t> rows, std::size_t f, const NodeTotals& tot,
                      std::optional<Split>& best) {
    const auto& ranks = data_.ranks(f);
    const auto& distinct = data_.distinct(f);
    keys_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      keys_[i] = (static_cast<std::uint64_t>(ranks[rows[i]]) << 32) | rows[i];
    }
    std::sort(keys_.begin(), keys_.end());
    const bool cls = data_.task() == Task::Classification;
    if (cls) scan_.reset(n_classes_, parent_sq_);
    double wl = 0.0, sl = 0.0;
    std::uint32_t prev = static_cast<std::uint32_t>(keys_.front() >> 32);
    for (auto key : keys_) {
      const auto rk = static_cast<std::uint32_t>(key >> 32);
      const auto r = static_cast<std::uint32_t>(key & 0xffffffffu);
      if (rk != prev) {
        const double thr = midpoint(distinct[prev], distinct[rk]);
        const double dec = cls ? decrease_cls(scan_.wl, scan_.sql, tot.weight - scan_.wl, scan_.sqr, tot.weight)
                               : decrease_reg(wl, sl, tot.weight, tot.sum);
        if (better(dec, f, thr, best)) best = Split{f, thr, 0, dec, distinct[rk] - distinct[prev]};
        prev = rk;
      }
      const double w = weight_[r];
      if (cls) {
        scan_.add(static_cast<std::size_t>(data_.label(r)), w, tot.counts);
      } else {
        wl += w;
        sl += w * data_.response(r);
      }
    }
  }

  void categorical(std::span<const std::uint32_t> rows, std::size_t f, const NodeTotals& tot,
                   std::optional<Split>& best) {
    const std::size_t n_levels = data_.features()[f].levels.size();
    const bool cls = data_.task() == Task::Classification;
    const std::size_t stride = cls ? n_classes_ : 1;
    hist_.assign(n_levels * stride, 0.0);
    hist_w_.assign(n_levels, 0.0);
    for (auto r : rows) {
      const auto lv = static_cast<std::size_t>(data_.value(r, f));
      const double w = weight_[r];
      hist_w_[lv] += w;
      if (cls) hist_[lv * stride + static_cast<std::size_t>(data_.label(r))] += w;
      else hist_[lv] += w * data_.response(r);
    }
    present_.clear();
    for (std::size_t i = 0; i < n_levels; ++i) {
      if (hist_w_[i] > 0.0) present_.push_back(static_cast<std::uint32_t>(i));
    }
    if (present_.size() < 2) return;

    // Order levels: positive-class rate (two classes), rate of the node's
    // majority class (more classes), or mean response (regression).
    std::size_t key_class = 0;
    if (cls) {
      key_class = n_classes_ == 2 ? 1 : vote_winner(tot.counts);
    }
    order_key_.assign(n_levels, 0.0);
    for (auto lv : present_) {
      order_key_[lv] = hist_[lv * stride + (cls ? key_class : 0)] / hist_w_[lv];
    }
    std::stable_sort(present_.begin(), present_.end(), [&](std::uint32_t a, std::uint32_t b) {
      return order_key_[a] < order_key_[b];
    });

    auto consider = [&](std::size_t g, double dec) {
      const double position = static_cast<double>(g);
      if (!better(dec, f, position, best)) return;
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i <= g; ++i) mask |= std::uint64_t{1} << present_[i];
      best = Split{f, position, mask, dec};
    };
    if (cls) scan_.reset(n_classes_, parent_sq_);
    double wl = 0.0, sl = 0.0;
    for (std::size_t g = 0; g + 1 < present_.size(); ++g) {
      const auto lv = present_[g];
      if (cls) {
        const double* cnt = hist_.data() + lv * stride;
        for (std::size_t c = 0; c < n_classes_; ++c) {
          if (cnt[c] != 0.0) scan_.add(c, cnt[c], tot.counts);
        }
        consider(g, decrease_cls(scan_.wl, scan_.sql, tot.weight - scan_.wl, scan_.sqr, tot.weight));
      } else {
        wl += hist_w_[lv];
        sl += hist_[lv];
        consider(g, decrease_reg(wl, sl, tot.weight, tot.sum));
      }
    }
  }

  const TrainingData& data_;
  std::span<const double> weight_;
  std::size_t n_classes_;
  double parent_sq_ = 0.0;
  ClassScan scan_;
  std::vector<double> hist_;
  std::vector<double> hist_w_;
  std::vector<std::uint32_t> present_;
  std::vector<std::uint64_t> keys_;
  std::vector<double> order_key_;
};

bool goes_left(const TrainingData& data, std::uint32_t row, const Split& s) {
  const double v = data.value(row, s.feature);
  if (s.left_levels != 0) return ((s.left_levels >> static_cast<unsigned>(v)) & 1u) != 0;
  return v <= s.threshold;
}

void make_leaf(TreeNode& node, const NodeTotals& tot, Task task) {
  node.feature = -1;
  node.weight = tot.weight;
  if (task == Task::Classification) {
    node.counts = tot.counts;
    node.value = static_cast<double>(vote_winner(tot.counts));
  } else {
    node.value = tot.sum / tot.weight;
  }
}

void check_features(const TrainingData& data) {
  for (const auto& f : data.features()) {
    if (f.categorical && (f.levels.empty() || f.levels.size() > 64)) {
      throw Error(Errc::InvalidArgument,
                  "categorical feature '" + f.name + "' needs between 1 and 64 levels");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TrainingData

TrainingData TrainingData::classification(std::vector<FeatureInfo> features, std::size_t n_rows,
                                          std::vector<double> values, std::vector<int> labels,
                                          std::vector<std::string> classes) {
  TrainingData d;
  d.task_ = Task::Classification;
  d.features_ = std::move(features);
  d.n_rows_ = n_rows;
  d.values_ = std::move(values);
  d.labels_ = std::move(labels);
  d.classes_ = std::move(classes);
  if (d.values_.size() != n_rows * d.features_.size() || d.labels_.size() != n_rows) {
    throw Error(Errc::ShapeError, "training matrix shape mismatch");
  }
  for (int l : d.labels_) {
    if (l < 0 || static_cast<std::size_t>(l) >= d.classes_.size()) {
      throw Error(Errc::InvalidArgument, "label out of range");
    }
  }
  check_features(d);
  d.build_ranks();
  return d;
}

TrainingData TrainingData::regression(std::vector<FeatureInfo> features, std::size_t n_rows,
                                      std::vector<double> values, std::vector<double> response) {
  TrainingData d;
  d.task_ = Task::Regression;
  d.features_ = std::move(features);
  d.n_rows_ = n_rows;
  d.values_ = std::move(values);
  d.response_ = std::move(response);
  if (d.values_.size() != n_rows * d.features_.size() || d.response_.size() != n_rows) {
    throw Error(Errc::ShapeError, "training matrix shape mismatch");
  }
  check_features(d);
  d.build_ranks();
  return d;
}

TrainingData TrainingData::from_table(const Table& table, const std::vector<std::string>& predictors) {
  const auto& schema = table.schema();
  const auto t = schema.require_target();
  std::vector<std::size_t> cols;
  if (predictors.empty()) {
    cols = schema.predictors();
  } else {
    for (const auto& name : predictors) {
      const auto c = schema.index_of(name);
      if (!schema[c].is_predictor()) {
        throw Error(Errc::InvalidArgument, "column '" + name + "' is not a predictor");
      }
      cols.push_back(c);
    }
  }
  if (cols.empty()) throw Error(Errc::InvalidArgument, "no predictor columns");
  const std::size_t n = table.n_rows();
  std::vector<FeatureInfo> features;
  std::vector<double> values(n * cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& spec = schema[cols[j]];
    FeatureInfo info{spec.name, spec.kind == FeatureKind::Categorical, {}};
    if (info.categorical) info.levels = spec.levels;
    for (std::size_t r = 0; r < n; ++r) {
      if (table.missing(r, cols[j])) {
        throw Error(Errc::MissingValues, "masked cell in '" + spec.name + "' at row " + std::to_string(r + 1));
      }
      double v;
      if (info.categorical) {
        auto lv = spec.level_index(table.text(r, cols[j]));
        if (!lv) throw Error(Errc::UnknownLevel, "level '" + table.text(r, cols[j]) + "' in '" + spec.name + "'");
        v = static_cast<double>(*lv);
      } else {
        v = table.number(r, cols[j]);
      }
      values[j * n + r] = v;
    }
    features.push_back(std::move(info));
  }
  const auto& tspec = schema[t];
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (table.missing(r, t)) throw Error(Errc::MissingValues, "masked target at row " + std::to_string(r + 1));
    auto lv = tspec.level_index(table.text(r, t));
    if (!lv) throw Error(Errc::UnknownLevel, "target level '" + table.text(r, t) + "'");
    labels[r] = static_cast<int>(*lv);
  }
  return classification(std::move(features), n, std::move(values), std::move(labels), tspec.levels);
}

void TrainingData::build_ranks() {
  ranks_.assign(features_.size(), {});
  distinct_.assign(features_.size(), {});
  std::vector<double> sorted;
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto col = feature_column(f);
    sorted.assign(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    auto& rk = ranks_[f];
    rk.resize(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) {
      rk[r] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), col[r]) - sorted.begin());
    }
    distinct_[f] = sorted;
  }
}

// ---------------------------------------------------------------------------
// Tree

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double gini_impurity(std::span<const double> class_counts) {
  double total = 0.0;
  for (double c : class_counts) {
    if (c < 0.0) throw Error(Errc::InvalidArgument, "negative class count");
    total += c;
  }
  if (total <= 0.0) throw Error(Errc::EmptyNode, "gini of an empty node");
  double sq = 0.0;
  for (double c : class_counts) sq += (c / total) * (c / total);
  return 1.0 - sq;
}

std::size_t vote_winner(std::span<const double> tallies) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < tallies.size(); ++c) {
    if (tallies[c] >= tallies[best]) best = c;
  }
  return best;
}

std::optional<Split> best_split(const TrainingData& data, std::span<const std::uint32_t> rows,
                                std::span<const std::size_t> candidate_features) {
  if (candidate_features.empty()) throw Error(Errc::InvalidArgument, "no candidate features");
  for (auto f : candidate_features) {
    if (f >= data.n_features()) throw Error(Errc::InvalidArgument, "feature index out of range");
  }
  if (rows.size() < 2) return std::nullopt;
  std::vector<double> weight(data.n_rows(), 0.0);
  std::vector<std::uint32_t> unique;
  for (auto r : rows) {
    if (weight[r] == 0.0) unique.push_back(r);
    weight[r] += 1.0;
  }
  SplitSearch search(data, weight);
  const auto tot = search.totals(unique);
  if (search.pure(tot)) return std::nullopt;
  return search.run(unique, candidate_features, tot);
}

std::size_t resolve_mtry(const ForestConfig& config, std::size_t n_features) {
  if (n_features == 0) throw Error(Errc::InvalidArgument, "no features");
  if (config.mtry) {
    if (*config.mtry < 1 || *config.mtry > n_features) {
      throw Error(Errc::InvalidArgument, "mtry " + std::to_string(*config.mtry) +
                                             " outside [1, " + std::to_string(n_features) + "]");
    }
    return *config.mtry;
  }
  const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features))));
  return std::max<std::size_t>(1, m);
}

Tree fit_tree(const TrainingData& data, std::span<const std::uint32_t> in_bag,
              const ForestConfig& config, Rng& rng) {
  if (in_bag.empty()) throw Error(Errc::InvalidArgument, "empty in-bag sample");
  const std::size_t mtry = resolve_mtry(config, data.n_features());
  const std::size_t p = data.n_features();

  std::vector<double> weight(data.n_rows(), 0.0);
  std::vector<std::uint32_t> rows;
  for (auto r : in_bag) {
    if (r >= data.n_rows()) throw Error(Errc::InvalidArgument, "in-bag row out of range");
    if (weight[r] == 0.0) rows.push_back(r);
    weight[r] += 1.0;
  }
  std::sort(rows.begin(), rows.end());

  SplitSearch search(data, weight);
  std::vector<std::size_t> feats(p);
  std::iota(feats.begin(), feats.end(), 0);

  struct Pending {
    std::size_t node, begin, end, depth;
  };
  std::vector<TreeNode> nodes(1);
  std::vector<Pending> stack{{0, 0, rows.size(), 0}};
  while (!stack.empty()) {
    const auto job = stack.back();
    stack.pop_back();
    const std::span<const std::uint32_t> node_rows(rows.data() + job.begin, job.end - job.begin);
    const auto tot = search.totals(node_rows);

    std::optional<Split> split;
    const bool depth_ok = !config.max_depth || job.depth < *config.max_depth;
    if (depth_ok && tot.weight > static_cast<double>(config.min_node_size) && !search.pure(tot)) {
      for (std::size_t i = 0; i < mtry; ++i) {
        std::swap(feats[i], feats[i + rng.index(p - i)]);
      }
      split = search.run(node_rows, std::span<const std::size_t>(feats.data(), mtry), tot);
    }
    if (!split) {
      make_leaf(nodes[job.node], tot, data.task());
      continue;
    }
    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(job.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(job.end),
                              [&](std::uint32_t r) { return goes_left(data, r, *split); });
    const auto split_at = static_cast<std::size_t>(mid - rows.begin());
    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    auto& n = nodes[job.node];
    n.feature = static_cast<std::int32_t>(split->feature);
    n.threshold = split->threshold;
    n.tie_band = kTieBand * split->gap;
    n.left_levels = split->left_levels;
    n.impurity_decrease = split->impurity_decrease;
    n.weight = tot.weight;
    n.left = left;
    n.right = left + 1;
    stack.push_back({static_cast<std::size_t>(left + 1), split_at, job.end, job.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), job.begin, split_at, job.depth + 1});
  }
  return Tree(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Forest

ForestPrediction RandomForest::predict(std::span<const double> row) const {
  ForestPrediction out;
  out.vote_fractions.assign(classes.size(), 0.0);
  for (const auto& t : trees) {
    out.vote_fractions[static_cast<std::size_t>(t.leaf_for_row(row).value)] += 1.0;
  }
  out.label = vote_winner(out.vote_fractions);
  for (auto& v : out.vote_fractions) v /= static_cast<double>(trees.size());
  return out;
}

double RandomForest::predict_value(std::span<const double> row) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.leaf_for_row(row).value;
  return sum / static_cast<double>(trees.size());
}

std::vector<double> RandomForest::encode(const Table& table) const {
  const auto& schema = table.schema();
  const std::size_t p = features.size();
  std::vector<double> out(table.n_rows() * p);
  for (std::size_t f = 0; f < p; ++f) {
    const auto c = schema.index_of(features[f].name);
    const auto& spec = schema[c];
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (table.missing(r, c)) {
        throw Error(Errc::MissingAtPredict, "masked '" + spec.name + "' at row " + std::to_string(r + 1));
      }
      double v;
      if (features[f].categorical) {
        const auto& lv = table.text(r, c);
        auto it = std::find(features[f].levels.begin(), features[f].levels.end(), lv);
        if (it == features[f].levels.end()) {
          throw Error(Errc::UnknownLevel, "level '" + lv + "' unseen for '" + spec.name + "'");
        }
        v = static_cast<double>(it - features[f].levels.begin());
      } else {
        v = table.number(r, c);
      }
      out[r * p + f] = v;
    }
  }
  return out;
}

std::vector<ForestPrediction> RandomForest::predict(const Table& table) const {
  const auto x = encode(table);
  const std::size_t p = features.size();
  std::vector<ForestPrediction> out;
  out.reserve(table.n_rows());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    out.push_back(predict(std::span<const double>(x.data() + r * p, p)));
  }
  return out;
}

RandomForest fit_forest(const TrainingData& data, const ForestConfig& config) {
  if (config.ntree < 1) throw Error(Errc::InvalidArgument, "ntree must be at least 1");
  if (data.n_rows() == 0) throw Error(Errc::InvalidArgument, "empty training set");
  if (data.task() == Task::Classification) {
    std::vector<std::uint8_t> seen(data.n_classes(), 0);
    for (int l : data.labels()) seen[static_cast<std::size_t>(l)] = 1;
    if (std::count(seen.begin(), seen.end(), std::uint8_t{1}) < 2) {
      throw Error(Errc::DegenerateClass, "training set holds a single class");
    }
  }
  RandomForest forest;
  forest.task = data.task();
  forest.features = data.features();
  forest.classes = data.classes();
  forest.config = config;
  forest.mtry = resolve_mtry(config, data.n_features());
  forest.n_train = data.n_rows();
  forest.trees.resize(config.ntree);
  forest.in_bag.resize(config.ntree);

  const std::size_t n = data.n_rows();
  parallel_for(config.ntree, config.threads, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, {i}));
    std::vector<std::uint32_t> sample(n);
    auto& counts = forest.in_bag[i];
    counts.assign(n, 0);
    for (auto& s : sample) {
      s = static_cast<std::uint32_t>(rng.index(n));
      ++counts[s];
    }
    forest.trees[i] = fit_tree(data, sample, config, rng);
  });
  return forest;
}

RandomForest fit_forest(const Table& train, const ForestConfig& config) {
  return fit_forest(TrainingData::from_table(train), config);
}

OobCurve oob_error(const RandomForest& forest, const TrainingData& train) {
  if (forest.task != Task::Classification) {
    throw Error(Errc::InvalidArgument, "OOB error curve needs a classification forest");
  }
  if (train.n_rows() != forest.n_train || forest.in_bag.size() != forest.trees.size()) {
    throw Error(Errc::InvalidArgument, "forest was not fitted on this training set");
  }
  const std::size_t n = train.n_rows();
  const std::size_t k = forest.classes.size();
  std::vector<double> votes(n * k, 0.0);
  std::vector<std::uint8_t> scored(n, 0);
  OobCurve curve;
  curve.per_class.assign(k, {});
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    const auto& bag = forest.in_bag[t];
    for (std::size_t r = 0; r < n; ++r) {
      if (bag[r] != 0) continue;
      const auto& leaf = tree.leaf_for([&](std::size_t f) { return train.value(r, f); });
      votes[r * k + static_cast<std::size_t>(leaf.value)] += 1.0;
      scored[r] = 1;
    }
    std::size_t total = 0, wrong = 0;
    std::vector<std::size_t> class_total(k, 0), class_wrong(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
      if (!scored[r]) continue;
      const auto truth = static_cast<std::size_t>(train.label(r));
      const bool miss = vote_winner(std::span<const double>(votes.data() + r * k, k)) != truth;
      ++total;
      ++class_total[truth];
      if (miss) {
        ++wrong;
        ++class_wrong[truth];
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    curve.overall.push_back(total ? static_cast<double>(wrong) / static_cast<double>(total) : nan);
    for (std::size_t c = 0; c < k; ++c) {
      curve.per_class[c].push_back(class_total[c] ? static_cast<double>(class_wrong[c]) /
                                                        static_cast<double>(class_total[c])
                                                  : nan);
    }
    curve.scored_rows = total;
  }
  return curve;
}

OobCurve oob_error(const RandomForest& forest, const Table& train) {
  std::vector<std::string> names;
  for (const auto& f : forest.features) names.push_back(f.name);
  return oob_error(forest, TrainingData::from_table(train, names));
}

std::uint64_t tune_seed(std::uint64_t base_seed, std::size_t mtry) {
  return derive_seed(base_seed, {0x7e4e, mtry});
}

TuneResult tune_mtry(const TrainingData& train, const ForestConfig& base,
                     const std::vector<std::size_t>& grid,
                     const std::function<void(std::size_t, const RandomForest&)>& on_fit) {
  if (grid.empty()) throw Error(Errc::EmptyGrid, "mtry grid is empty");
  for (auto m : grid) {
    if (m < 1 || m > train.n_features()) {
      throw Error(Errc::InvalidArgument, "grid value " + std::to_string(m) + " outside [1, " +
                                             std::to_string(train.n_features()) + "]");
    }
  }
  TuneResult result;
  for (auto m : grid) {
    ForestConfig cfg = base;
    cfg.mtry = m;
    cfg.seed = tune_seed(base.seed, m);
    const auto forest = fit_forest(train, cfg);
    const double err = oob_error(forest, train).overall.back();
    if (on_fit) on_fit(m, forest);
    result.points.push_back({m, err});
  }
  const TunePoint* best = &result.points.front();
  for (const auto& pt : result.points) {
    if (pt.oob_error < best->oob_error || (pt.oob_error == best->oob_error && pt.mtry < best->mtry)) {
      best = &pt;
    }
  }
  result.best_mtry = best->mtry;
  return result;
}

TuneResult tune_mtry(const Table& train, const ForestConfig& base,
                     const std::vector<std::size_t>& grid,
                     const std::function<void(std::size_t, const RandomForest&)>& on_fit) {
  return tune_mtry(TrainingData::from_table(train), base, grid, on_fit);
}

}  // namespace adscreen
