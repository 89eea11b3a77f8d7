#include "adscreen/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adscreen/error.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

NeighborLists nearest_minority_neighbors(const std::vector<std::vector<double>>& rows, std::size_t k) {
  const std::size_t m = rows.size();
  if (m < 2) throw Error(Errc::TooFewMinority, "need at least 2 minority rows, got " + std::to_string(m));
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be at least 1");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(Errc::ShapeError, "rows differ in length");
  }
  std::vector<double> z(m * d);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(m));
    const double scale = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < m; ++i) z[i * d + j] = (rows[i][j] - mean) / scale;
  }

  NeighborLists out;
  out.k_used = std::min(k, m - 1);
  out.clamped = out.k_used < k;
  out.neighbors.resize(m);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < m; ++i) {
    dist.clear();
    for (std::size_t o = 0; o < m; ++o) {
      if (o == i) continue;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = z[i * d + j] - z[o * d + j];
        s += diff * diff;
      }
      dist.emplace_back(s, o);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(out.k_used), dist.end());
    auto& nb = out.neighbors[i];
    for (std::size_t t = 0; t < out.k_used; ++t) nb.push_back(dist[t].second);
  }
  return out;
}

SmoteResult smote(const Table& train, const SmoteConfig& config) {
  if (config.target == SmoteTarget::Ratio && !(config.ratio > 0.0 && config.ratio <= 1.0)) {
    throw Error(Errc::InvalidArgument, "ratio must lie in (0, 1]");
  }
  const auto& schema = train.schema();
  const auto t = schema.require_target();
  const std::size_t n = train.n_rows();

  std::vector<std::string> classes;
  for (std::size_t r = 0; r < n; ++r) {
    if (train.missing(r, t)) throw Error(Errc::MissingValues, "masked target at row " + std::to_string(r + 1));
    const auto& label = train.text(r, t);
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) classes.push_back(label);
  }
  if (classes.size() != 2) {
    throw Error(Errc::InvalidArgument, "SMOTE needs exactly two classes, found " + std::to_string(classes.size()));
  }
  std::sort(classes.begin(), classes.end());
  std::vector<std::size_t> rows_of[2];
  for (std::size_t r = 0; r < n; ++r) rows_of[train.text(r, t) == classes[1]].push_back(r);
  const std::size_t minority = rows_of[1].size() < rows_of[0].size() ? 1 : 0;
  const auto& mrows = rows_of[minority];
  const std::size_t majority_count = rows_of[1 - minority].size();

  const auto predictors = schema.predictors();
  std::vector<std::size_t> numeric;
  for (auto c : predictors) {
    for (std::size_t r = 0; r < n; ++r) {
      if (train.missing(r, c)) {
        throw Error(Errc::MissingValues, "masked '" + schema[c].name + "' at row " + std::to_string(r + 1));
      }
    }
    if (schema[c].kind == FeatureKind::Numeric) numeric.push_back(c);
  }

  std::size_t wanted = majority_count;
  if (config.target == SmoteTarget::Ratio) {
    wanted = static_cast<std::size_t>(std::llround(config.ratio * static_cast<double>(majority_count)));
  }
  SmoteResult result{train, classes[minority], 0, {}, 0, false};
  if (wanted <= mrows.size()) return result;
  const std::size_t n_new = wanted - mrows.size();

  std::vector<std::vector<double>> points(mrows.size());
  for (std::size_t i = 0; i < mrows.size(); ++i) {
    for (auto c : numeric) points[i].push_back(train.number(mrows[i], c));
  }
  const auto nb = nearest_minority_neighbors(points, config.k_neighbors);
  result.k_used = nb.k_used;
  result.k_clamped = nb.clamped;

  std::vector<Column> cols;
  for (std::size_t c = 0; c < schema.size(); ++c) cols.push_back(Column::empty_like(schema[c], n_new));
  Rng rng(derive_seed(config.seed, {0x5307e}));
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t i = rng.index(mrows.size());
    const std::size_t a = mrows[i];
    const std::size_t b = mrows[nb.neighbors[i][rng.index(nb.k_used)]];
    result.parents.emplace_back(a, b);
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& spec = schema[c];
      auto& col = cols[c];
      col.missing[s] = 0;
      switch (spec.kind) {
        case FeatureKind::Numeric: {
          const double x = train.number(a, c), y = train.number(b, c);
          const double v = x + rng.uniform() * (y - x);
          col.numbers[s] = std::clamp(v, std::min(x, y), std::max(x, y));
          break;
        }
        case FeatureKind::Binary:
          col.numbers[s] = rng.coin() ? train.number(b, c) : train.number(a, c);
          break;
        case FeatureKind::Categorical:
          col.texts[s] = rng.coin() ? train.text(b, c) : train.text(a, c);
          break;
        case FeatureKind::Target:
          col.texts[s] = classes[minority];
          break;
        case FeatureKind::Date:
          col.missing[s] = train.column(c).missing[a];
          col.numbers[s] = train.number(a, c);
          break;
        case FeatureKind::Identifier:
          col.missing[s] = train.column(c).missing[a];
          col.texts[s] = col.missing[s] ? "" : train.text(a, c) + "-smote" + std::to_string(s + 1);
          break;
      }
    }
  }
  result.table = train.append_rows(Table(schema, std::move(cols)));
  result.synthetic_rows = n_new;
  return result;
}

}  // namespace adscreen
