#include "adscreen/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "adscreen/error.hpp"
#include "adscreen/forest.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

namespace {

bool is_imputable(const ColumnSpec& spec) { return spec.is_predictor(); }

Column filled_column(const ColumnSpec& spec, const Column& col) {
  Column out = col;
  const std::size_t n = col.size();
  std::size_t observed = 0;
  for (std::size_t r = 0; r < n; ++r) observed += col.missing[r] == 0;
  if (observed == n) return out;
  if (observed == 0) throw Error(Errc::AllMissingColumn, "column '" + spec.name + "' has no observed value");
  switch (spec.kind) {
    case FeatureKind::Numeric:
    case FeatureKind::Date: {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (!col.missing[r]) sum += col.numbers[r];
      }
      double mean = sum / static_cast<double>(observed);
      if (spec.kind == FeatureKind::Date) mean = std::round(mean);
      for (std::size_t r = 0; r < n; ++r) {
        if (col.missing[r]) {
          out.numbers[r] = mean;
          out.missing[r] = 0;
        }
      }
      break;
    }
    case FeatureKind::Binary: {
      std::size_t ones = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (!col.missing[r] && col.numbers[r] == 1.0) ++ones;
      }
      const double mode = ones > observed - ones ? 1.0 : 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (col.missing[r]) {
          out.numbers[r] = mode;
          out.missing[r] = 0;
        }
      }
      break;
    }
    case FeatureKind::Categorical:
    case FeatureKind::Target: {
      std::map<std::string, std::size_t> counts;
      for (std::size_t r = 0; r < n; ++r) {
        if (!col.missing[r]) ++counts[col.texts[r]];
      }
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (col.missing[r]) {
          out.texts[r] = best->first;
          out.missing[r] = 0;
        }
      }
      break;
    }
    case FeatureKind::Identifier:
      break;
  }
  return out;
}

// One model input: a predictor column or the target, encoded numerically.
struct Input {
  std::size_t column;
  FeatureInfo info;
  FeatureKind kind;
};

}  // namespace

Table mean_mode_fill(const Table& table) {
  const auto& schema = table.schema();
  std::vector<Column> cols;
  cols.reserve(table.n_cols());
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (schema[c].kind == FeatureKind::Identifier) {
      cols.push_back(table.column(c));
    } else {
      cols.push_back(filled_column(schema[c], table.column(c)));
    }
  }
  return Table(schema, std::move(cols));
}

ImputeResult missforest(const Table& table, const ImputeConfig& config) {
  if (config.ntree < 1) throw Error(Errc::InvalidArgument, "ntree must be at least 1");
  if (config.max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be at least 1");
  const auto& schema = table.schema();
  const std::size_t n = table.n_rows();

  std::vector<std::size_t> targets;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (is_imputable(schema[c]) && table.column(c).missing_count() > 0) targets.push_back(c);
  }
  ImputeResult result{table, 0, {}};
  if (targets.empty()) return result;

  std::vector<Input> inputs;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    const auto& spec = schema[c];
    const bool target_ok = spec.kind == FeatureKind::Target && table.column(c).missing_count() == 0;
    if (!is_imputable(spec) && !target_ok) continue;
    FeatureInfo info{spec.name, spec.kind == FeatureKind::Categorical || spec.kind == FeatureKind::Target, {}};
    if (info.categorical) info.levels = spec.levels;
    inputs.push_back({c, std::move(info), spec.kind});
  }
  if (inputs.size() < 2) throw Error(Errc::InvalidArgument, "imputation needs at least two model inputs");

  // Warm start, then column-major encoded state of every input.
  const Table warm = mean_mode_fill(table);
  const std::size_t q = inputs.size();
  std::vector<double> state(q * n);
  std::vector<std::size_t> input_of(table.n_cols(), q);
  for (std::size_t j = 0; j < q; ++j) {
    const auto c = inputs[j].column;
    input_of[c] = j;
    const auto& spec = schema[c];
    for (std::size_t r = 0; r < n; ++r) {
      if (inputs[j].info.categorical) {
        const auto lv = spec.level_index(warm.text(r, c));
        if (!lv) throw Error(Errc::UnknownLevel, "level '" + warm.text(r, c) + "' in '" + spec.name + "'");
        state[j * n + r] = static_cast<double>(*lv);
      } else {
        state[j * n + r] = warm.number(r, c);
      }
    }
  }

  std::stable_sort(targets.begin(), targets.end(), [&](std::size_t a, std::size_t b) {
    return table.column(a).missing_count() < table.column(b).missing_count();
  });
  bool has_numeric = false, has_categorical = false;
  for (auto c : targets) {
    (schema[c].kind == FeatureKind::Numeric ? has_numeric : has_categorical) = true;
  }

  std::optional<ImputeDiff> last;
  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    const std::vector<double> before = state;
    for (auto c : targets) {
      const std::size_t j = input_of[c];
      const auto& spec = schema[c];
      std::vector<std::size_t> obs, mis;
      for (std::size_t r = 0; r < n; ++r) (table.missing(r, c) ? mis : obs).push_back(r);

      std::vector<FeatureInfo> features;
      std::vector<std::size_t> feature_input;
      for (std::size_t k = 0; k < q; ++k) {
        if (k == j) continue;
        features.push_back(inputs[k].info);
        feature_input.push_back(k);
      }
      const std::size_t p = features.size();
      std::vector<double> values(p * obs.size());
      for (std::size_t f = 0; f < p; ++f) {
        const double* src = state.data() + feature_input[f] * n;
        for (std::size_t i = 0; i < obs.size(); ++i) values[f * obs.size() + i] = src[obs[i]];
      }

      ForestConfig fc;
      fc.ntree = config.ntree;
      fc.seed = derive_seed(config.seed, {0x1a7e, iter, c});
      fc.threads = config.threads;
      const bool numeric = spec.kind == FeatureKind::Numeric;
      if (config.mtry) {
        fc.mtry = std::min(*config.mtry, p);
      } else if (numeric) {
        fc.mtry = std::max<std::size_t>(1, p / 3);
      }
      fc.min_node_size = numeric ? 5 : 1;

      double* dst = state.data() + j * n;
      std::optional<TrainingData> data;
      if (numeric) {
        std::vector<double> y(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) y[i] = table.number(obs[i], c);
        data = TrainingData::regression(features, obs.size(), std::move(values), std::move(y));
      } else {
        std::vector<std::string> classes =
            spec.kind == FeatureKind::Binary ? std::vector<std::string>{"0", "1"} : spec.levels;
        std::vector<int> labels(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) labels[i] = static_cast<int>(std::lround(dst[obs[i]]));
        const bool single = std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); });
        if (single) {
          for (auto r : mis) dst[r] = labels.front();
          continue;
        }
        data = TrainingData::classification(features, obs.size(), std::move(values), std::move(labels),
                                            std::move(classes));
      }
      const auto forest = fit_forest(*data, fc);
      std::vector<double> row(p);
      std::vector<double> predicted(mis.size());
      for (std::size_t i = 0; i < mis.size(); ++i) {
        for (std::size_t f = 0; f < p; ++f) row[f] = state[feature_input[f] * n + mis[i]];
        predicted[i] = numeric ? forest.predict_value(row) : static_cast<double>(forest.predict(row).label);
      }
      for (std::size_t i = 0; i < mis.size(); ++i) dst[mis[i]] = predicted[i];
    }

    ImputeDiff diff;
    double num = 0.0, den = 0.0;
    std::size_t changed = 0, cells = 0;
    for (auto c : targets) {
      const std::size_t j = input_of[c];
      for (std::size_t r = 0; r < n; ++r) {
        if (!table.missing(r, c)) continue;
        const double a = state[j * n + r], b = before[j * n + r];
        if (schema[c].kind == FeatureKind::Numeric) {
          num += (a - b) * (a - b);
          den += a * a;
        } else {
          ++cells;
          changed += a != b;
        }
      }
    }
    diff.numeric = den > 0.0 ? num / den : 0.0;
    diff.categorical = cells ? static_cast<double>(changed) / static_cast<double>(cells) : 0.0;
    result.diff_trace.push_back(diff);
    result.iterations_run = iter + 1;
    if (last) {
      const bool num_worse = !has_numeric || diff.numeric >= last->numeric;
      const bool cat_worse = !has_categorical || diff.categorical >= last->categorical;
      if (num_worse && cat_worse) {
        state = before;
        break;
      }
    }
    last = diff;
  }

  std::vector<Column> cols = table.columns();
  for (auto c : targets) {
    const std::size_t j = input_of[c];
    auto& col = cols[c];
    const auto& spec = schema[c];
    for (std::size_t r = 0; r < n; ++r) {
      if (!col.missing[r]) continue;
      const double v = state[j * n + r];
      if (spec.kind == FeatureKind::Categorical) {
        col.texts[r] = spec.levels[static_cast<std::size_t>(v)];
      } else {
        col.numbers[r] = v;
      }
      col.missing[r] = 0;
    }
  }
  result.table = Table(schema, std::move(cols));
  return result;
}

double imputation_nrmse(const Table& completed, const Table& truth, const Table& mask) {
  if (completed.n_rows() != truth.n_rows() || completed.n_rows() != mask.n_rows()) {
    throw Error(Errc::ShapeError, "tables differ in row count");
  }
  std::vector<double> err, actual;
  const auto& schema = mask.schema();
  for (std::size_t c = 0; c < mask.n_cols(); ++c) {
    if (schema[c].kind != FeatureKind::Numeric) continue;
    const auto ci = completed.schema().index_of(schema[c].name);
    const auto ti = truth.schema().index_of(schema[c].name);
    for (std::size_t r = 0; r < mask.n_rows(); ++r) {
      if (!mask.missing(r, c) || truth.missing(r, ti)) continue;
      if (completed.missing(r, ci)) throw Error(Errc::MissingValues, "evaluated cell is still masked");
      err.push_back(completed.number(r, ci) - truth.number(r, ti));
      actual.push_back(truth.number(r, ti));
    }
  }
  if (err.empty()) throw Error(Errc::NoEvalCells, "no masked numeric cells to evaluate");
  const double m = static_cast<double>(err.size());
  double sq = 0.0;
  for (double e : err) sq += e * e;
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / m;
  double var = 0.0;
  for (double a : actual) var += (a - mean) * (a - mean);
  var /= m;
  const double rmse = std::sqrt(sq / m);
  if (var == 0.0) return rmse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return rmse / std::sqrt(var);
}

}  // namespace adscreen
