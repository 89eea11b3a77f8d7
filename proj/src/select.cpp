#include "adscreen/select.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/eval.hpp"
#include "adscreen/parallel.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

namespace {

std::size_t positive_class(const RandomForest& model) {
  const auto it = std::find(model.classes.begin(), model.classes.end(), kNonHealthy);
  if (it != model.classes.end()) return static_cast<std::size_t>(it - model.classes.begin());
  return model.classes.size() - 1;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Loss of the forest on a row-major matrix.
double model_loss(const RandomForest& model, const std::vector<double>& x, std::size_t n,
                  const std::vector<std::size_t>& truth, ImportanceLoss loss, std::size_t pos) {
  const std::size_t p = model.features.size();
  const std::size_t k = model.classes.size();
  std::size_t correct = 0;
  std::vector<double> score(n);
  std::unique_ptr<bool[]> is_pos(new bool[n]);
  std::vector<double> votes(k);
  for (std::size_t r = 0; r < n; ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    const double* row = x.data() + r * p;
    for (const auto& t : model.trees) {
      votes[static_cast<std::size_t>(t.leaf_for([&](std::size_t f) { return row[f]; }).value)] += 1.0;
    }
    correct += vote_winner(votes) == truth[r];
    score[r] = votes[pos] / static_cast<double>(model.trees.size());
    is_pos[r] = truth[r] == pos;
  }
  if (loss == ImportanceLoss::Accuracy) return 1.0 - static_cast<double>(correct) / static_cast<double>(n);
  const auto roc = roc_curve(score, std::span<const bool>(is_pos.get(), n));
  return 1.0 - auc(roc);
}

std::vector<std::uint8_t> used_features(const Tree& tree, std::size_t p) {
  std::vector<std::uint8_t> used(p, 0);
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) used[static_cast<std::size_t>(node.feature)] = 1;
  }
  return used;
}

}  // namespace

std::string decision_name(BorutaDecision d) {
  switch (d) {
    case BorutaDecision::Confirmed:
      return "Confirmed";
    case BorutaDecision::Rejected:
      return "Rejected";
    case BorutaDecision::Tentative:
      return "Tentative";
  }
  return "Tentative";
}

ImportanceReport permutation_importance(const RandomForest& model, const Table& data,
                                        std::size_t n_permutations, std::uint64_t seed,
                                        ImportanceLoss loss, std::size_t threads) {
  if (n_permutations == 0) throw Error(Errc::EmptyConfig, "n_permutations must be at least 1");
  if (model.task != Task::Classification) throw Error(Errc::InvalidArgument, "classification forest required");
  const auto x = model.encode(data);
  const std::size_t n = data.n_rows();
  const std::size_t p = model.features.size();
  const auto t = data.schema().require_target();
  std::vector<std::size_t> truth(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (data.missing(r, t)) throw Error(Errc::MissingValues, "masked target at row " + std::to_string(r + 1));
    const auto it = std::find(model.classes.begin(), model.classes.end(), data.text(r, t));
    if (it == model.classes.end()) throw Error(Errc::UnknownLevel, "class '" + data.text(r, t) + "'");
    truth[r] = static_cast<std::size_t>(it - model.classes.begin());
  }
  const std::size_t pos = positive_class(model);

  ImportanceReport report;
  report.loss = loss;
  report.baseline_loss = model_loss(model, x, n, truth, loss, pos);
  report.features.resize(p);
  parallel_for(p, threads, [&](std::size_t f) {
    Rng rng(derive_seed(seed, {0x1390, f}));
    std::vector<double> xp = x;
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = x[r * p + f];
    std::vector<double> drops;
    for (std::size_t rep = 0; rep < n_permutations; ++rep) {
      std::vector<double> shuffled = column;
      rng.shuffle(std::span<double>(shuffled));
      for (std::size_t r = 0; r < n; ++r) xp[r * p + f] = shuffled[r];
      drops.push_back(model_loss(model, xp, n, truth, loss, pos) - report.baseline_loss);
    }
    auto& out = report.features[f];
    out.feature = model.features[f].name;
    out.mean_loss_drop = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(drops.size());
    out.stddev = sample_sd(drops);
    out.n_permutations = n_permutations;
  });
  return report;
}

std::vector<double> oob_permutation_importance(const RandomForest& forest, const TrainingData& data,
                                               std::uint64_t seed) {
  const std::size_t p = data.n_features();
  const std::size_t n = data.n_rows();
  const std::size_t ntree = forest.trees.size();
  std::vector<double> drops(ntree * p, 0.0);
  parallel_for(ntree, forest.config.threads, [&](std::size_t t) {
    const auto& tree = forest.trees[t];
    const auto& bag = forest.in_bag[t];
    std::vector<std::uint32_t> oob;
    for (std::size_t r = 0; r < n; ++r) {
      if (bag[r] == 0) oob.push_back(static_cast<std::uint32_t>(r));
    }
    if (oob.empty()) return;
    std::size_t base = 0;
    for (auto r : oob) {
      base += static_cast<int>(tree.leaf_for([&](std::size_t f) { return data.value(r, f); }).value) == data.label(r);
    }
    const auto used = used_features(tree, p);
    std::vector<std::uint32_t> perm(oob);
    for (std::size_t f = 0; f < p; ++f) {
      if (!used[f]) continue;
      perm = oob;
      Rng rng(derive_seed(seed, {t, f}));
      rng.shuffle(std::span<std::uint32_t>(perm));
      std::size_t correct = 0;
      for (std::size_t i = 0; i < oob.size(); ++i) {
        const auto r = oob[i];
        const auto donor = perm[i];
        const auto& leaf = tree.leaf_for([&](std::size_t g) { return data.value(g == f ? donor : r, g); });
        correct += static_cast<int>(leaf.value) == data.label(r);
      }
      drops[t * p + f] = (static_cast<double>(base) - static_cast<double>(correct)) / static_cast<double>(oob.size());
    }
  });
  std::vector<double> imp(p, 0.0);
  for (std::size_t t = 0; t < ntree; ++t) {
    for (std::size_t f = 0; f < p; ++f) imp[f] += drops[t * p + f];
  }
  for (auto& v : imp) v /= static_cast<double>(ntree);
  return imp;
}

double binomial_two_sided(std::size_t hits, std::size_t rounds) {
  if (hits > rounds) throw Error(Errc::InvalidArgument, "hits exceed rounds");
  // P(X = i) for X ~ Binomial(rounds, 1/2), accumulated in log space.
  auto pmf = [&](std::size_t i) {
    const double n = static_cast<double>(rounds), k = static_cast<double>(i);
    return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) - n * std::log(2.0));
  };
  double lower = 0.0, upper = 0.0;
  for (std::size_t i = 0; i <= hits; ++i) lower += pmf(i);
  for (std::size_t i = hits; i <= rounds; ++i) upper += pmf(i);
  return std::min(1.0, 2.0 * std::min(lower, upper));
}

BorutaReport boruta(const TrainingData& train, const BorutaConfig& config) {
  if (config.max_rounds == 0) throw Error(Errc::EmptyConfig, "max_rounds must be at least 1");
  if (config.forest_ntree == 0) throw Error(Errc::EmptyConfig, "forest_ntree must be at least 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
  if (train.task() != Task::Classification) throw Error(Errc::InvalidArgument, "classification data required");
  const std::size_t p = train.n_features();
  const std::size_t n = train.n_rows();

  BorutaReport report;
  report.config = config;
  report.features.resize(p);
  for (std::size_t f = 0; f < p; ++f) report.features[f].feature = train.features()[f].name;
  std::vector<std::uint8_t> undecided(p, 1);

  for (std::size_t round = 1; round <= config.max_rounds; ++round) {
    std::vector<std::size_t> active;
    for (std::size_t f = 0; f < p; ++f) {
      if (report.features[f].decision != BorutaDecision::Rejected) active.push_back(f);
    }
    const std::size_t n_shadow = std::max<std::size_t>(active.size(), 5);
    std::vector<FeatureInfo> info;
    std::vector<double> values((active.size() + n_shadow) * n);
    for (std::size_t j = 0; j < active.size(); ++j) {
      info.push_back(train.features()[active[j]]);
      const auto col = train.feature_column(active[j]);
      std::copy(col.begin(), col.end(), values.begin() + static_cast<std::ptrdiff_t>(j * n));
    }
    Rng shuffler(derive_seed(config.seed, {0xb0, round}));
    for (std::size_t s = 0; s < n_shadow; ++s) {
      const auto src = active[s % active.size()];
      FeatureInfo shadow = train.features()[src];
      shadow.name = "shadow_" + std::to_string(s) + "_" + shadow.name;
      info.push_back(std::move(shadow));
      const auto col = train.feature_column(src);
      auto dst = values.begin() + static_cast<std::ptrdiff_t>((active.size() + s) * n);
      std::copy(col.begin(), col.end(), dst);
      shuffler.shuffle(std::span<double>(&*dst, n));
    }
    const auto data = TrainingData::classification(info, n, std::move(values), train.labels(), train.classes());

    ForestConfig fc;
    fc.ntree = config.forest_ntree;
    fc.seed = derive_seed(config.seed, {0xb1, round});
    fc.threads = config.threads;
    const auto forest = fit_forest(data, fc);
    const auto imp = oob_permutation_importance(forest, data, derive_seed(config.seed, {0xb2, round}));
    const double shadow_max = *std::max_element(imp.begin() + static_cast<std::ptrdiff_t>(active.size()), imp.end());

    std::size_t n_undecided = 0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const auto f = active[j];
      if (!undecided[f]) continue;
      ++n_undecided;
      auto& rf = report.features[f];
      ++rf.rounds;
      if (imp[j] > shadow_max) ++rf.hits;
    }
    report.rounds_run = round;
    const double level = config.alpha / static_cast<double>(n_undecided);
    for (auto f : active) {
      if (!undecided[f]) continue;
      auto& rf = report.features[f];
      if (binomial_two_sided(rf.hits, rf.rounds) < level) {
        rf.decision = 2 * rf.hits > rf.rounds ? BorutaDecision::Confirmed : BorutaDecision::Rejected;
        undecided[f] = 0;
      }
    }
    if (std::none_of(undecided.begin(), undecided.end(), [](std::uint8_t u) { return u != 0; })) break;
  }
  return report;
}

BorutaReport boruta(const Table& train, const BorutaConfig& config) {
  return boruta(TrainingData::from_table(train), config);
}

std::string importance_csv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "feature,mean_loss_drop,stddev\n";
  for (const auto& f : report.features) {
    out << f.feature << ',' << format_double(f.mean_loss_drop) << ',' << format_double(f.stddev) << '\n';
  }
  return out.str();
}

std::string boruta_csv(const BorutaReport& report) {
  std::ostringstream out;
  out << "feature,decision,hits,rounds\n";
  for (const auto& f : report.features) {
    out << f.feature << ',' << decision_name(f.decision) << ',' << f.hits << ',' << f.rounds << '\n';
  }
  return out.str();
}

}  // namespace adscreen
