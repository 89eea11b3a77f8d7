#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/random.hpp"
#include "adscreen/select.hpp"
#include "adscreen/synthgen.hpp"

using namespace adscreen;

namespace {

// generate_planted plus a binary `leak` column equal to the target.
Table with_leak(std::size_t n, std::uint64_t seed) {
  const auto t = generate_planted(n, 2, 4, seed);
  const auto y = t.schema().require_target();
  std::vector<double> v(n);
  for (std::size_t r = 0; r < n; ++r) v[r] = t.text(r, y) == "NonHC" ? 1.0 : 0.0;
  ColumnSpec spec;
  spec.name = "leak";
  spec.kind = FeatureKind::Binary;
  return t.with_column(spec, Column::numeric(v));
}

double binom_oracle(std::size_t k, std::size_t n) {
  // Sum of point probabilities no larger than P(k), exact for small n.
  std::vector<double> p(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double c = 1.0;
    for (std::size_t j = 0; j < i; ++j) c = c * static_cast<double>(n - j) / static_cast<double>(j + 1);
    p[i] = c * std::pow(0.5, static_cast<double>(n));
  }
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    if (p[i] <= p[k] * (1 + 1e-9)) total += p[i];
  }
  return std::min(1.0, total);
}

}  // namespace

TEST_SUITE("select") {
  TEST_CASE("permutation importance: target copy dominates, noise is near zero") {
    const auto train = with_leak(1000, 1);
    const auto test = with_leak(1000, 2);
    ForestConfig cfg;
    cfg.ntree = 100;
    const auto model = fit_forest(train, cfg);
    const auto rep = permutation_importance(model, test, 50, 3);
    CHECK(rep.loss == ImportanceLoss::Accuracy);
    const auto top = std::max_element(rep.features.begin(), rep.features.end(),
                                      [](const auto& a, const auto& b) { return a.mean_loss_drop < b.mean_loss_drop; });
    CHECK(top->feature == "leak");
    CHECK(top->mean_loss_drop > 0.2);
    for (const auto& f : rep.features) {
      CHECK(f.n_permutations == 50);
      if (f.feature.rfind("noise_", 0) == 0) CHECK(std::abs(f.mean_loss_drop) <= 0.02);
    }
  }

  TEST_CASE("permutation importance: defaults, zero permutations, AUC loss, threads") {
    const auto t = generate_planted(300, 2, 2, 5);
    ForestConfig cfg;
    cfg.ntree = 30;
    const auto model = fit_forest(t, cfg);
    const auto rep = permutation_importance(model, t);
    CHECK(rep.features.front().n_permutations == 50);
    try {
      permutation_importance(model, t, 0);
      FAIL("expected EmptyConfig");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyConfig);
    }
    const auto a = permutation_importance(model, t, 5, 9, ImportanceLoss::Auc, 1);
    const auto b = permutation_importance(model, t, 5, 9, ImportanceLoss::Auc, 4);
    CHECK(importance_csv(a) == importance_csv(b));
    CHECK(importance_csv(a).rfind("feature,mean_loss_drop,stddev\n", 0) == 0);
  }

  TEST_CASE("binomial_two_sided against direct enumeration") {
    for (std::size_t n = 1; n <= 20; ++n) {
      for (std::size_t k = 0; k <= n; ++k) CHECK(binomial_two_sided(k, n) == doctest::Approx(binom_oracle(k, n)));
    }
    CHECK(binomial_two_sided(0, 5) == doctest::Approx(0.0625));
    CHECK(binomial_two_sided(10, 20) == doctest::Approx(1.0));
  }

  TEST_CASE("boruta defaults and empty config") {
    const BorutaConfig cfg;
    CHECK(cfg.forest_ntree == 500);
    CHECK(cfg.max_rounds == 20);
    CHECK(cfg.alpha == 0.05);
    BorutaConfig zero;
    zero.max_rounds = 0;
    try {
      boruta(generate_planted(50, 1, 1, 1), zero);
      FAIL("expected EmptyConfig");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyConfig);
    }
  }

  TEST_CASE("boruta: target copy is confirmed in every round, report covers every predictor") {
    const auto t = with_leak(300, 4);
    BorutaConfig cfg;
    cfg.forest_ntree = 60;
    cfg.max_rounds = 12;
    const auto rep = boruta(t, cfg);
    const auto names = t.schema().predictor_names();
    REQUIRE(rep.features.size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& f = rep.features[i];
      CHECK(f.feature == names[i]);
      CHECK(f.feature.rfind("shadow", 0) != 0);
      CHECK(f.hits <= f.rounds);
      if (f.feature == "leak") {
        CHECK(f.decision == BorutaDecision::Confirmed);
        CHECK(f.hits == f.rounds);
      }
    }
    CHECK(rep.rounds_run <= cfg.max_rounds);
    CHECK(boruta_csv(rep).rfind("feature,decision,hits,rounds\n", 0) == 0);
    CHECK(boruta_csv(boruta(t, cfg)) == boruta_csv(rep));
  }

  TEST_CASE("boruta: hits never decrease as rounds grow") {
    const auto t = generate_planted(250, 2, 6, 7);
    std::vector<std::size_t> prev;
    for (std::size_t rounds = 1; rounds <= 8; ++rounds) {
      BorutaConfig cfg;
      cfg.forest_ntree = 40;
      cfg.max_rounds = rounds;
      const auto rep = boruta(t, cfg);
      for (std::size_t i = 0; i < rep.features.size() && !prev.empty(); ++i) {
        CHECK(rep.features[i].hits >= prev[i]);
      }
      prev.clear();
      for (const auto& f : rep.features) prev.push_back(f.hits);
    }
  }

  TEST_CASE("oob permutation importance favours signal") {
    const auto data = TrainingData::from_table(generate_planted(400, 2, 3, 2));
    ForestConfig cfg;
    cfg.ntree = 80;
    const auto imp = oob_permutation_importance(fit_forest(data, cfg), data, 1);
    REQUIRE(imp.size() == 5);
    CHECK(std::min(imp[0], imp[1]) > std::max({imp[2], imp[3], imp[4]}));
  }
}
