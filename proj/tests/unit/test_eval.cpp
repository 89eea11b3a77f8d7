#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "adscreen/error.hpp"
#include "adscreen/eval.hpp"
#include "adscreen/random.hpp"

using namespace adscreen;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

// Mann-Whitney estimate of AUC, ties counted as half.
double auc_oracle(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

double auc_of(const std::vector<double>& s, const std::vector<bool>& y) {
  const std::unique_ptr<bool[]> buf(new bool[y.size()]);
  std::copy(y.begin(), y.end(), buf.get());
  const auto roc = roc_curve(s, std::span<const bool>(buf.get(), y.size()));
  return auc(roc);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("confusion matrix by hand") {
    const bool pred[] = {true, true, false, true, false};
    const bool truth[] = {true, false, true, true, false};
    const auto cm = confusion_matrix(pred, truth);
    CHECK(cm == ConfusionMatrix{2, 1, 1, 1});
    const std::vector<std::string> ps{"NonHC", "NonHC", "HC", "NonHC", "HC"};
    const std::vector<std::string> ts{"NonHC", "HC", "NonHC", "NonHC", "HC"};
    CHECK(confusion_matrix(ps, ts) == cm);
    CHECK(confusion_matrix(ps, ts, "HC") == ConfusionMatrix{1, 1, 1, 2});
  }

  TEST_CASE("scores for tp=9 fp=1 fn=2 tn=8") {
    const auto s = scores({9, 1, 2, 8});
    CHECK(s.accuracy == doctest::Approx(85.0));
    CHECK(*s.precision == doctest::Approx(90.0));
    CHECK(*s.recall == doctest::Approx(81.8181818));
    CHECK(format_percent(s.recall) == "81.82");
  }

  TEST_CASE("undefined precision and recall; empty matrix") {
    const auto s = scores({0, 0, 0, 5});
    CHECK(s.accuracy == doctest::Approx(100.0));
    CHECK_FALSE(s.precision);
    CHECK_FALSE(s.recall);
    CHECK(format_percent(s.precision) == "undefined");
    CHECK(code_of([] { scores({}); }) == Errc::EmptyMatrix);
    const bool a[] = {true};
    const bool b[] = {true, false};
    CHECK(code_of([&] { confusion_matrix(a, b); }) == Errc::ShapeError);
  }

  TEST_CASE("roc curve by hand") {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
    const bool y[] = {true, false, true, false};
    const auto roc = roc_curve(s, y);
    REQUIRE(roc.size() == 5);
    CHECK(std::isinf(roc[0].threshold));
    CHECK(roc[0].fpr == 0.0);
    CHECK(roc[0].tpr == 0.0);
    CHECK(roc[1].fpr == 0.0);
    CHECK(roc[1].tpr == 0.5);
    CHECK(roc[2].fpr == 0.5);
    CHECK(roc[2].tpr == 0.5);
    CHECK(roc[3].fpr == 0.5);
    CHECK(roc[3].tpr == 1.0);
    CHECK(roc[4].fpr == 1.0);
    CHECK(roc[4].tpr == 1.0);
    CHECK(roc[4].threshold == 0.6);
    CHECK(auc(roc) == doctest::Approx(0.75));
  }

  TEST_CASE("auc extremes") {
    CHECK(auc_of({0.9, 0.8, 0.2, 0.1}, {true, true, false, false}) == 1.0);
    CHECK(auc_of({0.5, 0.5, 0.5, 0.5}, {true, false, true, false}) == doctest::Approx(0.5));
    CHECK(auc_of({0.1, 0.2, 0.8, 0.9}, {true, true, false, false}) == 0.0);
    const std::vector<double> one{0.3, 0.4};
    const bool same[] = {true, true};
    CHECK(code_of([&] { roc_curve(one, same); }) == Errc::DegenerateClass);
  }

  TEST_CASE("random scores give auc near one half") {
    Rng rng(3);
    std::vector<double> s(20000);
    std::vector<bool> y(20000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.uniform();
      y[i] = (rng.uniform() < 0.4);
    }
    CHECK(std::abs(auc_of(s, y) - 0.5) < 0.02);
  }

  TEST_CASE("properties: roc monotone, auc matches rank oracle and is monotone-invariant") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng.index(40);
      std::vector<double> s(n);
      std::vector<bool> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.index(8)) / 8.0;
        y[i] = (rng.uniform() < 0.5);
      }
      y[0] = true;
      y[1] = false;
      const std::unique_ptr<bool[]> buf(new bool[n]);
      std::copy(y.begin(), y.end(), buf.get());
      const auto roc = roc_curve(s, std::span<const bool>(buf.get(), n));
      CHECK(roc.front().fpr == 0.0);
      CHECK(roc.front().tpr == 0.0);
      CHECK(roc.back().fpr == 1.0);
      CHECK(roc.back().tpr == 1.0);
      for (std::size_t i = 1; i < roc.size(); ++i) {
        CHECK(roc[i].fpr >= roc[i - 1].fpr);
        CHECK(roc[i].tpr >= roc[i - 1].tpr);
      }
      const double a = auc(roc);
      CHECK(a == doctest::Approx(auc_oracle(s, y)));
      std::vector<double> t(n);
      for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
      CHECK(auc_of(t, y) == doctest::Approx(a));

      std::vector<bool> pred(n);
      for (std::size_t i = 0; i < n; ++i) pred[i] = (rng.uniform() < 0.5);
      const std::unique_ptr<bool[]> pb(new bool[n]);
      std::copy(pred.begin(), pred.end(), pb.get());
      const auto cm = confusion_matrix(std::span<const bool>(pb.get(), n), std::span<const bool>(buf.get(), n));
      CHECK(cm.total() == n);
      const auto sc = scores(cm);
      CHECK(sc.accuracy >= 0.0);
      CHECK(sc.accuracy <= 100.0);
    }
  }

  TEST_CASE("evaluate bundles the pieces") {
    const bool pred[] = {true, false, true, false};
    const bool truth[] = {true, false, false, false};
    const double score[] = {0.8, 0.1, 0.6, 0.3};
    const auto r = evaluate(pred, score, truth);
    CHECK(r.confusion == ConfusionMatrix{1, 1, 0, 2});
    CHECK(r.auc == 1.0);
    CHECK(r.roc.size() == 5);
  }

  TEST_CASE("diff report") {
    Scores a;
    a.accuracy = 90.0;
    a.precision = 80.0;
    Scores b;
    b.accuracy = 92.5;
    b.precision = 80.0;
    b.recall = 70.0;
    const auto d = diff_report(a, b);
    REQUIRE(d.size() == 3);
    CHECK(d[0].metric == "accuracy");
    CHECK(*d[0].value == 2.5);
    CHECK(d[0].text == "+2.50");
    CHECK(d[1].text == "+0.00");
    CHECK_FALSE(d[2].value);
    CHECK(d[2].text == "undefined");
    const auto back = diff_report(b, a);
    CHECK(back[0].text == "-2.50");
    CHECK(round2(81.8181818) == doctest::Approx(81.82));
    CHECK(round2(-0.004) == 0.0);
  }
}
