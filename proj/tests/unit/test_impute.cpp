#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/impute.hpp"
#include "adscreen/random.hpp"
#include "adscreen/synthgen.hpp"
#include "helpers.hpp"

using namespace adscreen;
using testutil::table_from;

namespace {

const char* kMixed = R"({"columns":[
  {"name":"a","kind":"numeric","group":"blood"},
  {"name":"b","kind":"binary","group":"medical_history"},
  {"name":"c","kind":"categorical","range":["p","q","r"],"group":"apoe"},
  {"name":"y","kind":"target","range":["HC","NonHC"]}]})";

Table small_cohort(std::uint64_t seed, double rate) {
  CohortConfig cfg;
  cfg.n_subjects = 200;
  cfg.seed = seed;
  cfg.missing_rate = rate;
  return binarize_diagnosis(generate_cohort(cfg).first);
}

}  // namespace

TEST_SUITE("impute") {
  TEST_CASE("mean_mode_fill examples") {
    const auto t = table_from(kMixed, "a,b,c,y\n1,0,q,HC\nNA,0,p,HC\n3,1,NA,NonHC\n4,NA,p,HC\n");
    const auto f = mean_mode_fill(t);
    CHECK(f.number(1, 0) == doctest::Approx(8.0 / 3.0));
    CHECK(f.number(3, 1) == 0.0);
    CHECK(f.text(2, 2) == "p");
    CHECK(f.missing_count() == 0);

    const auto line = table_from(kMixed, "a,b,c,y\n1,0,p,HC\nNA,0,p,HC\n3,1,q,NonHC\n");
    CHECK(mean_mode_fill(line).number(1, 0) == 2.0);
    const auto complete = table_from(kMixed, "a,b,c,y\n1,0,p,HC\n3,1,q,NonHC\n");
    CHECK(mean_mode_fill(complete) == complete);
  }

  TEST_CASE("mean_mode_fill: binary [0,0,1,NA] gets 0; categorical ties go to the first level") {
    const auto t = table_from(kMixed, "a,b,c,y\n1,0,r,HC\n2,0,q,HC\n3,1,NA,HC\n4,NA,NA,HC\n");
    const auto f = mean_mode_fill(t);
    CHECK(f.number(3, 1) == 0.0);
    CHECK(f.text(2, 2) == "q");
  }

  TEST_CASE("mean_mode_fill: fully missing column") {
    const auto t = table_from(kMixed, "a,b,c,y\nNA,0,p,HC\nNA,1,q,HC\n");
    try {
      mean_mode_fill(t);
      FAIL("expected AllMissingColumn");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::AllMissingColumn);
    }
  }

  TEST_CASE("missforest defaults") {
    const ImputeConfig cfg;
    CHECK(cfg.ntree == 100);
    CHECK(cfg.max_iter == 10);
  }

  TEST_CASE("missforest: y = x line with one masked y") {
    const char* s = R"({"columns":[{"name":"x","kind":"numeric"},{"name":"y","kind":"numeric"}]})";
    std::string csv = "x,y\n";
    for (int i = 1; i <= 10; ++i) csv += std::to_string(i) + "," + (i == 7 ? std::string("NA") : std::to_string(i)) + "\n";
    const auto r = missforest(table_from(s, csv));
    const double y = r.table.number(6, 1);
    CHECK(y >= 1.0);
    CHECK(y <= 10.0);
    CHECK(std::abs(y - 7.0) <= 1.5);
  }

  TEST_CASE("missforest: nothing masked returns the input") {
    const auto t = small_cohort(1, 0.0);
    const auto r = missforest(t);
    CHECK(r.iterations_run == 0);
    CHECK(r.table == t);
  }

  TEST_CASE("missforest properties on a mixed cohort") {
    const auto t = small_cohort(4, 0.08);
    ImputeConfig cfg;
    cfg.ntree = 30;
    cfg.max_iter = 4;
    const auto r = missforest(t, cfg);
    CHECK(r.iterations_run <= cfg.max_iter);
    CHECK(r.iterations_run >= 1);
    CHECK(r.table.missing_count() == 0);
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      const auto& spec = t.schema()[c];
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t row = 0; row < t.n_rows(); ++row) {
        if (t.missing(row, c)) continue;
        if (spec.is_text()) {
          CHECK(r.table.text(row, c) == t.text(row, c));
        } else {
          // bit-identical observed cells
          CHECK(std::memcmp(&r.table.column(c).numbers[row], &t.column(c).numbers[row], sizeof(double)) == 0);
          lo = std::min(lo, t.number(row, c));
          hi = std::max(hi, t.number(row, c));
        }
      }
      if (spec.kind != FeatureKind::Numeric) continue;
      for (std::size_t row = 0; row < t.n_rows(); ++row) {
        if (!t.missing(row, c)) continue;
        CHECK(r.table.number(row, c) >= lo);
        CHECK(r.table.number(row, c) <= hi);
      }
    }
    const auto again = missforest(t, cfg);
    CHECK(again.table == r.table);
    CHECK(again.iterations_run == r.iterations_run);
  }

  TEST_CASE("imputation_nrmse") {
    const auto truth = small_cohort(2, 0.0);
    const auto holes = inject_missing(truth, 0.1, 5);
    CHECK(imputation_nrmse(truth, truth, holes) == 0.0);
    try {
      imputation_nrmse(truth, truth, truth);
      FAIL("expected NoEvalCells");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoEvalCells);
    }
  }

  TEST_CASE("imputation_nrmse: mean fill of one random-masked column is about 1") {
    const char* s = R"({"columns":[{"name":"x","kind":"numeric"}]})";
    Rng rng(8);
    std::string full = "x\n", holed = "x\n";
    for (int i = 0; i < 4000; ++i) {
      const auto v = std::to_string(rng.normal());
      full += v + "\n";
      holed += (rng.uniform() < 0.2 ? std::string("NA") : v) + "\n";
    }
    const auto truth = table_from(s, full);
    const auto mask = table_from(s, holed);
    const double e = imputation_nrmse(mean_mode_fill(mask), truth, mask);
    CHECK(e == doctest::Approx(1.0).epsilon(0.05));
  }
}
