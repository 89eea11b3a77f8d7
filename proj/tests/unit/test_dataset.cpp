#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <filesystem>
#include <map>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/random.hpp"
#include "adscreen/synthgen.hpp"
#include "helpers.hpp"

using namespace adscreen;
using testutil::table_from;

namespace {

const char* kSchema = R"({"columns":[
  {"name":"RID","kind":"identifier","group":"meta"},
  {"name":"MMSCORE","kind":"numeric","range":[0,30],"group":"neuropsych"},
  {"name":"apoe","kind":"categorical","range":["e2","e3","e4"],"group":"apoe"},
  {"name":"sex","kind":"binary","group":"demographic"},
  {"name":"diagnosis","kind":"target","range":["HC","MCI","AD"],"group":"target"}]})";

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("CSV with an NA cell masks exactly that cell") {
    const auto t = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,28,e3,0,HC\nB,NA,e4,1,AD\nC,25,e2,,MCI\n");
    REQUIRE(t.n_rows() == 3);
    const auto mm = t.schema().index_of("MMSCORE");
    const auto sex = t.schema().index_of("sex");
    CHECK(t.missing(1, mm));
    CHECK(t.missing(2, sex));
    CHECK(t.missing_count() == 2);
    CHECK(t.number(0, mm) == 28.0);
  }

  TEST_CASE("header order does not matter") {
    const auto a = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,28,e3,0,HC\n");
    const auto b = table_from(kSchema, "diagnosis,sex,apoe,MMSCORE,RID\nHC,0,e3,28,A\n");
    CHECK(a == b);
  }

  TEST_CASE("missing target column is a SchemaMismatch") {
    CHECK(code_of([] { table_from(kSchema, "RID,MMSCORE,apoe,sex\nA,28,e3,0\n"); }) == Errc::SchemaMismatch);
  }

  TEST_CASE("unparseable numeric cell reports row and column") {
    try {
      table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,28,e3,0,HC\nB,abc,e3,0,HC\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
      CHECK(e.column() == "MMSCORE");
    }
  }

  TEST_CASE("CSV round trip preserves values and mask") {
    CohortConfig cfg;
    cfg.n_subjects = 120;
    cfg.seed = 3;
    const auto cohort = generate_cohort(cfg).first;
    std::istringstream in(testutil::csv_of(cohort));
    CHECK(read_csv(in, cohort.schema()) == cohort);
    const auto raw = to_raw_cohort(cohort, 5);
    std::istringstream in2(testutil::csv_of(raw));
    CHECK(read_csv(in2, raw.schema()) == raw);
  }

  TEST_CASE("schema JSON round trip") {
    const auto s = raw_cohort_schema();
    CHECK(parse_schema_json(schema_to_json(s)) == s);
  }

  TEST_CASE("schema rejects duplicate names and two targets") {
    CHECK(code_of([] {
            parse_schema_json(R"({"columns":[{"name":"a","kind":"numeric"},{"name":"a","kind":"numeric"}]})");
          }) == Errc::ConfigError);
    CHECK(code_of([] {
            parse_schema_json(R"({"columns":[{"name":"a","kind":"target","range":["x"]},
                                             {"name":"b","kind":"target","range":["y"]}]})");
          }) == Errc::ConfigError);
  }

  TEST_CASE("merge_on_key: 5 keys joined with 3 keeps 3 and drops 2") {
    const char* sa = R"({"columns":[{"name":"RID","kind":"identifier"},{"name":"a","kind":"numeric"}]})";
    const char* sb = R"({"columns":[{"name":"RID","kind":"identifier"},{"name":"b","kind":"numeric"}]})";
    const auto a = table_from(sa, "RID,a\n1,10\n2,20\n3,30\n4,40\n5,50\n");
    const auto b = table_from(sb, "RID,b\n4,400\n2,200\n5,500\n");
    const auto m = merge_on_key({a, b}, {"RID"});
    CHECK(m.table.n_rows() == 3);
    CHECK(m.table.n_cols() == 3);
    CHECK(m.dropped.size() == 2);
    const auto bi = m.table.schema().index_of("b");
    CHECK(m.table.number(0, bi) == 200.0);
    CHECK(m.table.number(2, bi) == 500.0);
  }

  TEST_CASE("merge_on_key errors") {
    const char* sa = R"({"columns":[{"name":"RID","kind":"identifier"},{"name":"a","kind":"numeric"}]})";
    const auto a = table_from(sa, "RID,a\n1,10\n2,20\n");
    const auto dup = table_from(sa, "RID,a\n1,10\n1,20\n");
    CHECK(code_of([&] { merge_on_key({dup, a}, {"RID"}); }) == Errc::DuplicateKey);
    CHECK(code_of([&] { merge_on_key({a, a}, {"RID"}); }) == Errc::NameCollision);
  }

  TEST_CASE("derive_age uses calendar-aware floor years") {
    const char* s = R"({"columns":[{"name":"b","kind":"date"},{"name":"e","kind":"date"}]})";
    const auto t = table_from(s, "b,e\n1940-03-15,2010-03-14\n1940-03-15,2010-03-15\n2000-02-29,2000-02-29\n"
                                 "2000-02-29,2001-02-28\n1950-01-01,NA\n2010-01-02,2010-01-01\n");
    const auto r = derive_age(t, "b", "e");
    const auto age = r.table.schema().index_of("age");
    CHECK(r.table.number(0, age) == 69.0);
    CHECK(r.table.number(1, age) == 70.0);
    CHECK(r.table.number(2, age) == 0.0);
    CHECK(r.table.number(3, age) == 0.0);
    CHECK(r.table.missing(4, age));
    CHECK(r.table.missing(5, age));
    CHECK(r.invalid_chronology == std::vector<std::size_t>{5});
  }

  TEST_CASE("whole_years_between against a brute-force calendar oracle") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const auto b = static_cast<std::int64_t>(rng.index(40000)) - 20000;
      const auto e = b + static_cast<std::int64_t>(rng.index(40000));
      // Oracle: count anniversaries by walking the ISO strings.
      const auto bs = format_iso_date(b);
      const auto es = format_iso_date(e);
      const int by = std::stoi(bs.substr(0, 4));
      const int ey = std::stoi(es.substr(0, 4));
      int years = ey - by;
      if (es.substr(5) < bs.substr(5)) --years;
      CHECK(whole_years_between(b, e) == years);
    }
  }

  TEST_CASE("generated cohort ages lie in [55, 96]") {
    const auto cohort = generate_cohort({}).first;
    const auto age = cohort.schema().index_of("age");
    for (std::size_t r = 0; r < cohort.n_rows(); ++r) {
      if (cohort.missing(r, age)) continue;
      CHECK(cohort.number(r, age) >= 55.0);
      CHECK(cohort.number(r, age) <= 96.0);
    }
  }

  TEST_CASE("sanitize masks out-of-range and unknown levels") {
    const auto t = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,34,e3,0,HC\nB,20,XZ,1,AD\nC,25,e2,2,MCI\n");
    const auto [clean, report] = sanitize(t);
    CHECK(clean.missing(0, clean.schema().index_of("MMSCORE")));
    CHECK(clean.missing(1, clean.schema().index_of("apoe")));
    CHECK(clean.missing(2, clean.schema().index_of("sex")));
    REQUIRE(report.replaced.size() == 3);
    CHECK(report.replaced[0] == std::pair<std::string, std::size_t>{"MMSCORE", 1});
    CHECK(report.total() == 3);
    const auto again = sanitize(clean);
    CHECK(again.first == clean);
    CHECK(again.second.total() == 0);
  }

  TEST_CASE("sanitize is a no-op on valid data") {
    const auto t = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,30,e3,0,HC\nB,0,e4,1,AD\n");
    const auto [clean, report] = sanitize(t);
    CHECK(clean == t);
    CHECK(report.replaced.empty());
  }

  TEST_CASE("drop_columns") {
    const auto t = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,30,e3,0,HC\n");
    CHECK_FALSE(drop_columns(t, {"RID"}).schema().find("RID"));
    CHECK(drop_columns(t, {}) == t);
    CHECK(code_of([&] { drop_columns(t, {"nope"}); }) == Errc::UnknownColumn);
    CHECK(code_of([&] { drop_columns(t, {"diagnosis"}); }) == Errc::TargetProtected);
    CHECK_FALSE(drop_columns(t, {"diagnosis"}, true).schema().target());
  }

  TEST_CASE("binarize_diagnosis") {
    const auto t = table_from(kSchema, "RID,MMSCORE,apoe,sex,diagnosis\nA,30,e3,0,HC\nB,20,e4,1,AD\nC,22,e4,1,MCI\n");
    const auto b = binarize_diagnosis(t);
    const auto d = b.schema().require_target();
    CHECK(b.text(0, d) == "HC");
    CHECK(b.text(1, d) == "NonHC");
    CHECK(b.text(2, d) == "NonHC");
    CHECK(b.n_rows() == t.n_rows());
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      if (c == d) continue;
      CHECK(b.column(c).numbers == t.column(c).numbers);
      CHECK(b.column(c).texts == t.column(c).texts);
      CHECK(b.column(c).missing == t.column(c).missing);
    }
    const char* s = R"({"columns":[{"name":"d","kind":"target","range":["HC","Unknown"]}]})";
    CHECK(code_of([&] { binarize_diagnosis(table_from(s, "d\nUnknown\n")); }) == Errc::UnknownLevel);
  }

  TEST_CASE("split_stratified: 60/40 at 0.7 gives 42+28 / 18+12") {
    std::string csv = "x1,y\n";
    for (int i = 0; i < 100; ++i) csv += std::to_string(i) + (i < 60 ? ",HC\n" : ",NonHC\n");
    const auto t = table_from(testutil::numeric_schema(1), csv);
    const auto s = split_stratified(t, 0.7, 9);
    const auto y = t.schema().require_target();
    std::map<std::string, int> train, test;
    for (std::size_t r = 0; r < s.train.n_rows(); ++r) ++train[s.train.text(r, y)];
    for (std::size_t r = 0; r < s.test.n_rows(); ++r) ++test[s.test.text(r, y)];
    CHECK(train["HC"] == 42);
    CHECK(train["NonHC"] == 28);
    CHECK(test["HC"] == 18);
    CHECK(test["NonHC"] == 12);
    const auto again = split_stratified(t, 0.7, 9);
    CHECK(again.train_rows == s.train_rows);
    CHECK(again.test_rows == s.test_rows);
  }

  TEST_CASE("split_stratified: partition and proportions on the cohort") {
    const auto cohort = binarize_diagnosis(generate_cohort({}).first);
    const auto s = split_stratified(cohort, 0.7, 1);
    CHECK(s.train.n_rows() == 603);
    CHECK(s.test.n_rows() == 259);
    std::vector<int> seen(cohort.n_rows(), 0);
    for (auto r : s.train_rows) ++seen[r];
    for (auto r : s.test_rows) ++seen[r];
    for (auto v : seen) CHECK(v == 1);
    CHECK(std::is_sorted(s.train_rows.begin(), s.train_rows.end()));
  }

  TEST_CASE("split_stratified property: per-class train counts within one of n_c * f") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n_a = 1 + rng.index(80);
      const std::size_t n_b = 1 + rng.index(80);
      const double f = 0.05 + 0.9 * rng.uniform();
      std::string csv = "x1,y\n";
      for (std::size_t i = 0; i < n_a + n_b; ++i) csv += std::to_string(i) + (i < n_a ? ",HC\n" : ",NonHC\n");
      const auto t = table_from(testutil::numeric_schema(1), csv);
      const auto s = split_stratified(t, f, trial);
      std::size_t a = 0;
      for (auto r : s.train_rows) a += r < n_a;
      const std::size_t b = s.train_rows.size() - a;
      CHECK(std::abs(static_cast<double>(a) - static_cast<double>(n_a) * f) <= 1.0);
      CHECK(std::abs(static_cast<double>(b) - static_cast<double>(n_b) * f) <= 1.0);
      CHECK(s.train_rows.size() == static_cast<std::size_t>(std::llround(static_cast<double>(n_a + n_b) * f)));
    }
  }

  TEST_CASE("split_stratified errors") {
    const auto t = table_from(testutil::numeric_schema(1), "x1,y\n1,HC\n2,HC\n");
    CHECK(code_of([&] { split_stratified(t, 0.7, 1); }) == Errc::DegenerateClass);
    CHECK(code_of([&] { split_stratified(t, 1.0, 1); }) == Errc::InvalidArgument);
  }

  TEST_CASE("scaler: [2,4,6] maps to [-1,0,1] with population sd") {
    const auto t = table_from(testutil::numeric_schema(2), "x1,x2,y\n2,5,HC\n4,5,NonHC\n6,NA,HC\n");
    const auto p = fit_scaler(t);
    REQUIRE(p.columns.size() == 2);
    CHECK(p.columns[0].mean == doctest::Approx(4.0));
    CHECK(p.columns[0].stddev == doctest::Approx(std::sqrt(8.0 / 3.0)));
    const auto s = apply_scaler(t, p);
    const double sd = std::sqrt(8.0 / 3.0);
    CHECK(s.number(0, 0) == doctest::Approx(-2.0 / sd));
    CHECK(s.number(1, 0) == doctest::Approx(0.0));
    CHECK(p.constant_columns == std::vector<std::string>{"x2"});
    CHECK(s.number(0, 1) == 0.0);
    CHECK(s.number(1, 1) == 0.0);
    CHECK(s.missing(2, 1));
    for (std::size_t c = 0; c < t.n_cols(); ++c) CHECK(s.column(c).missing == t.column(c).missing);
  }

  TEST_CASE("scaler: hand example with sd 2") {
    const auto t = table_from(testutil::numeric_schema(1), "x1,y\n2,HC\n6,HC\n");
    const auto p = fit_scaler(t);
    CHECK(p.columns[0].mean == 4.0);
    CHECK(p.columns[0].stddev == 2.0);
    const auto s = apply_scaler(table_from(testutil::numeric_schema(1), "x1,y\n2,HC\n4,HC\n6,HC\n"), p);
    CHECK(s.number(0, 0) == -1.0);
    CHECK(s.number(1, 0) == 0.0);
    CHECK(s.number(2, 0) == 1.0);
  }

  TEST_CASE("scaler is idempotent on refit") {
    CohortConfig cfg;
    cfg.n_subjects = 200;
    cfg.missing_rate = 0.0;
    const auto cohort = generate_cohort(cfg).first;
    const auto once = apply_scaler(cohort, fit_scaler(cohort));
    const auto twice = apply_scaler(once, fit_scaler(once));
    for (std::size_t c = 0; c < once.n_cols(); ++c) {
      if (once.schema()[c].kind != FeatureKind::Numeric) continue;
      for (std::size_t r = 0; r < once.n_rows(); ++r) CHECK(std::abs(once.number(r, c) - twice.number(r, c)) < 1e-12);
    }
  }

  TEST_CASE("drop_unlabeled removes masked targets") {
    const auto t = table_from(testutil::numeric_schema(1), "x1,y\n1,HC\n2,NA\n3,NonHC\n");
    CHECK(drop_unlabeled(t).n_rows() == 2);
  }

  TEST_CASE("file round trip through save_csv and load_csv") {
    const auto dir = std::filesystem::temp_directory_path() / "adscreen_dataset_test";
    std::filesystem::create_directories(dir);
    CohortConfig cfg;
    cfg.n_subjects = 50;
    const auto cohort = generate_cohort(cfg).first;
    save_csv(dir / "c.csv", cohort);
    save_schema(cohort.schema(), dir / "c.json");
    CHECK(load_csv(dir / "c.csv", load_schema(dir / "c.json")) == cohort);
    CHECK(code_of([&] { load_csv(dir / "absent.csv", cohort.schema()); }) == Errc::IoError);
    std::filesystem::remove_all(dir);
  }
}
