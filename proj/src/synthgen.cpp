#include "adscreen/synthgen.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

namespace {

using FK = FeatureKind;
using FG = FeatureGroup;

const std::vector<std::string> kApoeLevels{"non_carrier", "heterozygous", "homozygous"};
const std::vector<std::string> kDiagnosis{"HC", "MCI", "AD"};

struct Flag {
  const char* name;
  double prevalence;
};
constexpr std::array<Flag, 10> kFlags{{{"mh_cardiovascular", 0.25},
                                       {"mh_hypertension", 0.45},
                                       {"mh_diabetes", 0.12},
                                       {"mh_stroke", 0.05},
                                       {"mh_depression", 0.18},
                                       {"mh_thyroid", 0.12},
                                       {"mh_cancer", 0.15},
                                       {"mh_smoking", 0.40},
                                       {"mh_neurologic", 0.08},
                                       {"mh_hepatic", 0.04}}};

// Neuropsych score: mean, sd, range, and +1 when higher means more impaired.
struct Score {
  const char* name;
  double mean, sd, lo, hi;
  int direction;
  int decimals;
};
constexpr std::array<Score, 4> kScores{{{"CDGLOBAL", 0.45, 0.55, 0.0, 3.0, 1, 2},
                                        {"MMSCORE", 26.0, 3.5, 0.0, 30.0, -1, 1},
                                        {"LIMMTOTAL", 11.0, 4.5, 0.0, 25.0, -1, 1},
                                        {"LDELTOTAL", 9.5, 5.0, 0.0, 25.0, -1, 1}}};
constexpr double kLoading = 0.85;
constexpr double kNeuroWeight = 2.5;

struct Analyte {
  const char* name;
  double lo, hi;
  int decimals;
};
constexpr std::array<Analyte, 12> kBlood{{{"hemoglobin", 60.0, 220.0, 1},
                                          {"hematocrit", 0.15, 0.70, 3},
                                          {"rbc_count", 2.5, 7.0, 2},
                                          {"mch", 20.0, 40.0, 1},
                                          {"wbc_count", 1.5, 25.0, 2},
                                          {"platelets", 40.0, 700.0, 0},
                                          {"creatinine", 0.3, 4.0, 2},
                                          {"urea", 3.0, 80.0, 1},
                                          {"glucose", 50.0, 300.0, 0},
                                          {"cholesterol", 90.0, 380.0, 0},
                                          {"triglycerides", 30.0, 800.0, 0},
                                          {"vitamin_b12", 100.0, 1500.0, 0}}};

// Column layout of cohort_schema().
constexpr std::size_t kAge = 0, kSex = 1, kFlag0 = 2, kApoe = 12, kScore0 = 13, kBlood0 = 17;
constexpr std::size_t kPredictors = 29;

double round_to(double v, int decimals) {
  const double f = std::pow(10.0, decimals);
  return std::round(v * f) / f;
}

double bounded(double v, double lo, double hi, int decimals) {
  return std::clamp(round_to(v, decimals), lo, hi);
}

// One subject's predictor values in schema order; apoe is the e4 allele count.
std::array<double, kPredictors> draw_subject(Rng& rng) {
  std::array<double, kPredictors> v{};
  v[kAge] = 55.0 + static_cast<double>(rng.index(42));
  v[kSex] = rng.uniform() < 0.57 ? 1.0 : 0.0;
  for (std::size_t i = 0; i < kFlags.size(); ++i) v[kFlag0 + i] = rng.uniform() < kFlags[i].prevalence ? 1.0 : 0.0;
  const double a = rng.uniform();
  v[kApoe] = a < 0.70 ? 0.0 : (a < 0.96 ? 1.0 : 2.0);

  const double g = rng.normal();
  const double unique = std::sqrt(1.0 - kLoading * kLoading);
  for (std::size_t i = 0; i < kScores.size(); ++i) {
    const auto& s = kScores[i];
    const double z = kLoading * g + unique * rng.normal();
    v[kScore0 + i] = bounded(s.mean + s.sd * s.direction * z, s.lo, s.hi, s.decimals);
  }

  std::array<double, 12> z{};
  for (auto& e : z) e = rng.normal();
  std::array<double, 12> b{};
  const double rbc = 4.6 + 0.45 * z[0];
  const double mch = 30.0 + 2.0 * z[1];
  const double hb = rbc * mch * (1.0 + 0.01 * z[2]);
  b[0] = hb;
  b[1] = hb / (335.0 + 8.0 * z[3]);
  b[2] = rbc;
  b[3] = mch;
  b[4] = 6.5 * std::exp(0.25 * z[4]);
  b[5] = 250.0 * std::exp(0.2 * (0.5 * z[4] + 0.866 * z[5]));
  const double creat = 0.95 * std::exp(0.22 * z[6]);
  b[6] = creat;
  b[7] = 16.0 * std::pow(creat / 0.95, 0.8) * std::exp(0.12 * z[7]);
  b[8] = 95.0 * std::exp(0.15 * z[8]);
  b[9] = 200.0 + 38.0 * (0.3 * z[8] + 0.954 * z[9]);
  b[10] = 120.0 * std::exp(0.4 * (0.4 * z[8] + 0.917 * z[10]));
  b[11] = 420.0 * std::exp(0.35 * z[11]);
  for (std::size_t i = 0; i < kBlood.size(); ++i) {
    v[kBlood0 + i] = bounded(b[i], kBlood[i].lo, kBlood[i].hi, kBlood[i].decimals);
  }
  return v;
}

double logistic_noise(Rng& rng) {
  double u;
  do {
    u = rng.uniform();
  } while (u == 0.0);
  return std::log(u / (1.0 - u));
}

std::vector<GenerativeWeight> model_weights(const CohortConfig& c) {
  std::vector<GenerativeWeight> w;
  for (const auto& s : kScores) {
    w.push_back({s.name, c.neuropsych_signal * kNeuroWeight * s.direction, s.mean, s.sd});
  }
  w.push_back({"apoe", c.nuisance_signal * 2.0, 0.34, 0.55});
  w.push_back({"age", c.nuisance_signal * 1.5, 75.5, 12.0});
  w.push_back({"glucose", c.nuisance_signal * 1.0, 95.0, 15.0});
  w.push_back({"cholesterol", c.nuisance_signal * 0.8, 200.0, 38.0});
  w.push_back({"vitamin_b12", c.nuisance_signal * -1.0, 420.0, 150.0});
  return w;
}

std::vector<std::size_t> weight_columns(const std::vector<GenerativeWeight>& w) {
  const auto schema = cohort_schema();
  std::vector<std::size_t> cols;
  for (const auto& e : w) cols.push_back(schema.index_of(e.feature));
  return cols;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_config(const CohortConfig& c) {
  if (c.n_subjects < 2) throw Error(Errc::InvalidArgument, "n_subjects must be at least 2");
  if (!(c.missing_rate >= 0.0 && c.missing_rate < 1.0)) throw Error(Errc::InvalidArgument, "missing_rate must lie in [0, 1)");
  if (!(c.class_balance > 0.0 && c.class_balance < 1.0)) throw Error(Errc::InvalidArgument, "class_balance must lie in (0, 1)");
}

ColumnSpec numeric_spec(const std::string& name, double lo, double hi, FG group) {
  return {name, FK::Numeric, {}, NumericRange{lo, hi}, group};
}

}  // namespace

Schema cohort_schema() {
  std::vector<ColumnSpec> cols;
  cols.push_back(numeric_spec("age", 55.0, 96.0, FG::Demographic));
  cols.push_back({"sex", FK::Binary, {}, std::nullopt, FG::Demographic});
  for (const auto& f : kFlags) cols.push_back({f.name, FK::Binary, {}, std::nullopt, FG::MedicalHistory});
  cols.push_back({"apoe", FK::Categorical, kApoeLevels, std::nullopt, FG::ApoE});
  for (const auto& s : kScores) cols.push_back(numeric_spec(s.name, s.lo, s.hi, FG::Neuropsych));
  for (const auto& b : kBlood) cols.push_back(numeric_spec(b.name, b.lo, b.hi, FG::Blood));
  cols.push_back({"diagnosis", FK::Target, kDiagnosis, std::nullopt, FG::Target});
  return Schema(std::move(cols));
}

std::vector<std::vector<std::string>> cohort_blocks() {
  std::vector<std::vector<std::string>> blocks{{"age"}, {"sex"}};
  for (const auto& f : kFlags) blocks.push_back({f.name});
  blocks.push_back({"apoe"});
  blocks.push_back({kScores[0].name, kScores[1].name, kScores[2].name, kScores[3].name});
  blocks.push_back({"hemoglobin", "hematocrit", "rbc_count", "mch"});
  blocks.push_back({"wbc_count", "platelets"});
  blocks.push_back({"creatinine", "urea"});
  blocks.push_back({"glucose", "cholesterol", "triglycerides"});
  blocks.push_back({"vitamin_b12"});
  return blocks;
}

std::vector<std::string> group_features(FeatureGroup group) {
  std::vector<std::string> out;
  const auto schema = cohort_schema();
  for (const auto& c : schema.columns()) {
    if (c.group == group && c.is_predictor()) out.push_back(c.name);
  }
  return out;
}

std::vector<std::string> correlated_numerics() {
  return {"CDGLOBAL", "MMSCORE",   "LIMMTOTAL", "LDELTOTAL", "hemoglobin",
          "hematocrit", "rbc_count", "mch",       "creatinine", "urea"};
}

std::pair<Table, GroundTruth> generate_cohort(const CohortConfig& config) {
  check_config(config);
  const std::size_t n = config.n_subjects;
  const auto schema = cohort_schema();
  GroundTruth truth;
  truth.config = config;
  truth.weights = model_weights(config);
  const auto wcols = weight_columns(truth.weights);

  Rng rng(derive_seed(config.seed, {0xc0407}));
  std::vector<std::array<double, kPredictors>> subjects(n);
  truth.linear_predictor.resize(n);
  truth.latent_score.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    subjects[i] = draw_subject(rng);
    double eta = 0.0;
    for (std::size_t k = 0; k < wcols.size(); ++k) {
      const auto& w = truth.weights[k];
      eta += w.weight * (subjects[i][wcols[k]] - w.center) / w.scale;
    }
    truth.linear_predictor[i] = eta;
    truth.latent_score[i] = eta + logistic_noise(rng);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return truth.latent_score[a] > truth.latent_score[b]; });
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.class_balance));
  const auto k_ad = static_cast<std::size_t>(std::llround(0.4 * static_cast<double>(k)));
  truth.labels.assign(n, kDiagnosis[0]);
  for (std::size_t i = 0; i < k; ++i) truth.labels[order[i]] = kDiagnosis[i < k_ad ? 2 : 1];
  truth.threshold = k > 0 ? truth.latent_score[order[k - 1]] : std::numeric_limits<double>::infinity();

  std::vector<Column> cols;
  for (std::size_t c = 0; c < kPredictors; ++c) {
    if (c == kApoe) {
      std::vector<std::string> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = kApoeLevels[static_cast<std::size_t>(subjects[i][c])];
      cols.push_back(Column::text(std::move(v)));
    } else {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = subjects[i][c];
      cols.push_back(Column::numeric(std::move(v)));
    }
  }
  cols.push_back(Column::text(truth.labels));
  Table table(schema, std::move(cols));
  if (config.missing_rate > 0.0) {
    table = inject_missing(table, config.missing_rate, derive_seed(config.seed, {0x3155}));
  }
  return {std::move(table), std::move(truth)};
}

Table inject_missing(const Table& table, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(Errc::InvalidArgument, "rate must lie in [0, 1)");
  if (rate == 0.0) return table;
  const auto& schema = table.schema();
  std::vector<Column> cols = table.columns();
  Rng rng(seed);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto kind = schema[c].kind;
    if (kind == FK::Target || kind == FK::Identifier) continue;
    auto& col = cols[c];
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (rng.uniform() < rate && !col.missing[r]) {
        col.missing[r] = 1;
        if (schema[c].is_text()) {
          col.texts[r].clear();
        } else {
          col.numbers[r] = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  }
  return Table(schema, std::move(cols));
}

double bayes_rate(const GroundTruth& truth, const std::vector<std::string>& features, std::size_t draws) {
  if (draws < 1) throw Error(Errc::InvalidArgument, "draws must be at least 1");
  const auto schema = cohort_schema();
  std::vector<std::uint8_t> seen(kPredictors, 0);
  for (const auto& f : features) {
    const auto c = schema.index_of(f);
    if (c >= kPredictors) throw Error(Errc::InvalidArgument, "'" + f + "' is not a generated predictor");
    seen[c] = 1;
  }
  const auto wcols = weight_columns(truth.weights);
  for (const auto& block : cohort_blocks()) {
    std::size_t in = 0;
    bool weighted = false;
    for (const auto& name : block) {
      const auto c = schema.index_of(name);
      in += seen[c];
      weighted = weighted || std::find(wcols.begin(), wcols.end(), c) != wcols.end();
    }
    if (weighted && in != 0 && in != block.size()) {
      throw Error(Errc::InvalidArgument, "subset splits the dependent block of '" + block.front() + "'");
    }
  }

  // Split each draw's linear predictor into its observed and hidden parts.
  auto contributions = [&](Rng& rng, double& observed, double& hidden) {
    const auto v = draw_subject(rng);
    observed = hidden = 0.0;
    for (std::size_t k = 0; k < wcols.size(); ++k) {
      const auto& w = truth.weights[k];
      const double term = w.weight * (v[wcols[k]] - w.center) / w.scale;
      (seen[wcols[k]] ? observed : hidden) += term;
    }
  };
  Rng rng(derive_seed(truth.config.seed, {0xba7e5}));
  std::vector<double> eta_s(draws), score(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    double o, h;
    contributions(rng, o, h);
    eta_s[i] = o;
    score[i] = o + h + logistic_noise(rng);
  }
  std::vector<double> sorted = score;
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(draws) * truth.config.class_balance));
  const auto pos = draws - std::clamp<std::size_t>(k, 1, draws);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(pos), sorted.end());
  const double tau = sorted[pos];

  // P(positive | observed part) = E_h sigmoid(eta_s + h - tau), tabulated on
  // a grid over the observed range and interpolated linearly.
  constexpr std::size_t kInner = 20000;
  constexpr std::size_t kGrid = 1025;
  bool any_hidden = false;
  for (std::size_t k2 = 0; k2 < wcols.size(); ++k2) any_hidden = any_hidden || (!seen[wcols[k2]] && truth.weights[k2].weight != 0.0);
  std::function<double(double)> prob = [](double x) { return sigmoid(x); };
  std::vector<double> table;
  double lo = 0.0, step = 1.0;
  if (any_hidden) {
    std::vector<double> hidden(kInner);
    Rng inner(derive_seed(truth.config.seed, {0xba7e6}));
    for (auto& h : hidden) {
      double o;
      contributions(inner, o, h);
    }
    const auto [mn, mx] = std::minmax_element(eta_s.begin(), eta_s.end());
    lo = *mn - tau;
    step = std::max(*mx - *mn, 1e-9) / static_cast<double>(kGrid - 1);
    table.resize(kGrid);
    for (std::size_t g = 0; g < kGrid; ++g) {
      double p = 0.0;
      for (double h : hidden) p += sigmoid(lo + step * static_cast<double>(g) + h);
      table[g] = p / static_cast<double>(kInner);
    }
    prob = [&](double x) {
      const double pos = std::clamp((x - lo) / step, 0.0, static_cast<double>(kGrid - 1));
      const auto g = std::min(static_cast<std::size_t>(pos), kGrid - 2);
      const double f = pos - static_cast<double>(g);
      return table[g] * (1.0 - f) + table[g + 1] * f;
    };
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double p = prob(eta_s[i] - tau);
    acc += std::max(p, 1.0 - p);
  }
  return acc / static_cast<double>(draws);
}

Schema raw_cohort_schema() {
  std::vector<ColumnSpec> cols;
  cols.push_back({"RID", FK::Identifier, {}, std::nullopt, FG::Meta});
  const double lo = static_cast<double>(*parse_iso_date("1905-01-01"));
  const double hi = static_cast<double>(*parse_iso_date("2015-12-31"));
  cols.push_back({"birth_date", FK::Date, {}, NumericRange{lo, hi}, FG::Meta});
  cols.push_back({"exam_date", FK::Date, {}, NumericRange{lo, hi}, FG::Meta});
  const auto base = cohort_schema();
  for (const auto& c : base.columns()) {
    if (c.name != "age") cols.push_back(c);
  }
  return Schema(std::move(cols));
}

Table to_raw_cohort(const Table& cohort, std::uint64_t seed) {
  using namespace std::chrono;
  const auto raw = raw_cohort_schema();
  const auto age_col = cohort.schema().index_of("age");
  const std::size_t n = cohort.n_rows();
  Rng rng(derive_seed(seed, {0x4a3}));
  const auto first_exam = sys_days(year{2006} / November / 1);
  std::vector<std::string> rid(n);
  std::vector<double> birth(n), exam(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%04zu", i + 1);
    rid[i] = buf;
    auto e = year_month_day(first_exam + days(static_cast<int>(rng.index(3 * 365))));
    if (static_cast<unsigned>(e.day()) > 28) e = e.year() / e.month() / day{28};
    exam[i] = static_cast<double>(sys_days(e).time_since_epoch().count());
    const int age = cohort.missing(i, age_col) ? 75 : static_cast<int>(cohort.number(i, age_col));
    const auto hi = sys_days((e.year() - years(age)) / e.month() / e.day());
    const auto lo = sys_days((e.year() - years(age + 1)) / e.month() / e.day()) + days(1);
    const auto span = static_cast<std::size_t>((hi - lo).count()) + 1;
    birth[i] = static_cast<double>((lo + days(static_cast<int>(rng.index(span)))).time_since_epoch().count());
  }
  std::vector<Column> cols;
  cols.push_back(Column::text(std::move(rid)));
  Column b = Column::numeric(std::move(birth));
  for (std::size_t i = 0; i < n; ++i) {
    if (cohort.missing(i, age_col)) {
      b.missing[i] = 1;
      b.numbers[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  cols.push_back(std::move(b));
  cols.push_back(Column::numeric(std::move(exam)));
  for (std::size_t c = 0; c < cohort.n_cols(); ++c) {
    if (c != age_col) cols.push_back(cohort.column(c));
  }
  return Table(raw, std::move(cols));
}

Table generate_planted(std::size_t n, std::size_t n_signal, std::size_t n_noise, std::uint64_t seed) {
  if (n < 2) throw Error(Errc::InvalidArgument, "n must be at least 2");
  const std::size_t p = n_signal + n_noise;
  if (p == 0) throw Error(Errc::InvalidArgument, "no features requested");
  std::vector<ColumnSpec> specs;
  for (std::size_t i = 0; i < n_signal; ++i) specs.push_back({"signal_" + std::to_string(i + 1), FK::Numeric, {}, std::nullopt, FG::Meta});
  for (std::size_t i = 0; i < n_noise; ++i) specs.push_back({"noise_" + std::to_string(i + 1), FK::Numeric, {}, std::nullopt, FG::Meta});
  specs.push_back({"y", FK::Target, {kHealthy, kNonHealthy}, std::nullopt, FG::Target});
  Rng rng(derive_seed(seed, {0x91a}));
  std::vector<std::vector<double>> x(p, std::vector<double>(n));
  std::vector<std::string> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double eta = 0.0;
    for (std::size_t f = 0; f < p; ++f) {
      x[f][r] = rng.normal();
      if (f < n_signal) eta += x[f][r];
    }
    y[r] = eta + logistic_noise(rng) > 0.0 ? kNonHealthy : kHealthy;
  }
  std::vector<Column> cols;
  for (auto& v : x) cols.push_back(Column::numeric(std::move(v)));
  cols.push_back(Column::text(std::move(y)));
  return Table(Schema(std::move(specs)), std::move(cols));
}

std::string truth_csv(const GroundTruth& truth) {
  std::ostringstream out;
  out << "subject,linear_predictor,latent_score,label\n";
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    out << i + 1 << ',' << format_double(truth.linear_predictor[i]) << ','
        << format_double(truth.latent_score[i]) << ',' << truth.labels[i] << '\n';
  }
  return out.str();
}

std::string weights_csv(const GroundTruth& truth) {
  std::ostringstream out;
  out << "feature,weight,center,scale\n";
  for (const auto& w : truth.weights) {
    out << w.feature << ',' << format_double(w.weight) << ',' << format_double(w.center) << ','
        << format_double(w.scale) << '\n';
  }
  return out.str();
}

}  // namespace adscreen
