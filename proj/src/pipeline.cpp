#include "adscreen/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/eval.hpp"
#include "adscreen/forest.hpp"
#include "adscreen/pca.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kConfigFormat = "adscreen-pipeline-config";
constexpr const char* kManifestFormat = "adscreen-manifest";
constexpr int kFormatVersion = 1;

// Stream ids for derive_seed(config.seed, {id, ...}).
enum StageSeed : std::uint64_t {
  kSeedGenerate = 1,
  kSeedImpute,
  kSeedSplit,
  kSeedBalance,
  kSeedTune,
  kSeedTrain,
  kSeedImportance,
  kSeedBoruta,
  kSeedSelect,
  kSeedGroups,
  kSeedPca,
};

std::uint64_t stage_seed(const PipelineConfig& cfg, StageSeed id, std::uint64_t part = 0) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(id), part});
}

const std::vector<std::string> kVariants{"original", "scaled"};

std::string primary_variant(const PipelineConfig& cfg) { return cfg.scale ? "scaled" : "original"; }

std::string stem(const std::string& base, const std::string& variant) {
  return variant == "scaled" ? base + "_scaled" : base;
}

struct GroupModel {
  const char* key;
  const char* label;
  std::vector<FeatureGroup> groups;
};

const std::vector<GroupModel>& group_models() {
  static const std::vector<GroupModel> models{
      {"medical_history", "Medical history", {FeatureGroup::MedicalHistory}},
      {"neuropsych", "Neuropsychology assessments", {FeatureGroup::Neuropsych}},
      {"blood_apoe", "Blood analyses & ApoE genotypes", {FeatureGroup::Blood, FeatureGroup::ApoE}},
  };
  return models;
}

// ---------------------------------------------------------------------------
// Files

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

fs::path require(const fs::path& dir, const std::string& file) {
  const auto path = dir / file;
  if (!fs::exists(path)) throw Error(Errc::MissingStage, "missing artifact " + file + " in " + dir.string());
  return path;
}

std::vector<std::string> save_table(const fs::path& dir, const std::string& name, const Table& table) {
  save_csv(dir / (name + ".csv"), table);
  save_schema(table.schema(), dir / (name + ".schema.json"));
  return {name + ".csv", name + ".schema.json"};
}

Table load_table(const fs::path& dir, const std::string& name) {
  const auto schema = load_schema(require(dir, name + ".schema.json"));
  return load_csv(require(dir, name + ".csv"), schema);
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string key_values_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string lookup(const KeyValues& kv, const std::string& key, const fs::path& source) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  throw Error(Errc::MissingStage, "key '" + key + "' absent from " + source.string());
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::vector<std::string>> read_simple_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_number(const std::string& text, const fs::path& source) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::ParseError, "bad number '" + text + "' in " + source.string());
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<std::string> annotations(const PipelineConfig& cfg) {
  std::vector<std::string> notes;
  if (cfg.split_first) {
    notes.push_back("imputation ran separately on train and test after the split; the target was not an "
                    "imputation input for test rows");
  } else {
    notes.push_back("LEAK: imputation ran on the full table before the train/test split, so test rows "
                    "informed imputed values (use --split-first for the leak-free order)");
  }
  if (cfg.tune_on_test) {
    notes.push_back("LEAK: mtry was chosen by test-set error");
  } else {
    notes.push_back("mtry chosen by out-of-bag error on the balanced training set; per-mtry test error is "
                    "recorded for reference only");
  }
  if (cfg.importance_enabled) notes.push_back("permutation importance is measured on the test set");
  notes.push_back("positive class: NonHC");
  return notes;
}

json load_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) return json::object();
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(Errc::IoError, "corrupt manifest.json: " + std::string(e.what()));
  }
}

void write_manifest(const fs::path& dir, const PipelineConfig& cfg, const std::string& stage,
                    const std::vector<std::string>& outputs, const std::string& error) {
  json m = load_manifest(dir);
  json stages = m.contains("stages") ? m["stages"] : json::array();
  json entry = json::object();
  entry["name"] = stage;
  if (error.empty()) {
    entry["status"] = "ok";
    json files = json::object();
    for (const auto& f : outputs) files[f] = "fnv1a64:" + file_fingerprint(dir / f);
    entry["outputs"] = files;
  } else {
    entry["status"] = "failed";
    entry["error"] = error;
  }
  bool replaced = false;
  for (auto& s : stages) {
    if (s["name"] == stage) {
      s = entry;
      replaced = true;
    }
  }
  if (!replaced) stages.push_back(entry);
  json order = json::array();
  for (const auto& s : stages) order.push_back(s["name"]);

  json out = json::object();
  out["format"] = kManifestFormat;
  out["version"] = kFormatVersion;
  out["tool_version"] = kToolVersion;
  out["seed"] = cfg.seed;
  out["config"] = json::parse(config_to_json(cfg));
  out["annotations"] = annotations(cfg);
  out["order"] = order;
  out["stages"] = stages;
  write_text(dir / "manifest.json", out.dump(2) + "\n");
}

std::set<std::string> completed_stages(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) throw Error(Errc::MissingStage, "no manifest.json in " + dir.string());
  std::set<std::string> done;
  const json m = load_manifest(dir);
  if (m.contains("stages")) {
    for (const auto& s : m["stages"]) {
      if (s.value("status", "") == "ok") done.insert(s["name"].get<std::string>());
    }
  }
  return done;
}

// ---------------------------------------------------------------------------
// Model helpers

std::size_t positive_index(const std::vector<std::string>& classes) {
  const auto it = std::find(classes.begin(), classes.end(), kNonHealthy);
  return it != classes.end() ? static_cast<std::size_t>(it - classes.begin()) : classes.size() - 1;
}

ForestConfig forest_config(const PipelineConfig& cfg, std::uint64_t seed) {
  ForestConfig fc;
  fc.ntree = cfg.ntree;
  fc.min_node_size = cfg.min_node_size;
  fc.seed = seed;
  fc.threads = cfg.threads;
  return fc;
}

std::string predictions_csv(const RandomForest& forest, const Table& test) {
  const auto t = test.schema().require_target();
  const auto preds = forest.predict(test);
  const auto pos = positive_index(forest.classes);
  std::ostringstream out;
  out << "row,truth,predicted,score\n";
  for (std::size_t r = 0; r < preds.size(); ++r) {
    out << r << ',' << test.text(r, t) << ',' << forest.classes[preds[r].label] << ','
        << format_double(preds[r].vote_fractions[pos]) << '\n';
  }
  return out.str();
}

// Writes predictions_<name>.csv and fit_<name>.txt; returns the file names.
std::vector<std::string> write_model_outputs(const fs::path& dir, const std::string& name, const RandomForest& forest,
                                             const Table& test) {
  write_text(dir / ("predictions_" + name + ".csv"), predictions_csv(forest, test));
  std::vector<std::string> names;
  for (const auto& f : forest.features) names.push_back(f.name);
  KeyValues fit{{"model", name},
                {"ntree", std::to_string(forest.config.ntree)},
                {"mtry", std::to_string(forest.mtry)},
                {"min_node_size", std::to_string(forest.config.min_node_size)},
                {"forest_seed", std::to_string(forest.config.seed)},
                {"n_train", std::to_string(forest.n_train)},
                {"n_features", std::to_string(forest.features.size())},
                {"features", join(names, ';')}};
  write_text(dir / ("fit_" + name + ".txt"), key_values_text(fit));
  return {"predictions_" + name + ".csv", "fit_" + name + ".txt"};
}

struct Predictions {
  std::size_t n = 0;
  std::unique_ptr<bool[]> predicted;
  std::unique_ptr<bool[]> truth;
  std::vector<double> score;

  std::span<const bool> predicted_span() const { return {predicted.get(), n}; }
  std::span<const bool> truth_span() const { return {truth.get(), n}; }
};

Predictions read_predictions(const fs::path& path) {
  const auto rows = read_simple_csv(path);
  if (rows.empty() || rows[0] != std::vector<std::string>{"row", "truth", "predicted", "score"}) {
    throw Error(Errc::ParseError, "unexpected header in " + path.string());
  }
  Predictions p;
  p.n = rows.size() - 1;
  p.predicted = std::make_unique<bool[]>(p.n);
  p.truth = std::make_unique<bool[]>(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != 4) throw Error(Errc::ParseError, "bad row in " + path.string());
    p.truth[i] = row[1] == kNonHealthy;
    p.predicted[i] = row[2] == kNonHealthy;
    p.score.push_back(parse_number(row[3], path));
  }
  return p;
}

std::string full_percent(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

std::string roc_csv(const std::vector<RocPoint>& roc) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  for (const auto& pt : roc) {
    out << (std::isinf(pt.threshold) ? std::string("inf") : format_double(pt.threshold)) << ','
        << format_double(pt.fpr) << ',' << format_double(pt.tpr) << '\n';
  }
  return out.str();
}

// metrics_<name>.txt from predictions_<name>.csv and fit_<name>.txt.
std::vector<std::string> write_metrics(const fs::path& dir, const PipelineConfig& cfg, const std::string& name,
                                       const std::string& model, const std::string& variant) {
  const auto pred_path = require(dir, "predictions_" + name + ".csv");
  const auto fit_path = require(dir, "fit_" + name + ".txt");
  const auto p = read_predictions(pred_path);
  const auto cm = confusion_matrix(p.predicted_span(), p.truth_span());
  const auto sc = scores(cm);
  std::string auc_text = "undefined";
  if (cm.tp + cm.fn > 0 && cm.fp + cm.tn > 0) auc_text = format_double(auc(roc_curve(p.score, p.truth_span())));
  const auto fit = read_key_values(fit_path);
  KeyValues kv{{"model", model},
               {"variant", variant},
               {"positive_class", kNonHealthy},
               {"n_test", std::to_string(cm.total())},
               {"tp", std::to_string(cm.tp)},
               {"fp", std::to_string(cm.fp)},
               {"fn", std::to_string(cm.fn)},
               {"tn", std::to_string(cm.tn)},
               {"accuracy", format_double(sc.accuracy)},
               {"precision", full_percent(sc.precision)},
               {"recall", full_percent(sc.recall)},
               {"auc", auc_text},
               {"seed", std::to_string(cfg.seed)},
               {"split_first", cfg.split_first ? "true" : "false"},
               {"train_fraction", format_double(cfg.train_fraction)},
               {"smote", cfg.smote_enabled ? "true" : "false"}};
  for (const auto& key : {"ntree", "mtry", "min_node_size", "forest_seed", "n_train", "n_features", "features"}) {
    kv.emplace_back(key, lookup(fit, key, fit_path));
  }
  write_text(dir / ("metrics_" + name + ".txt"), key_values_text(kv));
  return {"metrics_" + name + ".txt"};
}

Scores read_scores(const fs::path& dir, const std::string& name) {
  const auto path = require(dir, "metrics_" + name + ".txt");
  const auto kv = read_key_values(path);
  auto opt = [&](const std::string& key) -> std::optional<double> {
    const auto v = lookup(kv, key, path);
    if (v == "undefined") return std::nullopt;
    return parse_number(v, path);
  };
  Scores s;
  s.accuracy = parse_number(lookup(kv, "accuracy", path), path);
  s.precision = opt("precision");
  s.recall = opt("recall");
  return s;
}

std::size_t tuned_mtry(const fs::path& dir, const std::string& variant) {
  const auto path = require(dir, "tune_" + variant + ".txt");
  return static_cast<std::size_t>(parse_number(lookup(read_key_values(path), "best_mtry", path), path));
}

// Restores `order`'s column order on a table holding the same columns.
Table reorder_like(const Table& table, const Schema& order) {
  std::vector<ColumnSpec> specs;
  std::vector<Column> cols;
  for (const auto& spec : order.columns()) {
    const auto i = table.schema().index_of(spec.name);
    specs.push_back(table.schema()[i]);
    cols.push_back(table.column(i));
  }
  return Table(Schema(std::move(specs)), std::move(cols));
}

ImputeConfig impute_config(const PipelineConfig& cfg, std::uint64_t part) {
  ImputeConfig ic;
  ic.ntree = cfg.impute_ntree;
  ic.max_iter = cfg.impute_max_iter;
  ic.seed = stage_seed(cfg, kSeedImpute, part);
  ic.threads = cfg.threads;
  return ic;
}

std::string trace_csv(const ImputeResult& r) {
  std::ostringstream out;
  out << "iteration,numeric_diff,categorical_diff\n";
  for (std::size_t i = 0; i < r.diff_trace.size(); ++i) {
    out << i + 1 << ',' << format_double(r.diff_trace[i].numeric) << ','
        << format_double(r.diff_trace[i].categorical) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Stages. Each returns the files it wrote, relative to the run directory.

using Outputs = std::vector<std::string>;

void append(Outputs& a, const Outputs& b) { a.insert(a.end(), b.begin(), b.end()); }

Outputs stage_generate(const PipelineConfig& cfg, const fs::path& dir) {
  CohortConfig cc;
  cc.n_subjects = cfg.cohort_subjects;
  cc.seed = stage_seed(cfg, kSeedGenerate);
  cc.missing_rate = cfg.cohort_missing_rate;
  cc.class_balance = cfg.cohort_class_balance;
  cc.neuropsych_signal = cfg.cohort_neuropsych_signal;
  cc.nuisance_signal = cfg.cohort_nuisance_signal;
  const auto [cohort, truth] = generate_cohort(cc);
  const auto raw = to_raw_cohort(cohort, stage_seed(cfg, kSeedGenerate, 1));
  Outputs out = save_table(dir, "cohort", raw);
  write_text(dir / "truth.csv", truth_csv(truth));
  write_text(dir / "weights.csv", weights_csv(truth));
  out.push_back("truth.csv");
  out.push_back("weights.csv");
  return out;
}

Outputs stage_ingest(const PipelineConfig& cfg, const fs::path& dir) {
  Table table;
  if (!cfg.input_csv.empty() || !cfg.input_schema.empty()) {
    if (cfg.input_csv.empty() || cfg.input_schema.empty()) {
      throw Error(Errc::ConfigError, "input.csv and input.schema must be given together");
    }
    CsvOptions options;
    const auto schema = load_schema(cfg.input_schema, &options);
    table = load_csv(cfg.input_csv, schema, options);
  } else {
    table = load_table(dir, "cohort");
  }
  table.schema().require_target();
  return save_table(dir, "ingested", table);
}

Outputs stage_sanitize(const PipelineConfig&, const fs::path& dir) {
  const auto table = load_table(dir, "ingested");
  auto [clean, report] = sanitize(table);
  const auto labeled = drop_unlabeled(clean);
  KeyValues kv{{"rows_in", std::to_string(table.n_rows())},
               {"replaced_total", std::to_string(report.total())}};
  for (const auto& [col, n] : report.replaced) kv.emplace_back("replaced." + col, std::to_string(n));
  kv.emplace_back("unlabeled_dropped", std::to_string(clean.n_rows() - labeled.n_rows()));
  kv.emplace_back("rows_out", std::to_string(labeled.n_rows()));
  Outputs out = save_table(dir, "sanitized", labeled);
  write_text(dir / "sanitize_report.txt", key_values_text(kv));
  out.push_back("sanitize_report.txt");
  return out;
}

Outputs stage_derive_age(const PipelineConfig& cfg, const fs::path& dir) {
  const auto table = load_table(dir, "sanitized");
  const auto& schema = table.schema();
  KeyValues kv;
  Table aged;
  if (schema.find(cfg.birth_column) && schema.find(cfg.exam_column)) {
    auto r = derive_age(table, cfg.birth_column, cfg.exam_column, cfg.age_column);
    std::vector<std::string> rows;
    for (auto i : r.invalid_chronology) rows.push_back(std::to_string(i));
    kv = {{"derived", cfg.age_column},
          {"invalid_chronology", std::to_string(r.invalid_chronology.size())},
          {"invalid_rows", join(rows)}};
    aged = std::move(r.table);
  } else {
    kv = {{"derived", ""}, {"skipped", "date columns absent"}};
    aged = table;
  }
  Outputs out = save_table(dir, "aged", aged);
  write_text(dir / "age_report.txt", key_values_text(kv));
  out.push_back("age_report.txt");
  return out;
}

Outputs stage_drop_columns(const PipelineConfig& cfg, const fs::path& dir) {
  const auto table = load_table(dir, "aged");
  std::vector<std::string> present;
  for (const auto& name : cfg.drop_columns) {
    if (table.schema().find(name)) present.push_back(name);
  }
  Outputs out = save_table(dir, "dropped", drop_columns(table, present));
  write_text(dir / "drop_report.txt", key_values_text({{"dropped", join(present)}}));
  out.push_back("drop_report.txt");
  return out;
}

Outputs stage_binarize(const PipelineConfig&, const fs::path& dir) {
  return save_table(dir, "prepared", binarize_diagnosis(load_table(dir, "dropped")));
}

Outputs stage_split(const PipelineConfig& cfg, const fs::path& dir) {
  const auto source = load_table(dir, cfg.split_first ? "prepared" : "imputed");
  const auto split = split_stratified(source, cfg.train_fraction, stage_seed(cfg, kSeedSplit));
  Outputs out;
  append(out, save_table(dir, cfg.split_first ? "split_train" : "train", split.train));
  append(out, save_table(dir, cfg.split_first ? "split_test" : "test", split.test));
  std::vector<std::string> set(source.n_rows());
  for (auto r : split.train_rows) set[r] = "train";
  for (auto r : split.test_rows) set[r] = "test";
  std::ostringstream rows;
  rows << "row,set\n";
  for (std::size_t r = 0; r < set.size(); ++r) rows << r << ',' << set[r] << '\n';
  write_text(dir / "split_rows.csv", rows.str());
  out.push_back("split_rows.csv");
  return out;
}

Outputs stage_impute(const PipelineConfig& cfg, const fs::path& dir) {
  Outputs out;
  if (!cfg.split_first) {
    const auto r = missforest(load_table(dir, "prepared"), impute_config(cfg, 0));
    append(out, save_table(dir, "imputed", r.table));
    write_text(dir / "impute_trace.csv", trace_csv(r));
    out.push_back("impute_trace.csv");
    return out;
  }
  const auto train = missforest(load_table(dir, "split_train"), impute_config(cfg, 1));
  const auto test_in = load_table(dir, "split_test");
  const auto target = test_in.schema()[test_in.schema().require_target()].name;
  const auto test_features = drop_columns(test_in, {target}, true);
  const auto test_imp = missforest(test_features, impute_config(cfg, 2));
  const auto t = test_in.schema().require_target();
  const auto test = reorder_like(test_imp.table.with_column(test_in.schema()[t], test_in.column(t)), test_in.schema());
  append(out, save_table(dir, "train", train.table));
  append(out, save_table(dir, "test", test));
  write_text(dir / "impute_trace_train.csv", trace_csv(train));
  write_text(dir / "impute_trace_test.csv", trace_csv(test_imp));
  out.push_back("impute_trace_train.csv");
  out.push_back("impute_trace_test.csv");
  return out;
}

Outputs stage_scale(const PipelineConfig&, const fs::path& dir) {
  const auto train = load_table(dir, "train");
  const auto test = load_table(dir, "test");
  const auto params = fit_scaler(train);
  std::ostringstream csv;
  csv << "column,mean,stddev\n";
  for (const auto& c : params.columns) {
    csv << c.name << ',' << format_double(c.mean) << ',' << format_double(c.stddev) << '\n';
  }
  Outputs out;
  write_text(dir / "scaler.csv", csv.str());
  out.push_back("scaler.csv");
  append(out, save_table(dir, "train_scaled", apply_scaler(train, params)));
  append(out, save_table(dir, "test_scaled", apply_scaler(test, params)));
  return out;
}

Outputs stage_balance(const PipelineConfig& cfg, const fs::path& dir) {
  Outputs out;
  KeyValues kv{{"enabled", cfg.smote_enabled ? "true" : "false"}};
  for (const auto& v : kVariants) {
    const auto train = load_table(dir, stem("train", v));
    Table balanced = train;
    if (cfg.smote_enabled) {
      SmoteConfig sc;
      sc.k_neighbors = cfg.smote_k;
      sc.target = cfg.smote_target;
      sc.ratio = cfg.smote_ratio;
      sc.seed = stage_seed(cfg, kSeedBalance);
      auto r = smote(train, sc);
      kv.emplace_back(v + ".minority", r.minority_class);
      kv.emplace_back(v + ".synthetic_rows", std::to_string(r.synthetic_rows));
      kv.emplace_back(v + ".k_used", std::to_string(r.k_used));
      kv.emplace_back(v + ".k_clamped", r.k_clamped ? "true" : "false");
      balanced = std::move(r.table);
    }
    const auto t = balanced.schema().require_target();
    std::map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < balanced.n_rows(); ++r) ++counts[balanced.text(r, t)];
    for (const auto& [label, n] : counts) kv.emplace_back(v + ".count." + label, std::to_string(n));
    append(out, save_table(dir, stem("balanced", v), balanced));
  }
  write_text(dir / "balance_report.txt", key_values_text(kv));
  out.push_back("balance_report.txt");
  return out;
}

Outputs stage_tune(const PipelineConfig& cfg, const fs::path& dir) {
  Outputs out;
  for (const auto& v : kVariants) {
    const auto train = TrainingData::from_table(load_table(dir, stem("balanced", v)));
    const auto test = load_table(dir, stem("test", v));
    const auto t = test.schema().require_target();
    std::map<std::size_t, double> test_error;
    std::map<std::size_t, OobCurve> curves;
    const auto result = tune_mtry(train, forest_config(cfg, stage_seed(cfg, kSeedTune)), cfg.mtry_grid,
                                  [&](std::size_t m, const RandomForest& forest) {
                                    const auto pred = forest.predict(test);
                                    std::size_t wrong = 0;
                                    for (std::size_t r = 0; r < pred.size(); ++r) {
                                      wrong += forest.classes[pred[r].label] != test.text(r, t);
                                    }
                                    test_error[m] = static_cast<double>(wrong) / static_cast<double>(pred.size());
                                    curves[m] = oob_error(forest, train);
                                  });
    std::size_t best = result.best_mtry;
    if (cfg.tune_on_test) {
      best = result.points.front().mtry;
      for (const auto& pt : result.points) {
        if (test_error[pt.mtry] < test_error[best] || (test_error[pt.mtry] == test_error[best] && pt.mtry < best)) {
          best = pt.mtry;
        }
      }
    }
    std::ostringstream grid;
    grid << "mtry,oob_error,test_error\n";
    for (const auto& pt : result.points) {
      grid << pt.mtry << ',' << format_double(pt.oob_error) << ',' << format_double(test_error[pt.mtry]) << '\n';
    }
    write_text(dir / ("tune_" + v + ".csv"), grid.str());

    const auto& curve = curves[best];
    std::ostringstream oob;
    oob << "trees,oob_error";
    for (const auto& c : train.classes()) oob << ',' << c;
    oob << '\n';
    for (std::size_t i = 0; i < curve.overall.size(); ++i) {
      oob << i + 1 << ',' << format_double(curve.overall[i]);
      for (const auto& pc : curve.per_class) oob << ',' << format_double(pc[i]);
      oob << '\n';
    }
    write_text(dir / ("oob_curve_" + v + ".csv"), oob.str());
    write_text(dir / ("tune_" + v + ".txt"),
               key_values_text({{"best_mtry", std::to_string(best)},
                                {"selection", cfg.tune_on_test ? "test" : "oob"},
                                {"oob_best_mtry", std::to_string(result.best_mtry)}}));
    append(out, {"tune_" + v + ".csv", "oob_curve_" + v + ".csv", "tune_" + v + ".txt"});
  }
  return out;
}

Outputs stage_train(const PipelineConfig& cfg, const fs::path& dir) {
  Outputs out;
  for (const auto& v : kVariants) {
    const auto train = TrainingData::from_table(load_table(dir, stem("balanced", v)));
    const auto test = load_table(dir, stem("test", v));
    const auto untuned = fit_forest(train, forest_config(cfg, stage_seed(cfg, kSeedTrain)));
    append(out, write_model_outputs(dir, "untuned_" + v, untuned, test));

    const auto best = tuned_mtry(dir, v);
    // Same seed as the grid forest at `best`, so this is the tuning forest itself.
    auto fc = forest_config(cfg, tune_seed(stage_seed(cfg, kSeedTune), best));
    fc.mtry = best;
    const auto tuned = fit_forest(train, fc);
    append(out, write_model_outputs(dir, "tuned_" + v, tuned, test));
    if (v == primary_variant(cfg)) {
      write_text(dir / "model_tuned.json", forest_to_json(tuned));
      out.push_back("model_tuned.json");
    }
  }
  return out;
}

Outputs stage_evaluate(const PipelineConfig& cfg, const fs::path& dir) {
  Outputs out;
  for (const auto& model : {"untuned", "tuned"}) {
    for (const auto& v : kVariants) {
      append(out, write_metrics(dir, cfg, std::string(model) + "_" + v, model, v));
    }
  }
  const auto p = read_predictions(require(dir, "predictions_tuned_" + primary_variant(cfg) + ".csv"));
  write_text(dir / "roc.csv", roc_csv(roc_curve(p.score, p.truth_span())));
  out.push_back("roc.csv");
  return out;
}

Outputs stage_importance(const PipelineConfig& cfg, const fs::path& dir) {
  const auto model = forest_from_json(read_text(require(dir, "model_tuned.json")));
  const auto test = load_table(dir, stem("test", primary_variant(cfg)));
  const auto report = permutation_importance(model, test, cfg.importance_permutations,
                                             stage_seed(cfg, kSeedImportance), cfg.importance_loss, cfg.threads);
  write_text(dir / "importance.csv", importance_csv(report));
  return {"importance.csv"};
}

Outputs stage_boruta(const PipelineConfig& cfg, const fs::path& dir) {
  BorutaConfig bc;
  bc.forest_ntree = cfg.boruta_ntree;
  bc.max_rounds = cfg.boruta_max_rounds;
  bc.alpha = cfg.boruta_alpha;
  bc.seed = stage_seed(cfg, kSeedBoruta);
  bc.threads = cfg.threads;
  const auto report = boruta(load_table(dir, stem("balanced", primary_variant(cfg))), bc);
  write_text(dir / "boruta.csv", boruta_csv(report));
  write_text(dir / "boruta_report.txt", key_values_text({{"rounds_run", std::to_string(report.rounds_run)},
                                                         {"ntree", std::to_string(bc.forest_ntree)},
                                                         {"max_rounds", std::to_string(bc.max_rounds)},
                                                         {"alpha", format_double(bc.alpha)}}));
  return {"boruta.csv", "boruta_report.txt"};
}

Outputs stage_select(const PipelineConfig& cfg, const fs::path& dir) {
  const auto done = completed_stages(dir);
  std::set<std::string> dropped;
  std::set<std::string> confirmed;
  if (done.count("boruta")) {
    const auto path = require(dir, "boruta.csv");
    const auto rows = read_simple_csv(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 2) continue;
      if (rows[i][1] == "Rejected") dropped.insert(rows[i][0]);
      if (rows[i][1] == "Confirmed") confirmed.insert(rows[i][0]);
    }
  }
  if (cfg.drop_negative_importance && done.count("importance")) {
    const auto path = require(dir, "importance.csv");
    const auto rows = read_simple_csv(path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() >= 2 && parse_number(rows[i][1], path) < 0.0 && !confirmed.count(rows[i][0])) {
        dropped.insert(rows[i][0]);
      }
    }
  }
  Outputs out;
  std::vector<std::string> kept;
  for (const auto& v : kVariants) {
    const auto train_table = load_table(dir, stem("balanced", v));
    kept.clear();
    for (const auto& name : train_table.schema().predictor_names()) {
      if (!dropped.count(name)) kept.push_back(name);
    }
    if (kept.empty()) throw Error(Errc::InvalidArgument, "selection removed every feature");
    const auto train = TrainingData::from_table(train_table, kept);
    auto fc = forest_config(cfg, stage_seed(cfg, kSeedSelect));
    fc.mtry = std::min(tuned_mtry(dir, v), kept.size());
    const auto forest = fit_forest(train, fc);
    append(out, write_model_outputs(dir, "selected_" + v, forest, load_table(dir, stem("test", v))));
    append(out, write_metrics(dir, cfg, "selected_" + v, "selected", v));
  }
  std::vector<std::string> dropped_list(dropped.begin(), dropped.end());
  write_text(dir / "selected_features.txt",
             key_values_text({{"kept", join(kept)}, {"dropped", join(dropped_list)}}));
  out.push_back("selected_features.txt");
  return out;
}

Outputs stage_groups(const PipelineConfig& cfg, const fs::path& dir) {
  const auto v = primary_variant(cfg);
  const auto train_table = load_table(dir, stem("balanced", v));
  const auto test = load_table(dir, stem("test", v));
  const auto& schema = train_table.schema();
  Outputs out;
  std::vector<std::string> fitted;
  for (std::size_t i = 0; i < group_models().size(); ++i) {
    const auto& g = group_models()[i];
    std::vector<std::string> names;
    for (auto c : schema.predictors()) {
      if (std::find(g.groups.begin(), g.groups.end(), schema[c].group) != g.groups.end()) {
        names.push_back(schema[c].name);
      }
    }
    if (names.empty()) continue;
    const auto forest =
        fit_forest(TrainingData::from_table(train_table, names), forest_config(cfg, stage_seed(cfg, kSeedGroups, i)));
    const std::string name = std::string("group_") + g.key;
    append(out, write_model_outputs(dir, name, forest, test));
    append(out, write_metrics(dir, cfg, name, g.key, v));
    fitted.push_back(g.key);
  }
  write_text(dir / "groups.txt", key_values_text({{"groups", join(fitted)}, {"variant", v}}));
  out.push_back("groups.txt");
  return out;
}

Outputs stage_pca(const PipelineConfig& cfg, const fs::path& dir) {
  const auto v = primary_variant(cfg);
  const auto train = load_table(dir, stem("balanced", v));
  const auto test = load_table(dir, stem("test", v));
  const auto model = fit_pca(train);
  auto ks = cfg.pca_ks;
  if (ks.empty()) {
    for (std::size_t k = 1; k <= model.n_components(); ++k) ks.push_back(k);
  }
  const auto curve = accuracy_vs_components(train, test, ks, forest_config(cfg, stage_seed(cfg, kSeedPca)));
  write_text(dir / "pca_curve.csv", pca_curve_csv(curve));
  write_text(dir / "variance.csv", variance_csv(explained_variance(model)));
  return {"pca_curve.csv", "variance.csv"};
}

Outputs stage_report(const PipelineConfig&, const fs::path& dir) {
  emit_reports(dir);
  return {"table1_analog.csv", "table2_analog.csv", "table3_analog.csv"};
}

const std::map<std::string, std::function<Outputs(const PipelineConfig&, const fs::path&)>>& stage_table() {
  static const std::map<std::string, std::function<Outputs(const PipelineConfig&, const fs::path&)>> table{
      {"generate", stage_generate},     {"ingest", stage_ingest},
      {"sanitize", stage_sanitize},     {"derive_age", stage_derive_age},
      {"drop_columns", stage_drop_columns}, {"binarize", stage_binarize},
      {"impute", stage_impute},         {"split", stage_split},
      {"scale", stage_scale},           {"balance", stage_balance},
      {"tune", stage_tune},             {"train", stage_train},
      {"evaluate", stage_evaluate},     {"importance", stage_importance},
      {"boruta", stage_boruta},         {"select", stage_select},
      {"groups", stage_groups},         {"pca", stage_pca},
      {"report", stage_report},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Config JSON

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(Errc::ConfigError, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw Error(Errc::ConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json section(const json& root, const char* key, std::initializer_list<const char*> allowed) {
  if (!root.contains(key)) return json::object();
  check_keys(root.at(key), key, allowed);
  return root.at(key);
}

}  // namespace

// ---------------------------------------------------------------------------

void validate_config(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  if (c.cohort_subjects < 10) fail("cohort.n_subjects must be at least 10");
  if (!(c.cohort_missing_rate >= 0.0 && c.cohort_missing_rate < 1.0)) fail("cohort.missing_rate must lie in [0, 1)");
  if (!(c.cohort_class_balance > 0.0 && c.cohort_class_balance < 1.0)) fail("cohort.class_balance must lie in (0, 1)");
  if (c.impute_ntree == 0 || c.impute_max_iter == 0) fail("impute.ntree and impute.max_iter must be positive");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) fail("split.train_fraction must lie in (0, 1)");
  if (c.smote_k == 0) fail("smote.k_neighbors must be positive");
  if (!(c.smote_ratio > 0.0 && c.smote_ratio <= 1.0)) fail("smote.ratio must lie in (0, 1]");
  if (c.ntree == 0) fail("forest.ntree must be positive");
  if (c.mtry_grid.empty()) fail("forest.mtry_grid is empty");
  for (auto m : c.mtry_grid) {
    if (m == 0) fail("forest.mtry_grid entries must be positive");
  }
  if (c.min_node_size == 0) fail("forest.min_node_size must be positive");
  if (c.importance_permutations == 0) fail("importance.n_permutations must be positive");
  if (c.boruta_ntree == 0 || c.boruta_max_rounds == 0) fail("boruta.ntree and boruta.max_rounds must be positive");
  if (!(c.boruta_alpha > 0.0 && c.boruta_alpha < 1.0)) fail("boruta.alpha must lie in (0, 1)");
  for (auto k : c.pca_ks) {
    if (k == 0) fail("pca.ks entries must be positive");
  }
}

std::string config_to_json(const PipelineConfig& c) {
  json j = json::object();
  j["format"] = kConfigFormat;
  j["version"] = kFormatVersion;
  j["seed"] = c.seed;
  j["input"] = {{"csv", c.input_csv}, {"schema", c.input_schema}};
  j["cohort"] = {{"n_subjects", c.cohort_subjects},
                 {"missing_rate", c.cohort_missing_rate},
                 {"class_balance", c.cohort_class_balance},
                 {"neuropsych_signal", c.cohort_neuropsych_signal},
                 {"nuisance_signal", c.cohort_nuisance_signal}};
  j["preprocess"] = {{"drop_columns", c.drop_columns},
                     {"birth_column", c.birth_column},
                     {"exam_column", c.exam_column},
                     {"age_column", c.age_column}};
  j["impute"] = {{"ntree", c.impute_ntree}, {"max_iter", c.impute_max_iter}, {"split_first", c.split_first}};
  j["split"] = {{"train_fraction", c.train_fraction}};
  j["scale"] = c.scale;
  j["smote"] = {{"enabled", c.smote_enabled},
                {"k_neighbors", c.smote_k},
                {"target", c.smote_target == SmoteTarget::Parity ? "parity" : "ratio"},
                {"ratio", c.smote_ratio}};
  j["forest"] = {{"ntree", c.ntree},
                 {"mtry_grid", c.mtry_grid},
                 {"min_node_size", c.min_node_size},
                 {"tune_on_test", c.tune_on_test}};
  j["importance"] = {{"enabled", c.importance_enabled},
                     {"n_permutations", c.importance_permutations},
                     {"loss", c.importance_loss == ImportanceLoss::Accuracy ? "accuracy" : "auc"}};
  j["boruta"] = {{"enabled", c.boruta_enabled},
                 {"ntree", c.boruta_ntree},
                 {"max_rounds", c.boruta_max_rounds},
                 {"alpha", c.boruta_alpha}};
  j["selection"] = {{"enabled", c.selection_enabled}, {"drop_negative_importance", c.drop_negative_importance}};
  j["groups"] = {{"enabled", c.groups_enabled}};
  j["pca"] = {{"enabled", c.pca_enabled}, {"ks", c.pca_ks}};
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    check_keys(j, "config", {"format", "version", "seed", "input", "cohort", "preprocess", "impute", "split", "scale",
                             "smote", "forest", "importance", "boruta", "selection", "groups", "pca", "threads"});
    if (j.contains("format") && j["format"] != kConfigFormat) throw Error(Errc::ConfigError, "not a pipeline config");
    if (j.contains("version") && j["version"] != kFormatVersion) {
      throw Error(Errc::ConfigError, "unsupported config version " + j["version"].dump());
    }
    read_key(j, "seed", c.seed);
    read_key(j, "scale", c.scale);
    read_key(j, "threads", c.threads);

    const auto input = section(j, "input", {"csv", "schema"});
    read_key(input, "csv", c.input_csv);
    read_key(input, "schema", c.input_schema);

    const auto cohort =
        section(j, "cohort", {"n_subjects", "missing_rate", "class_balance", "neuropsych_signal", "nuisance_signal"});
    read_key(cohort, "n_subjects", c.cohort_subjects);
    read_key(cohort, "missing_rate", c.cohort_missing_rate);
    read_key(cohort, "class_balance", c.cohort_class_balance);
    read_key(cohort, "neuropsych_signal", c.cohort_neuropsych_signal);
    read_key(cohort, "nuisance_signal", c.cohort_nuisance_signal);

    const auto pre = section(j, "preprocess", {"drop_columns", "birth_column", "exam_column", "age_column"});
    read_key(pre, "drop_columns", c.drop_columns);
    read_key(pre, "birth_column", c.birth_column);
    read_key(pre, "exam_column", c.exam_column);
    read_key(pre, "age_column", c.age_column);

    const auto imp = section(j, "impute", {"ntree", "max_iter", "split_first"});
    read_key(imp, "ntree", c.impute_ntree);
    read_key(imp, "max_iter", c.impute_max_iter);
    read_key(imp, "split_first", c.split_first);

    read_key(section(j, "split", {"train_fraction"}), "train_fraction", c.train_fraction);

    const auto sm = section(j, "smote", {"enabled", "k_neighbors", "target", "ratio"});
    read_key(sm, "enabled", c.smote_enabled);
    read_key(sm, "k_neighbors", c.smote_k);
    read_key(sm, "ratio", c.smote_ratio);
    if (sm.contains("target")) {
      const auto t = sm["target"].get<std::string>();
      if (t == "parity") {
        c.smote_target = SmoteTarget::Parity;
      } else if (t == "ratio") {
        c.smote_target = SmoteTarget::Ratio;
      } else {
        throw Error(Errc::ConfigError, "smote.target must be 'parity' or 'ratio'");
      }
    }

    const auto fo = section(j, "forest", {"ntree", "mtry_grid", "min_node_size", "tune_on_test"});
    read_key(fo, "ntree", c.ntree);
    read_key(fo, "mtry_grid", c.mtry_grid);
    read_key(fo, "min_node_size", c.min_node_size);
    read_key(fo, "tune_on_test", c.tune_on_test);

    const auto im = section(j, "importance", {"enabled", "n_permutations", "loss"});
    read_key(im, "enabled", c.importance_enabled);
    read_key(im, "n_permutations", c.importance_permutations);
    if (im.contains("loss")) {
      const auto l = im["loss"].get<std::string>();
      if (l == "accuracy") {
        c.importance_loss = ImportanceLoss::Accuracy;
      } else if (l == "auc") {
        c.importance_loss = ImportanceLoss::Auc;
      } else {
        throw Error(Errc::ConfigError, "importance.loss must be 'accuracy' or 'auc'");
      }
    }

    const auto bo = section(j, "boruta", {"enabled", "ntree", "max_rounds", "alpha"});
    read_key(bo, "enabled", c.boruta_enabled);
    read_key(bo, "ntree", c.boruta_ntree);
    read_key(bo, "max_rounds", c.boruta_max_rounds);
    read_key(bo, "alpha", c.boruta_alpha);

    const auto se = section(j, "selection", {"enabled", "drop_negative_importance"});
    read_key(se, "enabled", c.selection_enabled);
    read_key(se, "drop_negative_importance", c.drop_negative_importance);

    read_key(section(j, "groups", {"enabled"}), "enabled", c.groups_enabled);

    const auto pc = section(j, "pca", {"enabled", "ks"});
    read_key(pc, "enabled", c.pca_enabled);
    read_key(pc, "ks", c.pca_ks);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  validate_config(c);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(Errc::ConfigError, "config file not found: " + path.string());
  return config_from_json(read_text(path));
}

void save_config(const PipelineConfig& config, const fs::path& path) { write_text(path, config_to_json(config)); }

std::vector<std::string> stage_order(const PipelineConfig& c) {
  std::vector<std::string> order;
  if (c.input_csv.empty() && c.input_schema.empty()) order.push_back("generate");
  for (const auto* s : {"ingest", "sanitize", "derive_age", "drop_columns", "binarize"}) order.push_back(s);
  if (c.split_first) {
    order.push_back("split");
    order.push_back("impute");
  } else {
    order.push_back("impute");
    order.push_back("split");
  }
  for (const auto* s : {"scale", "balance", "tune", "train", "evaluate"}) order.push_back(s);
  if (c.importance_enabled) order.push_back("importance");
  if (c.boruta_enabled) order.push_back("boruta");
  if (c.selection_enabled) order.push_back("select");
  if (c.groups_enabled) order.push_back("groups");
  if (c.pca_enabled) order.push_back("pca");
  order.push_back("report");
  return order;
}

void run_stage(const std::string& stage, const PipelineConfig& config, const fs::path& dir) {
  const auto& table = stage_table();
  const auto it = table.find(stage);
  if (it == table.end()) throw Error(Errc::ConfigError, "unknown stage '" + stage + "'");
  validate_config(config);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  save_config(config, dir / "config.json");
  const auto marker = dir / "FAILED";
  Outputs outputs;
  try {
    outputs = it->second(config, dir);
  } catch (const Error& e) {
    write_text(marker, key_values_text({{"stage", stage}, {"error", e.what()}}));
    write_manifest(dir, config, stage, {}, e.what());
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    const Error wrapped(Errc::IoError, e.what());
    write_text(marker, key_values_text({{"stage", stage}, {"error", wrapped.what()}}));
    write_manifest(dir, config, stage, {}, wrapped.what());
    throw StageError(stage, wrapped);
  }
  write_manifest(dir, config, stage, outputs, "");
  if (fs::exists(marker)) {
    const auto kv = read_key_values(marker);
    if (!kv.empty() && kv.front().second == stage) fs::remove(marker);
  }
}

fs::path run_pipeline(const PipelineConfig& config, const fs::path& dir) {
  validate_config(config);
  for (const auto& stage : stage_order(config)) run_stage(stage, config, dir);
  return dir;
}

void emit_reports(const fs::path& dir) {
  const auto done = completed_stages(dir);
  if (!done.count("evaluate")) throw Error(Errc::MissingStage, "evaluate has not completed in " + dir.string());
  for (const auto& [stage, file] : std::vector<std::pair<std::string, std::string>>{
           {"evaluate", "roc.csv"}, {"importance", "importance.csv"}, {"boruta", "boruta.csv"},
           {"pca", "pca_curve.csv"}, {"pca", "variance.csv"}}) {
    if (done.count(stage)) require(dir, file);
  }

  std::vector<std::string> models{"untuned", "tuned"};
  if (done.count("select")) models.push_back("selected");
  std::ostringstream t1;
  std::ostringstream t2;
  t1 << "model,variant,accuracy,precision,recall\n";
  t2 << "model,accuracy_diff,precision_diff,recall_diff\n";
  for (const auto& m : models) {
    const auto original = read_scores(dir, m + "_original");
    const auto scaled = read_scores(dir, m + "_scaled");
    for (const auto& [variant, s] : {std::pair{"original", original}, std::pair{"scaled", scaled}}) {
      t1 << m << ',' << variant << ',' << format_percent(s.accuracy) << ',' << format_percent(s.precision) << ','
         << format_percent(s.recall) << '\n';
    }
    t2 << m;
    for (const auto& d : diff_report(original, scaled)) t2 << ',' << d.text;
    t2 << '\n';
  }
  write_text(dir / "table1_analog.csv", t1.str());
  write_text(dir / "table2_analog.csv", t2.str());

  std::ostringstream t3;
  t3 << "group,accuracy,precision,recall\n";
  if (done.count("groups")) {
    const auto path = require(dir, "groups.txt");
    std::set<std::string> listed;
    std::istringstream in(lookup(read_key_values(path), "groups", path));
    for (std::string key; std::getline(in, key, ',');) listed.insert(key);
    for (const auto& g : group_models()) {
      if (!listed.count(g.key)) continue;
      const auto s = read_scores(dir, std::string("group_") + g.key);
      t3 << g.label << ',' << format_percent(s.accuracy) << ',' << format_percent(s.precision) << ','
         << format_percent(s.recall) << '\n';
    }
  }
  write_text(dir / "table3_analog.csv", t3.str());
}

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case Errc::ConfigError:
    case Errc::EmptyConfig:
    case Errc::EmptyGrid:
    case Errc::BadComponentCount:
      return 2;
    case Errc::SchemaMismatch:
    case Errc::ParseError:
    case Errc::DuplicateKey:
    case Errc::NameCollision:
    case Errc::UnknownColumn:
    case Errc::TargetProtected:
    case Errc::UnknownLevel:
    case Errc::InvalidChronology:
    case Errc::AllMissingColumn:
    case Errc::MissingValues:
    case Errc::MissingAtPredict:
    case Errc::DegenerateClass:
    case Errc::TooFewMinority:
    case Errc::TooFewRows:
    case Errc::IoError:
      return 3;
    default:
      return 4;
  }
}

std::string file_fingerprint(const fs::path& path) {
  const auto bytes = read_text(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::pair<std::string, std::string>> read_key_values(const fs::path& path) {
  std::istringstream in(read_text(path));
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "no '=' in line '" + line + "' of " + path.string());
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace adscreen
