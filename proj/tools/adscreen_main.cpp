#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adscreen/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  bool split_first = false;
  bool scale = false;
  std::optional<std::size_t> threads;
  std::string input;
  std::string schema;
};

// Stages run by each subcommand, filtered by the config's enabled stages.
std::vector<std::string> stages_for(const std::string& command, const adscreen::PipelineConfig& cfg) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"generate", {"generate"}},
      {"ingest", {"ingest", "sanitize", "derive_age", "drop_columns", "binarize"}},
      {"impute", {"impute"}},
      {"split", {"split"}},
      {"balance", {"scale", "balance"}},
      {"tune", {"tune"}},
      {"train", {"train", "groups"}},
      {"evaluate", {"evaluate", "report"}},
      {"importance", {"importance"}},
      {"boruta", {"boruta", "select", "report"}},
      {"pca", {"pca"}},
  };
  if (command == "reproduce") return adscreen::stage_order(cfg);
  const auto enabled = adscreen::stage_order(cfg);
  std::vector<std::string> out;
  for (const auto& s : table.at(command)) {
    if (s == "generate" || std::find(enabled.begin(), enabled.end(), s) != enabled.end()) out.push_back(s);
  }
  return out;
}

adscreen::PipelineConfig resolve_config(const Options& o) {
  adscreen::PipelineConfig cfg;
  const auto saved = fs::path(o.out) / "config.json";
  if (!o.config.empty()) {
    cfg = adscreen::load_config(o.config);
  } else if (fs::exists(saved)) {
    cfg = adscreen::load_config(saved);
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.split_first) cfg.split_first = true;
  if (o.scale) cfg.scale = true;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.input.empty()) cfg.input_csv = o.input;
  if (!o.schema.empty()) cfg.input_schema = o.schema;
  adscreen::validate_config(cfg);
  return cfg;
}

int run(const std::string& command, const Options& o) {
  try {
    const auto cfg = resolve_config(o);
    for (const auto& stage : stages_for(command, cfg)) {
      adscreen::run_stage(stage, cfg, o.out);
      std::cout << stage << ": ok\n";
    }
    std::cout << "run directory: " << o.out << "\n";
    return 0;
  } catch (const adscreen::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const int code = adscreen::exit_code_for(e);
    return code == 2 || code == 3 ? code : 4;
  } catch (const adscreen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return adscreen::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-forest screening pipeline: impute, balance, tune, select and evaluate"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"generate", "Write a synthetic cohort (cohort.csv, its schema, truth.csv, weights.csv)"},
      {"ingest", "Load, sanitize, derive age, drop columns and binarize the diagnosis"},
      {"impute", "MissForest imputation"},
      {"split", "Stratified train/test split"},
      {"balance", "Fit the scaler and SMOTE-balance the training set"},
      {"tune", "OOB mtry grid search"},
      {"train", "Fit the untuned, tuned and feature-group forests"},
      {"evaluate", "Score every fitted model and write the report tables"},
      {"importance", "Permutation importance of the tuned model"},
      {"boruta", "Boruta selection and the post-selection model"},
      {"pca", "Accuracy against the number of principal components"},
      {"reproduce", "Run every stage end to end"},
  };
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Pipeline config JSON");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Run directory")->capture_default_str();
    sub->add_flag("--split-first", o.split_first, "Impute after the train/test split");
    sub->add_flag("--scale", o.scale, "Use the z-scored variant for downstream stages");
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--input", o.input, "Input CSV (overrides the config)");
    sub->add_option("--schema", o.schema, "Input schema JSON (overrides the config)");
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(chosen, o);
}
