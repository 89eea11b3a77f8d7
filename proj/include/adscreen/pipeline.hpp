#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adscreen/balance.hpp"
#include "adscreen/error.hpp"
#include "adscreen/impute.hpp"
#include "adscreen/select.hpp"
#include "adscreen/synthgen.hpp"

namespace adscreen {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
  /// Master seed; every stage seed is derived from it.
  std::uint64_t seed = 42;
  /// Input CSV and schema. Both empty: a synthetic cohort is generated.
  std::string input_csv;
  std::string input_schema;
  /// Synthetic cohort shape; its seed is derived from `seed`.
  std::size_t cohort_subjects = 862;
  double cohort_missing_rate = 0.05;
  double cohort_class_balance = 320.0 / 862.0;
  double cohort_neuropsych_signal = 1.0;
  double cohort_nuisance_signal = 0.15;

  std::vector<std::string> drop_columns{"RID", "birth_date", "exam_date"};
  std::string birth_column = "birth_date";
  std::string exam_column = "exam_date";
  std::string age_column = "age";

  std::size_t impute_ntree = 100;
  std::size_t impute_max_iter = 10;
  /// Impute train and test separately after the split instead of the whole
  /// table before it.
  bool split_first = false;

  double train_fraction = 0.7;
  /// Use the z-scored variant for importance, Boruta, group models and PCA.
  bool scale = false;

  bool smote_enabled = true;
  std::size_t smote_k = 5;
  SmoteTarget smote_target = SmoteTarget::Parity;
  double smote_ratio = 1.0;

  std::size_t ntree = 500;
  std::vector<std::size_t> mtry_grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t min_node_size = 1;
  /// Pick mtry by test-set error instead of OOB error.
  bool tune_on_test = false;

  bool importance_enabled = true;
  std::size_t importance_permutations = 50;
  ImportanceLoss importance_loss = ImportanceLoss::Accuracy;

  bool boruta_enabled = true;
  std::size_t boruta_ntree = 500;
  std::size_t boruta_max_rounds = 20;
  double boruta_alpha = 0.05;

  /// Retrain after dropping Boruta-rejected features and, when
  /// drop_negative_importance is set, features with negative mean loss drop
  /// that Boruta did not confirm.
  bool selection_enabled = true;
  bool drop_negative_importance = true;

  bool groups_enabled = true;

  bool pca_enabled = true;
  /// Empty: every component count 1..p.
  std::vector<std::size_t> pca_ks;

  std::size_t threads = 1;

  bool operator==(const PipelineConfig&) const = default;
};

/// Throws ConfigError on an out-of-range parameter.
void validate_config(const PipelineConfig& config);

/// Versioned JSON config file. Missing keys keep their defaults; unknown
/// keys throw ConfigError.
std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// A stage failure: carries the stage name and the cause's error code.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Stage names in execution order for this config.
std::vector<std::string> stage_order(const PipelineConfig& config);

/// Runs one named stage inside `dir`, reading earlier stages' files and
/// recording outputs in manifest.json. On failure writes a FAILED marker and
/// throws StageError.
void run_stage(const std::string& stage, const PipelineConfig& config, const std::filesystem::path& dir);

/// Every stage of stage_order, then emit_reports. Returns `dir`.
std::filesystem::path run_pipeline(const PipelineConfig& config, const std::filesystem::path& dir);

/// table1_analog.csv, table2_analog.csv and table3_analog.csv from the
/// persisted metrics files. Throws MissingStage when a required artifact of
/// a recorded stage is absent.
void emit_reports(const std::filesystem::path& dir);

/// 2 for configuration errors, 3 for data errors, 4 for other stage failures.
int exit_code_for(const Error& error);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

/// Reads a key=value report file.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path);

}  // namespace adscreen
