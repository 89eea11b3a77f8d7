#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "adscreen/table.hpp"

namespace adscreen {

struct CsvOptions {
  /// Cells equal to one of these strings load as missing. The first marker is
  /// what write_csv emits for masked cells.
  std::vector<std::string> missing_markers{"NA", ""};
};

/// Schema file: JSON with keys name, kind, range, group per column. For
/// Categorical and Target columns `range` is the level list; for Numeric a
/// [min, max] pair; for Date a pair of ISO dates.
Schema parse_schema_json(const std::string& text, CsvOptions* options = nullptr);
std::string schema_to_json(const Schema& schema, const CsvOptions& options = {});
Schema load_schema(const std::filesystem::path& path, CsvOptions* options = nullptr);
void save_schema(const Schema& schema, const std::filesystem::path& path,
                 const CsvOptions& options = {});

/// Throws SchemaMismatch if the header does not carry exactly the schema's
/// names, ParseError for an unparseable non-missing cell.
Table read_csv(std::istream& in, const Schema& schema, const CsvOptions& options = {});
Table load_csv(const std::filesystem::path& path, const Schema& schema,
               const CsvOptions& options = {});
void write_csv(std::ostream& out, const Table& table, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const Table& table,
              const CsvOptions& options = {});

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Days since 1970-01-01 for an ISO YYYY-MM-DD date; nullopt if malformed.
std::optional<std::int64_t> parse_iso_date(std::string_view text);
std::string format_iso_date(std::int64_t days);
/// Whole calendar years elapsed between two dates (floor), negative if reversed.
int whole_years_between(std::int64_t birth_days, std::int64_t exam_days);

struct MergeResult {
  Table table;
  /// Rows of each input table that found no partner in every other table.
  std::vector<std::size_t> dropped;
};

/// Inner join on the key columns. Row order follows the first table; key
/// columns come from the first table, then every table's non-key columns.
MergeResult merge_on_key(const std::vector<Table>& tables, const std::vector<std::string>& key);

struct AgeResult {
  Table table;
  /// Rows whose exam date precedes the birth date; their age cell is masked.
  std::vector<std::size_t> invalid_chronology;
};

AgeResult derive_age(const Table& table, const std::string& birthdate_col,
                     const std::string& examdate_col, const std::string& age_col = "age");

struct SanitizeReport {
  /// (column, replaced cell count), only columns with replacements, schema order.
  std::vector<std::pair<std::string, std::size_t>> replaced;
  std::size_t total() const;
};

/// Masks every unmasked cell outside its column's valid range or level set.
/// Binary cells must be 0 or 1. Never fails.
std::pair<Table, SanitizeReport> sanitize(const Table& table);

Table drop_columns(const Table& table, const std::vector<std::string>& names,
                   bool allow_target = false);

/// Removes rows whose Target cell is masked.
Table drop_unlabeled(const Table& table);

inline constexpr const char* kHealthy = "HC";
inline constexpr const char* kNonHealthy = "NonHC";

/// Recodes the diagnosis target HC/MCI/AD into HC/NonHC.
Table binarize_diagnosis(const Table& table);

struct SplitResult {
  Table train;
  Table test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Per-class train counts floor(n_c * f) topped up by largest remainder to
/// round(n * f). Rows keep their original relative order in both halves.
SplitResult split_stratified(const Table& table, double train_fraction, std::uint64_t seed);

struct ScaledColumn {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ScalerParams {
  std::vector<ScaledColumn> columns;
  /// Columns whose training stddev is zero; they scale to all-zeros.
  std::vector<std::string> constant_columns;
};

/// Population (divide-by-n) mean and stddev of every Numeric column.
ScalerParams fit_scaler(const Table& train);
Table apply_scaler(const Table& table, const ScalerParams& params);

}  // namespace adscreen
