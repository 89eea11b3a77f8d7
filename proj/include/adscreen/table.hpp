#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adscreen {

enum class FeatureKind { Numeric, Categorical, Binary, Date, Identifier, Target };

enum class FeatureGroup { Demographic, MedicalHistory, ApoE, Neuropsych, Blood, Target, Meta };

std::string_view kind_name(FeatureKind kind);
std::string_view group_name(FeatureGroup group);
FeatureKind parse_kind(std::string_view text);
FeatureGroup parse_group(std::string_view text);

struct NumericRange {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const NumericRange&) const = default;
};

struct ColumnSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  /// Level set for Categorical and Target columns. Doubles as the valid set.
  std::vector<std::string> levels;
  /// Valid interval for Numeric columns; Date ranges are in days since 1970-01-01.
  std::optional<NumericRange> range;
  FeatureGroup group = FeatureGroup::Meta;

  bool is_text() const {
    return kind == FeatureKind::Categorical || kind == FeatureKind::Target ||
           kind == FeatureKind::Identifier;
  }
  /// Numeric, Binary and Categorical columns are model inputs.
  bool is_predictor() const {
    return kind == FeatureKind::Numeric || kind == FeatureKind::Binary ||
           kind == FeatureKind::Categorical;
  }
  std::optional<std::size_t> level_index(std::string_view level) const;

  bool operator==(const ColumnSpec&) const = default;
};

/// Ordered column specifications. Names are unique, at most one Target and at
/// most one Identifier column, Categorical level lists non-empty and
/// duplicate-free.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSpec> columns);

  std::size_t size() const { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns_[i]; }
  const std::vector<ColumnSpec>& columns() const { return columns_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws UnknownColumn.
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> target() const;
  /// Throws SchemaMismatch when the schema has no Target column.
  std::size_t require_target() const;
  std::vector<std::size_t> predictors() const;
  std::vector<std::string> predictor_names() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
};

/// Cell storage for one column. Numeric, Binary and Date cells live in
/// `numbers`; Categorical, Target and Identifier cells in `texts`. Masked
/// cells hold NaN / empty text and are never read.
struct Column {
  std::vector<double> numbers;
  std::vector<std::string> texts;
  std::vector<std::uint8_t> missing;

  std::size_t size() const { return missing.size(); }
  std::size_t missing_count() const;

  static Column numeric(std::vector<double> values);
  static Column text(std::vector<std::string> values);
  static Column empty_like(const ColumnSpec& spec, std::size_t n_rows);
};

/// Columnar mixed-type table with a per-cell missingness mask. Immutable by
/// convention: every operation returns a new table.
class Table {
 public:
  Table() = default;
  Table(Schema schema, std::vector<Column> columns);

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }

  const Column& column(std::size_t i) const { return columns_[i]; }
  const Column& column(std::string_view name) const { return columns_[schema_.index_of(name)]; }
  const std::vector<Column>& columns() const { return columns_; }

  bool missing(std::size_t row, std::size_t col) const { return columns_[col].missing[row] != 0; }
  double number(std::size_t row, std::size_t col) const { return columns_[col].numbers[row]; }
  const std::string& text(std::size_t row, std::size_t col) const { return columns_[col].texts[row]; }

  std::size_t missing_count() const;

  Table select_rows(std::span<const std::size_t> rows) const;
  Table select_columns(std::span<const std::string> names) const;
  /// Appends `other`'s rows; schemas must match exactly.
  Table append_rows(const Table& other) const;
  Table with_column(ColumnSpec spec, Column column) const;
  Table replace_column(std::size_t index, ColumnSpec spec, Column column) const;

  /// Equal schemas, equal masks and equal values at every unmasked cell.
  friend bool operator==(const Table& a, const Table& b);

 private:
  Schema schema_;
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

}  // namespace adscreen
