#include "adscreen/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "adscreen/error.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::NameCollision: return "NameCollision";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::TargetProtected: return "TargetProtected";
    case Errc::UnknownLevel: return "UnknownLevel";
    case Errc::InvalidChronology: return "InvalidChronology";
    case Errc::DegenerateClass: return "DegenerateClass";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::EmptyNode: return "EmptyNode";
    case Errc::MissingAtPredict: return "MissingAtPredict";
    case Errc::MissingValues: return "MissingValues";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::AllMissingColumn: return "AllMissingColumn";
    case Errc::NoEvalCells: return "NoEvalCells";
    case Errc::TooFewMinority: return "TooFewMinority";
    case Errc::EmptyConfig: return "EmptyConfig";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::BadComponentCount: return "BadComponentCount";
    case Errc::ShapeError: return "ShapeError";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::MissingStage: return "MissingStage";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::string_view kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Categorical: return "categorical";
    case FeatureKind::Binary: return "binary";
    case FeatureKind::Date: return "date";
    case FeatureKind::Identifier: return "identifier";
    case FeatureKind::Target: return "target";
  }
  return "numeric";
}

std::string_view group_name(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Demographic: return "demographic";
    case FeatureGroup::MedicalHistory: return "medical_history";
    case FeatureGroup::ApoE: return "apoe";
    case FeatureGroup::Neuropsych: return "neuropsych";
    case FeatureGroup::Blood: return "blood";
    case FeatureGroup::Target: return "target";
    case FeatureGroup::Meta: return "meta";
  }
  return "meta";
}

FeatureKind parse_kind(std::string_view text) {
  for (auto k : {FeatureKind::Numeric, FeatureKind::Categorical, FeatureKind::Binary,
                 FeatureKind::Date, FeatureKind::Identifier, FeatureKind::Target}) {
    if (kind_name(k) == text) return k;
  }
  throw Error(Errc::ConfigError, "unknown column kind '" + std::string(text) + "'");
}

FeatureGroup parse_group(std::string_view text) {
  for (auto g : {FeatureGroup::Demographic, FeatureGroup::MedicalHistory, FeatureGroup::ApoE,
                 FeatureGroup::Neuropsych, FeatureGroup::Blood, FeatureGroup::Target,
                 FeatureGroup::Meta}) {
    if (group_name(g) == text) return g;
  }
  throw Error(Errc::ConfigError, "unknown feature group '" + std::string(text) + "'");
}

std::optional<std::size_t> ColumnSpec::level_index(std::string_view level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return i;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  std::set<std::string_view> names;
  int targets = 0;
  int identifiers = 0;
  for (const auto& c : columns_) {
    if (!names.insert(c.name).second) {
      throw Error(Errc::SchemaMismatch, "duplicate column name '" + c.name + "'");
    }
    if (c.kind == FeatureKind::Target) ++targets;
    if (c.kind == FeatureKind::Identifier) ++identifiers;
    if (c.kind == FeatureKind::Categorical || c.kind == FeatureKind::Target) {
      if (c.levels.empty()) {
        throw Error(Errc::SchemaMismatch, "column '" + c.name + "' has an empty level set");
      }
      std::set<std::string_view> seen(c.levels.begin(), c.levels.end());
      if (seen.size() != c.levels.size()) {
        throw Error(Errc::SchemaMismatch, "column '" + c.name + "' has duplicate levels");
      }
    }
    if (c.range && !(c.range->min <= c.range->max)) {
      throw Error(Errc::SchemaMismatch, "column '" + c.name + "' has min > max");
    }
  }
  if (targets > 1) throw Error(Errc::SchemaMismatch, "more than one Target column");
  if (identifiers > 1) throw Error(Errc::SchemaMismatch, "more than one Identifier column");
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(Errc::UnknownColumn, "no column named '" + std::string(name) + "'");
}

std::optional<std::size_t> Schema::target() const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].kind == FeatureKind::Target) return i;
  }
  return std::nullopt;
}

std::size_t Schema::require_target() const {
  if (auto t = target()) return *t;
  throw Error(Errc::SchemaMismatch, "schema has no Target column");
}

std::vector<std::size_t> Schema::predictors() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].is_predictor()) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Schema::predictor_names() const {
  std::vector<std::string> out;
  for (auto i : predictors()) out.push_back(columns_[i].name);
  return out;
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

Column Column::numeric(std::vector<double> values) {
  Column c;
  c.missing.resize(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) c.missing[i] = 1;
  }
  c.numbers = std::move(values);
  return c;
}

Column Column::text(std::vector<std::string> values) {
  Column c;
  c.missing.assign(values.size(), 0);
  c.texts = std::move(values);
  return c;
}

Column Column::empty_like(const ColumnSpec& spec, std::size_t n_rows) {
  Column c;
  c.missing.assign(n_rows, 1);
  if (spec.is_text()) {
    c.texts.assign(n_rows, std::string());
  } else {
    c.numbers.assign(n_rows, std::numeric_limits<double>::quiet_NaN());
  }
  return c;
}

Table::Table(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) {
    throw Error(Errc::SchemaMismatch, "column count " + std::to_string(columns_.size()) +
                                          " does not match schema size " +
                                          std::to_string(schema_.size()));
  }
  n_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& spec = schema_[c];
    auto& col = columns_[c];
    const std::size_t storage = spec.is_text() ? col.texts.size() : col.numbers.size();
    if (col.size() != n_rows_ || storage != n_rows_) {
      throw Error(Errc::ShapeError, "column '" + spec.name + "' has inconsistent length");
    }
    if (!spec.is_text()) {
      for (std::size_t r = 0; r < n_rows_; ++r) {
        if (!col.missing[r] && !std::isfinite(col.numbers[r])) {
          throw Error(Errc::InvalidArgument,
                      "non-finite unmasked value in column '" + spec.name + "'");
        }
      }
    }
  }
}

std::size_t Table::missing_count() const {
  std::size_t n = 0;
  for (const auto& c : columns_) n += c.missing_count();
  return n;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> out(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& src = columns_[c];
    auto& dst = out[c];
    dst.missing.reserve(rows.size());
    for (auto r : rows) {
      if (r >= n_rows_) throw Error(Errc::InvalidArgument, "row index out of range");
      dst.missing.push_back(src.missing[r]);
    }
    if (schema_[c].is_text()) {
      dst.texts.reserve(rows.size());
      for (auto r : rows) dst.texts.push_back(src.texts[r]);
    } else {
      dst.numbers.reserve(rows.size());
      for (auto r : rows) dst.numbers.push_back(src.numbers[r]);
    }
  }
  return Table(schema_, std::move(out));
}

Table Table::select_columns(std::span<const std::string> names) const {
  std::vector<ColumnSpec> specs;
  std::vector<Column> cols;
  for (const auto& n : names) {
    const auto i = schema_.index_of(n);
    specs.push_back(schema_[i]);
    cols.push_back(columns_[i]);
  }
  return Table(Schema(std::move(specs)), std::move(cols));
}

Table Table::append_rows(const Table& other) const {
  if (!(other.schema_ == schema_)) {
    throw Error(Errc::SchemaMismatch, "cannot append rows with a different schema");
  }
  auto cols = columns_;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& src = other.columns_[c];
    cols[c].missing.insert(cols[c].missing.end(), src.missing.begin(), src.missing.end());
    cols[c].numbers.insert(cols[c].numbers.end(), src.numbers.begin(), src.numbers.end());
    cols[c].texts.insert(cols[c].texts.end(), src.texts.begin(), src.texts.end());
  }
  return Table(schema_, std::move(cols));
}

Table Table::with_column(ColumnSpec spec, Column column) const {
  auto specs = schema_.columns();
  specs.push_back(std::move(spec));
  auto cols = columns_;
  cols.push_back(std::move(column));
  return Table(Schema(std::move(specs)), std::move(cols));
}

Table Table::replace_column(std::size_t index, ColumnSpec spec, Column column) const {
  auto specs = schema_.columns();
  specs.at(index) = std::move(spec);
  auto cols = columns_;
  cols.at(index) = std::move(column);
  return Table(Schema(std::move(specs)), std::move(cols));
}

bool operator==(const Table& a, const Table& b) {
  if (!(a.schema_ == b.schema_) || a.n_rows_ != b.n_rows_) return false;
  for (std::size_t c = 0; c < a.columns_.size(); ++c) {
    const auto& x = a.columns_[c];
    const auto& y = b.columns_[c];
    if (x.missing != y.missing) return false;
    const bool text = a.schema_[c].is_text();
    for (std::size_t r = 0; r < a.n_rows_; ++r) {
      if (x.missing[r]) continue;
      if (text ? x.texts[r] != y.texts[r] : x.numbers[r] != y.numbers[r]) return false;
    }
  }
  return true;
}

}  // namespace adscreen
