#include "adscreen/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "adscreen/error.hpp"
#include "adscreen/random.hpp"

namespace adscreen {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// RFC-4180 record splitter. Returns false at end of input.
bool next_record(std::string_view text, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      ++pos;
      if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
      break;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

bool is_missing_marker(const std::string& cell, const CsvOptions& options) {
  return std::find(options.missing_markers.begin(), options.missing_markers.end(), cell) !=
         options.missing_markers.end();
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string cell_key(const Table& t, std::size_t row, std::size_t col) {
  if (t.missing(row, col)) return std::string("\x1f<missing>");
  if (t.schema()[col].is_text()) return t.text(row, col);
  return format_double(t.number(row, col));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}


// ---------------------------------------------------------------------------
// Dates

std::optional<std::int64_t> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [](std::from_chars_result r, const char* end) {
    return r.ec == std::errc() && r.ptr == end;
  };
  if (!ok(std::from_chars(text.data(), text.data() + 4, y), text.data() + 4)) return std::nullopt;
  if (!ok(std::from_chars(text.data() + 5, text.data() + 7, m), text.data() + 7)) return std::nullopt;
  if (!ok(std::from_chars(text.data() + 8, text.data() + 10, d), text.data() + 10)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days(ymd).time_since_epoch().count();
}

std::string format_iso_date(std::int64_t days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int whole_years_between(std::int64_t birth_days, std::int64_t exam_days) {
  using namespace std::chrono;
  const year_month_day b{sys_days{days{birth_days}}};
  const year_month_day e{sys_days{days{exam_days}}};
  int years = static_cast<int>(e.year()) - static_cast<int>(b.year());
  const auto bm = static_cast<unsigned>(b.month());
  const auto em = static_cast<unsigned>(e.month());
  const auto bd = static_cast<unsigned>(b.day());
  const auto ed = static_cast<unsigned>(e.day());
  // Anniversary not yet reached this year. A Feb 29 birthday counts as reached on Mar 1.
  if (em < bm || (em == bm && ed < bd)) --years;
  return years;
}

// ---------------------------------------------------------------------------
// Schema files

Schema parse_schema_json(const std::string& text, CsvOptions* options) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.contains("columns") || !doc["columns"].is_array()) {
    throw Error(Errc::ConfigError, "schema needs a 'columns' array");
  }
  std::vector<ColumnSpec> specs;
  try {
    for (const auto& c : doc["columns"]) {
      ColumnSpec s;
      s.name = c.at("name").get<std::string>();
      s.kind = parse_kind(c.at("kind").get<std::string>());
      s.group = c.contains("group") ? parse_group(c["group"].get<std::string>())
                                    : (s.kind == FeatureKind::Target ? FeatureGroup::Target
                                                                     : FeatureGroup::Meta);
      if (c.contains("range") && !c["range"].is_null()) {
        const auto& r = c["range"];
        if (s.kind == FeatureKind::Categorical || s.kind == FeatureKind::Target) {
          s.levels = r.get<std::vector<std::string>>();
        } else if (s.kind == FeatureKind::Date) {
          auto lo = parse_iso_date(r.at(0).get<std::string>());
          auto hi = parse_iso_date(r.at(1).get<std::string>());
          if (!lo || !hi) throw Error(Errc::ConfigError, "bad date range for " + s.name);
          s.range = NumericRange{static_cast<double>(*lo), static_cast<double>(*hi)};
        } else if (s.kind == FeatureKind::Numeric) {
          s.range = NumericRange{r.at(0).get<double>(), r.at(1).get<double>()};
        }
      }
      specs.push_back(std::move(s));
    }
    if (options && doc.contains("missing_markers")) {
      options->missing_markers = doc["missing_markers"].get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("malformed schema: ") + e.what());
  }
  try {
    return Schema(std::move(specs));
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
}

std::string schema_to_json(const Schema& schema, const CsvOptions& options) {
  json cols = json::array();
  for (const auto& s : schema.columns()) {
    json c;
    c["name"] = s.name;
    c["kind"] = std::string(kind_name(s.kind));
    c["group"] = std::string(group_name(s.group));
    if (!s.levels.empty()) {
      c["range"] = s.levels;
    } else if (s.range && s.kind == FeatureKind::Date) {
      c["range"] = {format_iso_date(static_cast<std::int64_t>(s.range->min)),
                    format_iso_date(static_cast<std::int64_t>(s.range->max))};
    } else if (s.range) {
      c["range"] = {s.range->min, s.range->max};
    }
    cols.push_back(std::move(c));
  }
  json doc;
  doc["format"] = "adscreen-schema";
  doc["version"] = 1;
  doc["missing_markers"] = options.missing_markers;
  doc["columns"] = std::move(cols);
  return doc.dump(2) + "\n";
}

Schema load_schema(const std::filesystem::path& path, CsvOptions* options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open schema " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema_json(buf.str(), options);
}

void save_schema(const Schema& schema, const std::filesystem::path& path,
                 const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << schema_to_json(schema, options);
}

// ---------------------------------------------------------------------------
// CSV

Table read_csv(std::istream& in, const Schema& schema, const CsvOptions& options) {
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t pos = 0;
  std::vector<std::string> fields;
  if (!next_record(text, pos, fields)) throw Error(Errc::SchemaMismatch, "empty CSV, no header");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);

  // header position of each schema column
  std::vector<std::size_t> source(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    auto it = std::find(fields.begin(), fields.end(), schema[c].name);
    if (it == fields.end()) {
      throw Error(Errc::SchemaMismatch, "CSV header lacks column '" + schema[c].name + "'");
    }
    source[c] = static_cast<std::size_t>(it - fields.begin());
  }
  if (fields.size() != schema.size()) {
    for (const auto& f : fields) {
      if (!schema.find(f)) throw Error(Errc::SchemaMismatch, "unexpected CSV column '" + f + "'");
    }
    throw Error(Errc::SchemaMismatch, "duplicate CSV header names");
  }

  std::vector<Column> cols(schema.size());
  std::size_t row = 0;
  while (next_record(text, pos, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty() && schema.size() > 1) {
      // trailing blank line
      if (pos >= text.size()) break;
      throw ParseError(row, schema[0].name, "blank line");
    }
    if (fields.size() != schema.size()) {
      throw ParseError(row, schema[0].name,
                       "expected " + std::to_string(schema.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& spec = schema[c];
      auto& cell = fields[source[c]];
      auto& col = cols[c];
      const bool miss = is_missing_marker(cell, options);
      col.missing.push_back(miss ? 1 : 0);
      if (spec.is_text()) {
        col.texts.push_back(miss ? std::string() : std::move(cell));
        continue;
      }
      if (miss) {
        col.numbers.push_back(kNaN);
        continue;
      }
      if (spec.kind == FeatureKind::Date) {
        auto d = parse_iso_date(cell);
        if (!d) throw ParseError(row, spec.name, "'" + cell + "' is not an ISO date");
        col.numbers.push_back(static_cast<double>(*d));
      } else {
        auto v = parse_double(cell);
        if (!v) throw ParseError(row, spec.name, "'" + cell + "' is not a number");
        col.numbers.push_back(*v);
      }
    }
  }
  return Table(schema, std::move(cols));
}

Table load_csv(const std::filesystem::path& path, const Schema& schema,
               const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return read_csv(in, schema, options);
}

void write_csv(std::ostream& out, const Table& table, const CsvOptions& options) {
  const auto& schema = table.schema();
  const std::string marker = options.missing_markers.empty() ? "NA" : options.missing_markers[0];
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out << ',';
    write_field(out, schema[c].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out << ',';
      if (table.missing(r, c)) {
        write_field(out, marker);
      } else if (schema[c].is_text()) {
        write_field(out, table.text(r, c));
      } else if (schema[c].kind == FeatureKind::Date) {
        out << format_iso_date(static_cast<std::int64_t>(table.number(r, c)));
      } else {
        out << format_double(table.number(r, c));
      }
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Table& table, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  write_csv(out, table, options);
}

// ---------------------------------------------------------------------------
// Merge

MergeResult merge_on_key(const std::vector<Table>& tables, const std::vector<std::string>& key) {
  if (tables.empty()) throw Error(Errc::InvalidArgument, "merge_on_key needs at least one table");
  if (key.empty()) throw Error(Errc::InvalidArgument, "merge_on_key needs key columns");

  std::vector<std::vector<std::size_t>> key_idx(tables.size());
  std::vector<std::map<std::vector<std::string>, std::size_t>> lookup(tables.size());
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (const auto& k : key) {
      auto i = tables[t].schema().find(k);
      if (!i) throw Error(Errc::SchemaMismatch, "table " + std::to_string(t) + " lacks key '" + k + "'");
      key_idx[t].push_back(*i);
    }
    for (std::size_t r = 0; r < tables[t].n_rows(); ++r) {
      std::vector<std::string> tuple;
      for (auto c : key_idx[t]) tuple.push_back(cell_key(tables[t], r, c));
      if (!lookup[t].emplace(std::move(tuple), r).second) {
        throw Error(Errc::DuplicateKey,
                    "table " + std::to_string(t) + " repeats a key tuple at row " + std::to_string(r + 1));
      }
    }
  }

  // output schema: keys from table 0, then non-key columns of each table
  std::vector<ColumnSpec> specs;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (table, column)
  for (std::size_t i = 0; i < key.size(); ++i) {
    specs.push_back(tables[0].schema()[key_idx[0][i]]);
    origin.emplace_back(0, key_idx[0][i]);
  }
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& s = tables[t].schema();
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (std::find(key_idx[t].begin(), key_idx[t].end(), c) != key_idx[t].end()) continue;
      for (const auto& existing : specs) {
        if (existing.name == s[c].name) {
          throw Error(Errc::NameCollision, "column '" + s[c].name + "' appears in more than one table");
        }
      }
      specs.push_back(s[c]);
      origin.emplace_back(t, c);
    }
  }

  // matched rows, in table-0 order
  std::vector<std::vector<std::size_t>> rows(tables.size());
  std::vector<std::vector<std::uint8_t>> used(tables.size());
  for (std::size_t t = 0; t < tables.size(); ++t) used[t].assign(tables[t].n_rows(), 0);
  for (std::size_t r = 0; r < tables[0].n_rows(); ++r) {
    std::vector<std::string> tuple;
    for (auto c : key_idx[0]) tuple.push_back(cell_key(tables[0], r, c));
    std::vector<std::size_t> match{r};
    bool all = true;
    for (std::size_t t = 1; t < tables.size() && all; ++t) {
      auto it = lookup[t].find(tuple);
      if (it == lookup[t].end()) all = false;
      else match.push_back(it->second);
    }
    if (!all) continue;
    for (std::size_t t = 0; t < tables.size(); ++t) {
      rows[t].push_back(match[t]);
      used[t][match[t]] = 1;
    }
  }

  std::vector<Column> cols;
  for (auto [t, c] : origin) {
    const auto sub = tables[t].select_rows(rows[t]);
    cols.push_back(sub.column(c));
  }
  MergeResult result{Table(Schema(std::move(specs)), std::move(cols)), {}};
  for (std::size_t t = 0; t < tables.size(); ++t) {
    result.dropped.push_back(tables[t].n_rows() - rows[t].size());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Derived age

AgeResult derive_age(const Table& table, const std::string& birthdate_col,
                     const std::string& examdate_col, const std::string& age_col) {
  const auto& schema = table.schema();
  const auto b = schema.index_of(birthdate_col);
  const auto e = schema.index_of(examdate_col);
  if (schema[b].kind != FeatureKind::Date || schema[e].kind != FeatureKind::Date) {
    throw Error(Errc::SchemaMismatch, "derive_age needs two Date columns");
  }
  if (schema.find(age_col)) throw Error(Errc::NameCollision, "column '" + age_col + "' already exists");

  AgeResult result;
  std::vector<double> ages(table.n_rows(), kNaN);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (table.missing(r, b) || table.missing(r, e)) continue;
    const auto birth = static_cast<std::int64_t>(table.number(r, b));
    const auto exam = static_cast<std::int64_t>(table.number(r, e));
    if (exam < birth) {
      result.invalid_chronology.push_back(r);
      continue;
    }
    ages[r] = whole_years_between(birth, exam);
  }
  ColumnSpec spec{age_col, FeatureKind::Numeric, {}, std::nullopt, FeatureGroup::Demographic};
  result.table = table.with_column(std::move(spec), Column::numeric(std::move(ages)));
  return result;
}

// ---------------------------------------------------------------------------
// Sanitize

std::size_t SanitizeReport::total() const {
  std::size_t n = 0;
  for (const auto& [name, count] : replaced) n += count;
  return n;
}

std::pair<Table, SanitizeReport> sanitize(const Table& table) {
  const auto& schema = table.schema();
  auto cols = table.columns();
  SanitizeReport report;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema[c];
    auto& col = cols[c];
    std::size_t count = 0;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      if (col.missing[r]) continue;
      bool valid = true;
      switch (spec.kind) {
        case FeatureKind::Numeric:
        case FeatureKind::Date:
          valid = !spec.range || spec.range->contains(col.numbers[r]);
          break;
        case FeatureKind::Binary:
          valid = col.numbers[r] == 0.0 || col.numbers[r] == 1.0;
          break;
        case FeatureKind::Categorical:
        case FeatureKind::Target:
          valid = spec.level_index(col.texts[r]).has_value();
          break;
        case FeatureKind::Identifier:
          break;
      }
      if (!valid) {
        col.missing[r] = 1;
        if (spec.is_text()) col.texts[r].clear();
        else col.numbers[r] = kNaN;
        ++count;
      }
    }
    if (count) report.replaced.emplace_back(spec.name, count);
  }
  return {Table(schema, std::move(cols)), std::move(report)};
}

// ---------------------------------------------------------------------------
// Column and row filters

Table drop_columns(const Table& table, const std::vector<std::string>& names, bool allow_target) {
  const auto& schema = table.schema();
  std::vector<std::uint8_t> drop(schema.size(), 0);
  for (const auto& n : names) {
    const auto i = schema.index_of(n);
    if (schema[i].kind == FeatureKind::Target && !allow_target) {
      throw Error(Errc::TargetProtected, "refusing to drop target column '" + n + "'");
    }
    drop[i] = 1;
  }
  std::vector<std::string> keep;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (!drop[c]) keep.push_back(schema[c].name);
  }
  return table.select_columns(keep);
}

Table drop_unlabeled(const Table& table) {
  const auto t = table.schema().require_target();
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (!table.missing(r, t)) rows.push_back(r);
  }
  return table.select_rows(rows);
}

Table binarize_diagnosis(const Table& table) {
  const auto t = table.schema().require_target();
  auto spec = table.schema()[t];
  auto col = table.column(t);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (col.missing[r]) continue;
    auto& v = col.texts[r];
    if (v == "HC") continue;
    if (v == "MCI" || v == "AD" || v == kNonHealthy) {
      v = kNonHealthy;
      continue;
    }
    throw Error(Errc::UnknownLevel, "diagnosis level '" + v + "' at row " + std::to_string(r + 1));
  }
  spec.levels = {kHealthy, kNonHealthy};
  return table.replace_column(t, std::move(spec), std::move(col));
}

// ---------------------------------------------------------------------------
// Stratified split

SplitResult split_stratified(const Table& table, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "train_fraction must lie in (0, 1)");
  }
  const auto t = table.schema().require_target();
  const auto& spec = table.schema()[t];
  const std::size_t k = spec.levels.size();
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    if (table.missing(r, t)) throw Error(Errc::MissingValues, "target is masked at row " + std::to_string(r + 1));
    auto level = spec.level_index(table.text(r, t));
    if (!level) throw Error(Errc::UnknownLevel, "target level '" + table.text(r, t) + "'");
    by_class[*level].push_back(r);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (by_class[c].empty()) throw Error(Errc::DegenerateClass, "class '" + spec.levels[c] + "' has no rows");
  }

  const double n = static_cast<double>(table.n_rows());
  const auto total = static_cast<std::size_t>(std::floor(n * train_fraction + 0.5 + 1e-9));
  std::vector<std::size_t> take(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double ideal = static_cast<double>(by_class[c].size()) * train_fraction;
    take[c] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
    remainder[c] = ideal - static_cast<double>(take[c]);
    assigned += take[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < total && i < k; ++i) {
    if (take[order[i]] < by_class[order[i]].size()) {
      ++take[order[i]];
      ++assigned;
    }
  }

  SplitResult result;
  std::vector<std::uint8_t> in_train(table.n_rows(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    auto rows = by_class[c];
    Rng rng(derive_seed(seed, {0x5b117, c}));
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = 0; i < take[c]; ++i) in_train[rows[i]] = 1;
  }
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    (in_train[r] ? result.train_rows : result.test_rows).push_back(r);
  }
  result.train = table.select_rows(result.train_rows);
  result.test = table.select_rows(result.test_rows);
  return result;
}

// ---------------------------------------------------------------------------
// Scaling

ScalerParams fit_scaler(const Table& train) {
  ScalerParams params;
  const auto& schema = train.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].kind != FeatureKind::Numeric) continue;
    const auto& col = train.column(c);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < train.n_rows(); ++r) {
      if (!col.missing[r]) {
        sum += col.numbers[r];
        ++n;
      }
    }
    ScaledColumn sc{schema[c].name, 0.0, 0.0};
    if (n > 0) {
      sc.mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t r = 0; r < train.n_rows(); ++r) {
        if (!col.missing[r]) ss += (col.numbers[r] - sc.mean) * (col.numbers[r] - sc.mean);
      }
      sc.stddev = std::sqrt(ss / static_cast<double>(n));
    }
    if (sc.stddev == 0.0) params.constant_columns.push_back(sc.name);
    params.columns.push_back(std::move(sc));
  }
  return params;
}

Table apply_scaler(const Table& table, const ScalerParams& params) {
  Table out = table;
  for (const auto& sc : params.columns) {
    const auto c = out.schema().index_of(sc.name);
    auto spec = out.schema()[c];
    auto col = out.column(c);
    for (std::size_t r = 0; r < out.n_rows(); ++r) {
      if (col.missing[r]) continue;
      col.numbers[r] = sc.stddev == 0.0 ? 0.0 : (col.numbers[r] - sc.mean) / sc.stddev;
    }
    spec.range.reset();
    out = out.replace_column(c, std::move(spec), std::move(col));
  }
  return out;
}

}  // namespace adscreen
