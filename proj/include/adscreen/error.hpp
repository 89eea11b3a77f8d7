#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adscreen {

enum class Errc {
  SchemaMismatch,
  ParseError,
  DuplicateKey,
  NameCollision,
  UnknownColumn,
  TargetProtected,
  UnknownLevel,
  InvalidChronology,
  DegenerateClass,
  InvalidArgument,
  EmptyNode,
  MissingAtPredict,
  MissingValues,
  EmptyGrid,
  AllMissingColumn,
  NoEvalCells,
  TooFewMinority,
  EmptyConfig,
  TooFewRows,
  BadComponentCount,
  ShapeError,
  EmptyMatrix,
  MissingStage,
  IoError,
  ConfigError,
};

std::string_view errc_name(Errc code);

/// Every failure raised by the library. The code identifies the contract
/// violation; the message carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Unparseable CSV cell. `row` is the 1-based data row (the header is not counted).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& detail)
      : Error(Errc::ParseError, "row " + std::to_string(row) + ", column '" + column +
                                    "': " + detail),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace adscreen
