#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace natfx {

/// Base of every error raised by the library. `kind()` is a stable short
/// class name used by the CLI to prefix messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Formula language.

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error("syntax error", "at offset " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ArityError : public Error {
 public:
  explicit ArityError(const std::string& what) : Error("arity error", what) {}
};

class UnknownMediatorIndex : public Error {
 public:
  explicit UnknownMediatorIndex(const std::string& what)
      : Error("unknown mediator index", what) {}
};

// Identification and evaluation.

class NotIdentifiable : public Error {
 public:
  explicit NotIdentifiable(const std::string& what) : Error("not identifiable", what) {}
};

class EvaluationOfProblematicSpec : public Error {
 public:
  explicit EvaluationOfProblematicSpec(const std::string& what)
      : Error("evaluation of problematic spec", what) {}
};

class UnboundLevel : public Error {
 public:
  explicit UnboundLevel(const std::string& what) : Error("unbound level", what) {}
};

class UnknownSupportValue : public Error {
 public:
  explicit UnknownSupportValue(const std::string& what)
      : Error("unknown support value", what) {}
};

class MissingFixedLevel : public Error {
 public:
  explicit MissingFixedLevel(const std::string& what) : Error("missing fixed level", what) {}
};

// Models and data.

class InvalidModel : public Error {
 public:
  explicit InvalidModel(const std::string& what) : Error("invalid model", what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid argument", what) {}
};

class EmptyCell : public Error {
 public:
  explicit EmptyCell(std::vector<std::string> cells);
  const std::vector<std::string>& cells() const noexcept { return cells_; }

 private:
  std::vector<std::string> cells_;
};

class NonCategoricalColumn : public Error {
 public:
  explicit NonCategoricalColumn(const std::string& column)
      : Error("non-categorical column", column) {}
};

class UnknownColumn : public Error {
 public:
  explicit UnknownColumn(const std::string& column)
      : Error("unknown column", column), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class CsvError : public Error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : Error("malformed csv", "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnparseableCell : public Error {
 public:
  UnparseableCell(std::size_t line, const std::string& column, const std::string& text)
      : Error("unparseable numeric cell",
              "line " + std::to_string(line) + ", column '" + column + "': '" + text + "'"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TransformDomainError : public Error {
 public:
  TransformDomainError(const std::string& column, std::vector<std::size_t> rows);
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

// Estimation.

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& column)
      : Error("rank deficient", "design column '" + column + "' is linearly dependent"),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch", what) {}
};

class TooManyFailedReplicates : public Error {
 public:
  TooManyFailedReplicates(std::size_t failed, std::size_t total, const std::string& first_error);
  std::size_t failed() const noexcept { return failed_; }

 private:
  std::size_t failed_;
};

}  // namespace natfx
