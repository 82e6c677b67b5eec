#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natfx {

/// One data column. Numeric columns keep their source text (when loaded from
/// a file) so they can also be read as categories.
class Column {
 public:
  static Column numeric(std::vector<double> values, std::vector<std::string> text = {});
  static Column categorical(std::vector<std::string> levels, std::vector<std::uint32_t> codes);
  static Column from_labels(const std::vector<std::string>& labels);

  bool is_numeric() const noexcept { return numeric_; }
  std::size_t size() const noexcept { return numeric_ ? values_.size() : codes_.size(); }

  const std::vector<double>& values() const;  // throws for categorical columns
  const std::vector<std::string>& levels() const noexcept { return levels_; }
  const std::vector<std::uint32_t>& codes() const noexcept { return codes_; }

  /// Cell text: the level label, the source text, or %.17g of the value.
  std::string label(std::size_t row) const;

  /// Category view. Numeric columns are grouped by their text labels;
  /// level order is numeric-aware (all-numeric labels sort by value).
  Column as_categorical() const;

  Column take(std::span<const std::size_t> rows) const;

 private:
  bool numeric_ = true;
  std::vector<double> values_;
  std::vector<std::string> text_;
  std::vector<std::string> levels_;
  std::vector<std::uint32_t> codes_;
};

/// Column bindings used by every estimator.
struct Roles {
  std::string exposure;
  std::string m1;
  std::optional<std::string> m2;
  std::string outcome;
  std::vector<std::string> covariates;

  std::vector<std::string> bound() const;

  /// {"exposure": "...", "m1": "...", "m2": "...", "outcome": "...",
  ///  "covariates": ["...", ...]}
  static Roles from_json(std::string_view text);
  std::string to_json() const;
};

struct Transform {
  enum class Kind { Log };
  std::string column;
  Kind kind = Kind::Log;

  std::string text() const;  // "log(col)"
};

/// Rectangular record set.
class Dataset {
 public:
  void add(std::string name, Column column);
  bool has(std::string_view name) const;
  const Column& column(std::string_view name) const;  // throws UnknownColumn
  Column& column(std::string_view name);
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t rows() const noexcept;

  /// 1-based data-row numbers in the source file (defaults to 1..n).
  std::size_t source_row(std::size_t row) const;
  void set_source_rows(std::vector<std::size_t> rows) { source_rows_ = std::move(rows); }

  std::size_t dropped() const noexcept { return dropped_; }
  void set_dropped(std::size_t n) noexcept { dropped_ = n; }

  const std::vector<std::string>& applied_transforms() const noexcept { return applied_; }
  void mark_transformed(std::string t) { applied_.push_back(std::move(t)); }

  /// Row subset (duplicates allowed), used for bootstrap resamples.
  Dataset take(std::span<const std::size_t> rows) const;

  /// Arithmetic mean of a numeric column.
  double mean(std::string_view name) const;

  std::string to_csv() const;

 private:
  std::vector<std::string> names_;
  std::vector<Column> columns_;
  std::vector<std::size_t> source_rows_;
  std::size_t dropped_ = 0;
  std::vector<std::string> applied_;
};

/// Applies transforms not already recorded on the dataset. Throws
/// TransformDomainError naming every offending source row.
void apply_transforms(Dataset& data, const std::vector<Transform>& transforms);

struct LoadOptions {
  /// Parse exposure and mediator columns as numbers (linear models).
  /// When false they are read as categories.
  bool numeric_exposure_mediators = false;
};

/// Reads a CSV file with a header row (RFC 4180 quoting, '.' decimal point,
/// empty field = missing). Only bound columns are kept; rows missing any bound
/// field are dropped and counted, then transforms are applied.
Dataset load_dataset(const std::string& path, const Roles& roles,
                     const std::vector<Transform>& transforms, const LoadOptions& options = {});
Dataset parse_dataset(std::string_view csv, const Roles& roles,
                      const std::vector<Transform>& transforms, const LoadOptions& options = {});

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// Splits RFC 4180 text into records. Throws CsvError with a line number.
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace natfx
