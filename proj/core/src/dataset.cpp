#include "natfx/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "natfx/errors.hpp"

namespace natfx {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

// Numeric-aware ordering: if every label is a number, sort by value.
std::vector<std::string> sorted_levels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  bool numeric = std::all_of(labels.begin(), labels.end(),
                             [](const std::string& s) { return parse_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& x, const std::string& y) {
      return *parse_number(x) < *parse_number(y);
    });
  }
  return labels;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// Column

Column Column::numeric(std::vector<double> values, std::vector<std::string> text) {
  if (!text.empty() && text.size() != values.size()) {
    throw DimensionMismatch("numeric column text/value length differ");
  }
  Column c;
  c.numeric_ = true;
  c.values_ = std::move(values);
  c.text_ = std::move(text);
  return c;
}

Column Column::categorical(std::vector<std::string> levels, std::vector<std::uint32_t> codes) {
  for (auto code : codes) {
    if (code >= levels.size()) throw InvalidArgument("category code out of range");
  }
  Column c;
  c.numeric_ = false;
  c.levels_ = std::move(levels);
  c.codes_ = std::move(codes);
  return c;
}

Column Column::from_labels(const std::vector<std::string>& labels) {
  auto levels = sorted_levels(labels);
  std::map<std::string_view, std::uint32_t> index;
  for (std::size_t i = 0; i < levels.size(); ++i) index[levels[i]] = static_cast<std::uint32_t>(i);
  std::vector<std::uint32_t> codes;
  codes.reserve(labels.size());
  for (const auto& l : labels) codes.push_back(index.at(l));
  return categorical(std::move(levels), std::move(codes));
}

const std::vector<double>& Column::values() const {
  if (!numeric_) throw InvalidArgument("column is categorical, not numeric");
  return values_;
}

std::string Column::label(std::size_t row) const {
  if (!numeric_) return levels_[codes_[row]];
  if (!text_.empty()) return text_[row];
  return fmt17(values_[row]);
}

Column Column::as_categorical() const {
  if (!numeric_) return *this;
  std::vector<std::string> labels(size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = label(i);
  return from_labels(labels);
}

Column Column::take(std::span<const std::size_t> rows) const {
  Column c;
  c.numeric_ = numeric_;
  c.levels_ = levels_;
  if (numeric_) {
    c.values_.reserve(rows.size());
    for (auto r : rows) c.values_.push_back(values_[r]);
    if (!text_.empty()) {
      c.text_.reserve(rows.size());
      for (auto r : rows) c.text_.push_back(text_[r]);
    }
  } else {
    c.codes_.reserve(rows.size());
    for (auto r : rows) c.codes_.push_back(codes_[r]);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Roles / transforms

std::vector<std::string> Roles::bound() const {
  std::vector<std::string> out{exposure, m1};
  if (m2) out.push_back(*m2);
  out.push_back(outcome);
  out.insert(out.end(), covariates.begin(), covariates.end());
  // drop duplicates, keep first position
  std::vector<std::string> uniq;
  for (auto& s : out) {
    if (std::find(uniq.begin(), uniq.end(), s) == uniq.end()) uniq.push_back(s);
  }
  return uniq;
}

Roles Roles::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("roles: ") + e.what());
  }
  auto need = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw InvalidArgument(std::string("roles: missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
  };
  Roles r;
  r.exposure = need("exposure");
  r.m1 = need("m1");
  r.outcome = need("outcome");
  if (j.contains("m2") && !j["m2"].is_null()) r.m2 = need("m2");
  if (j.contains("covariates")) {
    if (!j["covariates"].is_array()) throw InvalidArgument("roles: 'covariates' must be an array");
    for (const auto& c : j["covariates"]) {
      if (!c.is_string()) throw InvalidArgument("roles: covariate names must be strings");
      r.covariates.push_back(c.get<std::string>());
    }
  }
  return r;
}

std::string Roles::to_json() const {
  nlohmann::ordered_json j;
  j["exposure"] = exposure;
  j["m1"] = m1;
  if (m2) j["m2"] = *m2;
  j["outcome"] = outcome;
  j["covariates"] = covariates;
  return j.dump();
}

std::string Transform::text() const { return "log(" + column + ")"; }

// ---------------------------------------------------------------------------
// Dataset

void Dataset::add(std::string name, Column column) {
  if (has(name)) throw InvalidArgument("duplicate column '" + name + "'");
  if (!columns_.empty() && column.size() != rows()) {
    throw DimensionMismatch("column '" + name + "' has " + std::to_string(column.size()) +
                            " rows, expected " + std::to_string(rows()));
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(column));
}

bool Dataset::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Column& Dataset::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw UnknownColumn(std::string(name));
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

Column& Dataset::column(std::string_view name) {
  return const_cast<Column&>(std::as_const(*this).column(name));
}

std::size_t Dataset::rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }

std::size_t Dataset::source_row(std::size_t row) const {
  return source_rows_.empty() ? row + 1 : source_rows_[row];
}

Dataset Dataset::take(std::span<const std::size_t> rows) const {
  Dataset out;
  out.names_ = names_;
  out.columns_.reserve(columns_.size());
  for (const auto& c : columns_) out.columns_.push_back(c.take(rows));
  out.source_rows_.reserve(rows.size());
  for (auto r : rows) out.source_rows_.push_back(source_row(r));
  out.dropped_ = dropped_;
  out.applied_ = applied_;
  return out;
}

double Dataset::mean(std::string_view name) const {
  const auto& v = column(name).values();
  if (v.empty()) throw InvalidArgument("mean of empty column '" + std::string(name) + "'");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string Dataset::to_csv() const {
  std::string out;
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (j) out += ',';
    out += csv_quote(names_[j]);
  }
  out += '\n';
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (j) out += ',';
      out += csv_quote(columns_[j].label(i));
    }
    out += '\n';
  }
  return out;
}

void apply_transforms(Dataset& data, const std::vector<Transform>& transforms) {
  for (const auto& t : transforms) {
    auto tag = t.text();
    const auto& done = data.applied_transforms();
    if (std::find(done.begin(), done.end(), tag) != done.end()) continue;
    auto& col = data.column(t.column);
    if (!col.is_numeric()) throw InvalidArgument(tag + " needs a numeric column");
    auto values = col.values();
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0)) {
        bad.push_back(data.source_row(i));
        continue;
      }
      values[i] = std::log(values[i]);
    }
    if (!bad.empty()) throw TransformDomainError(t.column, std::move(bad));
    col = Column::numeric(std::move(values));
    data.mark_transformed(std::move(tag));
  }
}

// ---------------------------------------------------------------------------
// CSV

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM

  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool end_of_record = false;
    while (!end_of_record) {
      field.clear();
      if (i < n && text[i] == '"') {
        std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= n) throw CsvError(open_line, "unterminated quoted field");
          char c = text[i++];
          if (c == '"') {
            if (i < n && text[i] == '"') {
              field += '"';
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field += c;
          }
        }
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw CsvError(line, "unexpected character after closing quote");
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') throw CsvError(line, "quote inside unquoted field");
          field += text[i++];
        }
      }
      rec.fields.push_back(field);
      if (i < n && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < n && text[i] == '\r') ++i;
      if (i < n && text[i] == '\n') ++i;
      ++line;
      end_of_record = true;
    }
    // skip fully blank lines
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;
    out.push_back(std::move(rec));
  }
  return out;
}

Dataset parse_dataset(std::string_view csv, const Roles& roles,
                      const std::vector<Transform>& transforms, const LoadOptions& options) {
  auto records = parse_csv(csv);
  if (records.empty()) throw CsvError(1, "missing header row");
  const auto& header = records.front().fields;

  auto bound = roles.bound();
  std::vector<std::size_t> where;
  std::vector<std::string> missing;
  for (const auto& name : bound) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      missing.push_back(name);
    } else {
      where.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw UnknownColumn(names);
  }
  for (const auto& t : transforms) {
    if (std::find(bound.begin(), bound.end(), t.column) == bound.end()) {
      throw UnknownColumn(t.column + " (transform target is not a bound column)");
    }
  }

  auto is_numeric_role = [&](const std::string& name) {
    if (name == roles.outcome) return true;
    if (std::find(roles.covariates.begin(), roles.covariates.end(), name) != roles.covariates.end())
      return true;
    return options.numeric_exposure_mediators;
  };

  std::vector<std::vector<std::string>> text(bound.size());
  std::vector<std::vector<double>> nums(bound.size());
  std::vector<std::size_t> source_rows;
  std::size_t dropped = 0;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw CsvError(rec.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(rec.fields.size()));
    }
    bool any_missing = false;
    for (auto w : where) {
      if (is_blank(rec.fields[w])) any_missing = true;
    }
    if (any_missing) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < bound.size(); ++j) {
      const auto& cell = rec.fields[where[j]];
      if (is_numeric_role(bound[j])) {
        auto v = parse_number(cell);
        if (!v) throw UnparseableCell(rec.line, bound[j], cell);
        nums[j].push_back(*v);
      }
      text[j].push_back(cell);
    }
    source_rows.push_back(r);
  }
  if (source_rows.empty()) {
    throw InvalidArgument("no complete rows remain after dropping " + std::to_string(dropped) +
                          " row(s) with missing values");
  }

  Dataset data;
  for (std::size_t j = 0; j < bound.size(); ++j) {
    if (is_numeric_role(bound[j])) {
      data.add(bound[j], Column::numeric(std::move(nums[j]), std::move(text[j])));
    } else {
      data.add(bound[j], Column::from_labels(text[j]));
    }
  }
  data.set_source_rows(std::move(source_rows));
  data.set_dropped(dropped);
  apply_transforms(data, transforms);
  return data;
}

Dataset load_dataset(const std::string& path, const Roles& roles,
                     const std::vector<Transform>& transforms, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), roles, transforms, options);
}

}  // namespace natfx
