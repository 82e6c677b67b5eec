#include "natfx/errors.hpp"

namespace natfx {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

std::string join_rows(const std::vector<std::size_t>& rows) {
  // Long lists are cut; the full set stays available through rows().
  constexpr std::size_t shown = 20;
  std::string out;
  for (std::size_t i = 0; i < rows.size() && i < shown; ++i) {
    if (i) out += ", ";
    out += std::to_string(rows[i]);
  }
  if (rows.size() > shown) out += ", ... (" + std::to_string(rows.size()) + " rows)";
  return out;
}

}  // namespace

EmptyCell::EmptyCell(std::vector<std::string> cells)
    : Error("empty cell", "no observations in " + join(cells)), cells_(std::move(cells)) {}

TransformDomainError::TransformDomainError(const std::string& column, std::vector<std::size_t> rows)
    : Error("transform domain error",
            "log(" + column + ") needs positive values; offending data rows: " + join_rows(rows)),
      rows_(std::move(rows)) {}

TooManyFailedReplicates::TooManyFailedReplicates(std::size_t failed, std::size_t total,
                                                 const std::string& first_error)
    : Error("too many failed replicates",
            std::to_string(failed) + " of " + std::to_string(total) +
                " bootstrap replicates failed; first failure: " + first_error),
      failed_(failed) {}

}  // namespace natfx
