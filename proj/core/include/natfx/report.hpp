#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "natfx/assumptions.hpp"
#include "natfx/decomp.hpp"
#include "natfx/estimate.hpp"

namespace natfx {

struct CoefficientTable {
  std::string model;  // "Y", "M2", "M1"
  std::vector<std::string> terms;
  std::vector<double> estimate;
  std::vector<double> se;
  double residual_variance = 0;
  std::size_t n = 0;
  std::size_t df = 0;
};

CoefficientTable coefficient_table(std::string model, const OlsFit& fit);

struct BootstrapSummary {
  std::size_t replicates = 0;
  std::size_t failed = 0;
  double level = 0.95;
  double max_fail = 0.01;
  std::uint64_t seed = 0;
};

struct Report {
  std::string command;
  std::string scenario;
  DecompositionResult result;
  AssumptionLedger ledger;
  std::vector<CoefficientTable> fits;
  std::optional<std::size_t> n_used;
  std::optional<std::size_t> n_dropped;
  std::optional<BootstrapSummary> bootstrap;
  /// Everything needed to rerun: seed, B, transforms, resolved reference
  /// levels, input paths.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> notes;
};

/// Rounds to `digits` significant digits (values printed in JSON).
double round_sig(double v, int digits = 12);
/// Table cell: 4 significant digits of the 12-digit rounded value.
std::string table_number(double v);

std::string render_json(const Report& report);
std::string render_table(const Report& report);

}  // namespace natfx
