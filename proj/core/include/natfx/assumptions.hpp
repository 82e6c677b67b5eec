#pragma once

#include <string>
#include <vector>

#include "natfx/cfexpr.hpp"

namespace natfx {

/// No-confounding conditions the causal reading of a decomposition rests on.
/// They cannot be checked from data; reports state them and whether the user
/// acknowledged them.
struct Assumption {
  std::string id;         // "A'1", "A1", ...
  std::string statement;  // conditional independence
  std::string meaning;
  bool acknowledged = false;
};

struct AssumptionLedger {
  std::string scenario;
  std::vector<Assumption> entries;
};

/// A'1-A'4 for one mediator, A1-A6 for two (the same list is used for the
/// non-sequential case).
AssumptionLedger assumption_ledger(const Scenario& scenario, bool acknowledged = false);

}  // namespace natfx
