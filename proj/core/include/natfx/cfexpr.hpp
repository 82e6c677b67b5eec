#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace natfx {

enum class ScenarioKind { SingleMediator, NonSequential, OnePathChain };

/// Mediator structure a formula is written against.
///
/// SingleMediator always has k = 1. OnePathChain(k) has edges M_i -> M_{i+1}
/// and nothing else between mediators; NonSequential(k) has no
/// mediator-to-mediator edges.
class Scenario {
 public:
  static Scenario single() { return Scenario(ScenarioKind::SingleMediator, 1); }
  static Scenario non_sequential(std::size_t k);
  static Scenario chain(std::size_t k);

  /// Accepts "single", "nonseq2", "seq2" and the general "nonseqK" / "seqK".
  static Scenario parse(std::string_view name);

  ScenarioKind kind() const noexcept { return kind_; }
  std::size_t mediators() const noexcept { return k_; }
  bool nests() const noexcept { return kind_ == ScenarioKind::OnePathChain; }

  /// Short name: "single", "nonseq2", "seq2", ...
  std::string name() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  Scenario(ScenarioKind kind, std::size_t k) : kind_(kind), k_(k) {}
  ScenarioKind kind_;
  std::size_t k_;
};

/// Exposure symbol: `a`, `a*`, or an opaque named level such as `a**`.
struct ExposureLevel {
  enum class Tag { Treatment, Reference, Named };

  Tag tag = Tag::Treatment;
  std::string label;  // only meaningful for Named

  static ExposureLevel treatment() { return {Tag::Treatment, {}}; }
  static ExposureLevel reference() { return {Tag::Reference, {}}; }
  static ExposureLevel named(std::string label) { return {Tag::Named, std::move(label)}; }

  std::string text() const;

  friend bool operator==(const ExposureLevel&, const ExposureLevel&) = default;
  friend auto operator<=>(const ExposureLevel&, const ExposureLevel&) = default;
};

/// Value slot for one mediator: either a fixed level (m1*, or an opaque
/// label) or a nested counterfactual M_i(exposure, parents...).
struct MediatorSpec {
  enum class Kind { Fixed, Counterfactual };

  Kind kind = Kind::Counterfactual;
  std::size_t index = 0;  // 1-based mediator index; 0 for an opaque fixed label
  std::string fixed_label;
  ExposureLevel exposure;
  std::vector<MediatorSpec> parents;

  static MediatorSpec fixed(std::size_t index);
  static MediatorSpec fixed_label_of(std::string label, std::size_t index = 0);
  static MediatorSpec counterfactual(std::size_t index, ExposureLevel exposure,
                                     std::vector<MediatorSpec> parents = {});

  bool is_fixed() const noexcept { return kind == Kind::Fixed; }

  friend bool operator==(const MediatorSpec&, const MediatorSpec&) = default;
};

/// Y(exposure, spec_1, ..., spec_k).
struct CfExpr {
  ExposureLevel exposure;
  std::vector<MediatorSpec> mediators;

  friend bool operator==(const CfExpr&, const CfExpr&) = default;
};

/// Parses `text` against `scenario`. Whitespace is insignificant.
/// Throws SyntaxError, ArityError or UnknownMediatorIndex.
CfExpr parse_cf(std::string_view text, const Scenario& scenario);

/// Canonical text with a single space after each comma.
std::string format_cf(const CfExpr& expr);
std::string format_spec(const MediatorSpec& spec);

/// Checks shape against the scenario (slot count, slot indices, parent arity).
void validate_cf(const CfExpr& expr, const Scenario& scenario);

/// Builder for the common chain-shaped formula
/// Y(y, M1(e1), M2(e2, M1(e1)), ..., Mk(ek, M_{k-1}(...))) in a chain, or
/// Y(y, M1(e1), ..., Mk(ek)) otherwise.
CfExpr natural_formula(const Scenario& scenario, ExposureLevel y,
                       const std::vector<ExposureLevel>& mediator_exposures);

struct MediatorConflict {
  std::size_t mediator = 0;          // 1-based
  std::vector<MediatorSpec> specs;   // distinct occurrences, first-seen order
};

struct IdentifiabilityVerdict {
  enum class Status { Identifiable, Problematic };

  Status status = Status::Identifiable;
  std::vector<MediatorConflict> conflicts;

  bool identifiable() const noexcept { return status == Status::Identifiable; }
};

/// Kite-graph rule: every occurrence of M_i anywhere in the formula (its own
/// slot and nested as a parent of later mediators) must be the same spec.
IdentifiabilityVerdict check_identifiability(const CfExpr& expr, const Scenario& scenario);

}  // namespace natfx
