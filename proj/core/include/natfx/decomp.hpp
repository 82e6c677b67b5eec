#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "natfx/cfexpr.hpp"
#include "natfx/scm.hpp"

namespace natfx {

struct Term {
  int sign = 1;
  CfExpr expr;

  friend bool operator==(const Term&, const Term&) = default;
};

/// One outcome cell inside a bracketed contrast: p(e, x1, x2) where x_i is
/// either the fixed level m_i* or the summation index m_i.
struct CellTerm {
  int sign = 1;
  ExposureLevel exposure;
  bool m1_fixed = false;
  bool m2_fixed = false;
};

struct WeightTerm {
  int sign = 1;
  ExposureLevel exposure;
};

/// Sum over (m1, m2) of [sum_b s_b p(e_b, x_b)] * [sum_w s_w w_{e_w}(m1, m2)],
/// with w_e(m1, m2) = Pr(M1 = m1 | e) Pr(M2 = m2 | e, m1).
///
/// This is how the reference and mediated interaction effects are computed:
/// they mix fixed mediator levels with natural mediator distributions.
struct WeightedContrast {
  std::vector<CellTerm> bracket;
  std::vector<WeightTerm> weights;
};

enum class ComponentRole {
  Additive,   // part of the decomposition; these sum to TE
  Auxiliary,  // reported alongside (PDE, TDE, ...), not summed
  Total,
};

struct ComponentSpec {
  std::string name;
  ComponentRole role = ComponentRole::Additive;
  /// Signed counterfactual expansion (like terms combined).
  std::vector<Term> terms;
  std::optional<WeightedContrast> directive;
  /// True when some term fails the identifiability check; such specs cannot
  /// be evaluated.
  bool problematic = false;
  std::vector<IdentifiabilityVerdict> verdicts;  // one per term
};

struct Interval {
  double lower = 0;
  double upper = 0;
};

struct ComponentValue {
  std::string name;
  ComponentRole role = ComponentRole::Additive;
  double estimate = 0;
  std::optional<Interval> ci;
};

struct DecompositionResult {
  std::vector<ComponentValue> components;
  double te = 0;
  double sum_gap = 0;  // |sum of additive components - te|

  const ComponentValue& at(std::string_view name) const;  // throws InvalidArgument
  double value(std::string_view name) const { return at(name).estimate; }
  bool has(std::string_view name) const;

  /// Recomputes te (from the Total row) and sum_gap.
  void finalize();
};

/// Four-way single-mediator catalog: CDE, INT_ref, INT_med, PIE, then the
/// auxiliary NatINT, PDE, TDE, TIE, then TE. Needs q.m1_star.
std::vector<ComponentSpec> components_single(const Query& q);

/// Ten-component non-sequential catalog, auxiliary PDE, then TE.
std::vector<ComponentSpec> components_nonseq2(const Query& q);

/// Nine-component sequential catalog, auxiliary PDE, then TE.
std::vector<ComponentSpec> components_seq2(const Query& q);

/// Catalog for any supported scenario.
std::vector<ComponentSpec> components_for(const Scenario& scenario, const Query& q);

/// TDE and SIE_M1 (two mediators); empty for a single mediator.
std::vector<ComponentSpec> auxiliary_components(const Scenario& scenario);

/// Mediated interaction contrasts with identifiability flags. For a chain
/// this also carries the separated INT_ref-AM2 / INT_ref-AM1M2 pieces, which
/// are flagged.
std::vector<ComponentSpec> mediated_contrasts(const Query& q, const Scenario& scenario);

/// Builds a spec from a directive: expands it into signed formulas and
/// records identifiability verdicts.
ComponentSpec directive_spec(std::string name, ComponentRole role, WeightedContrast directive,
                             const Scenario& scenario);
/// Builds a spec from signed formulas.
ComponentSpec contrast_spec(std::string name, ComponentRole role, std::vector<Term> terms,
                            const Scenario& scenario);

/// Value of one component on a model. Throws EvaluationOfProblematicSpec for
/// flagged specs.
double evaluate_component(const DiscreteScm& model, const ComponentSpec& spec, const Query& q);

/// Exhaustive-enumeration value of a directive.
double evaluate_directive(const DiscreteScm& model, const WeightedContrast& d, const Query& q);

/// Evaluates the scenario catalog on a model.
DecompositionResult decompose(const DiscreteScm& model, const Query& q);
DecompositionResult evaluate(const DiscreteScm& model, const std::vector<ComponentSpec>& specs,
                             const Query& q);

/// p11 - p01 - p10 + p00 for a 2x2 table indexed [exposure][mediator].
/// Throws InvalidArgument if a cell is missing.
double additive_interaction(const std::vector<std::vector<double>>& cells);

std::string_view role_name(ComponentRole role);

}  // namespace natfx
