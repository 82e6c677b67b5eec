#include "natfx/decomp.hpp"

#include <algorithm>
#include <cmath>

#include "natfx/errors.hpp"

namespace natfx {

// ---------------------------------------------------------------------------
// Results

const ComponentValue& DecompositionResult::at(std::string_view name) const {
  for (const auto& c : components) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("no component named '" + std::string(name) + "'");
}

bool DecompositionResult::has(std::string_view name) const {
  return std::any_of(components.begin(), components.end(),
                     [&](const ComponentValue& c) { return c.name == name; });
}

void DecompositionResult::finalize() {
  double sum = 0;
  bool found = false;
  for (const auto& c : components) {
    if (c.role == ComponentRole::Additive) sum += c.estimate;
    if (c.role == ComponentRole::Total) {
      te = c.estimate;
      found = true;
    }
  }
  sum_gap = found ? std::abs(sum - te) : 0.0;
}

std::string_view role_name(ComponentRole role) {
  switch (role) {
    case ComponentRole::Additive: return "additive";
    case ComponentRole::Auxiliary: return "auxiliary";
    case ComponentRole::Total: return "total";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Spec construction

namespace {

const ExposureLevel kA = ExposureLevel::treatment();
const ExposureLevel kAs = ExposureLevel::reference();

CfExpr natural(const Scenario& sc, const ExposureLevel& y, const ExposureLevel& e1,
               const ExposureLevel& e2) {
  return natural_formula(sc, y, {e1, e2});
}

CfExpr natural1(const ExposureLevel& y, const ExposureLevel& e) {
  return natural_formula(Scenario::single(), y, {e});
}

CfExpr all_fixed(const Scenario& sc, const ExposureLevel& y) {
  CfExpr e;
  e.exposure = y;
  for (std::size_t i = 1; i <= sc.mediators(); ++i) e.mediators.push_back(MediatorSpec::fixed(i));
  return e;
}

std::vector<Term> expand(const WeightedContrast& d, const Scenario& sc) {
  std::vector<Term> out;
  auto add = [&](int sign, CfExpr expr) {
    for (auto& t : out) {
      if (t.expr == expr) {
        t.sign += sign;
        return;
      }
    }
    out.push_back({sign, std::move(expr)});
  };
  for (const auto& b : d.bracket) {
    for (const auto& w : d.weights) {
      CfExpr e;
      e.exposure = b.exposure;
      e.mediators.push_back(b.m1_fixed ? MediatorSpec::fixed(1)
                                       : MediatorSpec::counterfactual(1, w.exposure));
      if (sc.mediators() == 2) {
        if (b.m2_fixed) {
          e.mediators.push_back(MediatorSpec::fixed(2));
        } else {
          std::vector<MediatorSpec> parents;
          if (sc.nests()) parents.push_back(MediatorSpec::counterfactual(1, w.exposure));
          e.mediators.push_back(MediatorSpec::counterfactual(2, w.exposure, std::move(parents)));
        }
      }
      add(b.sign * w.sign, std::move(e));
    }
  }
  std::erase_if(out, [](const Term& t) { return t.sign == 0; });
  return out;
}

void record_verdicts(ComponentSpec& spec, const Scenario& sc) {
  spec.verdicts.clear();
  spec.problematic = false;
  for (const auto& t : spec.terms) {
    validate_cf(t.expr, sc);
    auto v = check_identifiability(t.expr, sc);
    if (!v.identifiable()) spec.problematic = true;
    spec.verdicts.push_back(std::move(v));
  }
}

void require_m1(const Query& q) {
  if (!q.m1_star) throw MissingFixedLevel("this decomposition needs m1* (fixed level of M1)");
}

void require_m2(const Query& q) {
  if (!q.m2_star) throw MissingFixedLevel("this decomposition needs m2* (fixed level of M2)");
}

// Bracketed contrasts shared by the two-mediator catalogs. Flags are
// (m1 fixed, m2 fixed).
std::vector<CellTerm> bracket_am1() {
  return {{+1, kA, false, true}, {-1, kA, true, true}, {-1, kAs, false, true}, {+1, kAs, true, true}};
}
std::vector<CellTerm> bracket_am2() {
  return {{+1, kA, true, false}, {-1, kA, true, true}, {-1, kAs, true, false}, {+1, kAs, true, true}};
}
std::vector<CellTerm> bracket_am1m2() {
  return {{+1, kA, false, false}, {-1, kA, false, true},  {-1, kA, true, false},
          {-1, kAs, false, false}, {+1, kAs, true, false}, {+1, kAs, false, true},
          {+1, kA, true, true},   {-1, kAs, true, true}};
}
std::vector<CellTerm> bracket_am2_am1m2() {
  return {{+1, kA, false, false}, {-1, kA, false, true}, {-1, kAs, false, false}, {+1, kAs, false, true}};
}

const std::vector<WeightTerm> kRefWeights = {{+1, kAs}};
const std::vector<WeightTerm> kMedWeights = {{+1, kA}, {-1, kAs}};

// Shared by both two-mediator catalogs: NatINTs and PIEs per the W
// indexing W(y, e1, e2) = Y(y, M1(e1), M2(e2[, M1(e1)])).
std::vector<ComponentSpec> natural_block(const Scenario& sc) {
  auto W = [&](const ExposureLevel& y, const ExposureLevel& e1, const ExposureLevel& e2) {
    return natural(sc, y, e1, e2);
  };
  auto A = ComponentRole::Additive;
  std::vector<ComponentSpec> out;
  out.push_back(contrast_spec("NatINT_AM1", A,
                              {{+1, W(kA, kA, kAs)}, {-1, W(kAs, kA, kAs)},
                               {-1, W(kA, kAs, kAs)}, {+1, W(kAs, kAs, kAs)}},
                              sc));
  out.push_back(contrast_spec("NatINT_AM2", A,
                              {{+1, W(kA, kAs, kA)}, {-1, W(kAs, kAs, kA)},
                               {-1, W(kA, kAs, kAs)}, {+1, W(kAs, kAs, kAs)}},
                              sc));
  out.push_back(contrast_spec("NatINT_AM1M2", A,
                              {{+1, W(kA, kA, kA)}, {-1, W(kA, kA, kAs)}, {-1, W(kA, kAs, kA)},
                               {-1, W(kAs, kA, kA)}, {+1, W(kAs, kAs, kA)}, {+1, W(kAs, kA, kAs)},
                               {+1, W(kA, kAs, kAs)}, {-1, W(kAs, kAs, kAs)}},
                              sc));
  out.push_back(contrast_spec("NatINT_M1M2", A,
                              {{+1, W(kAs, kA, kA)}, {-1, W(kAs, kAs, kA)},
                               {-1, W(kAs, kA, kAs)}, {+1, W(kAs, kAs, kAs)}},
                              sc));
  out.push_back(contrast_spec("PDE", ComponentRole::Auxiliary,
                              {{+1, W(kA, kAs, kAs)}, {-1, W(kAs, kAs, kAs)}}, sc));
  out.push_back(
      contrast_spec("PIE_M1", A, {{+1, W(kAs, kA, kAs)}, {-1, W(kAs, kAs, kAs)}}, sc));
  out.push_back(
      contrast_spec("PIE_M2", A, {{+1, W(kAs, kAs, kA)}, {-1, W(kAs, kAs, kAs)}}, sc));
  out.push_back(contrast_spec("TE", ComponentRole::Total,
                              {{+1, W(kA, kA, kA)}, {-1, W(kAs, kAs, kAs)}}, sc));
  return out;
}

ComponentSpec cde_spec(const Scenario& sc) {
  return contrast_spec("CDE", ComponentRole::Additive,
                       {{+1, all_fixed(sc, kA)}, {-1, all_fixed(sc, kAs)}}, sc);
}

}  // namespace

ComponentSpec contrast_spec(std::string name, ComponentRole role, std::vector<Term> terms,
                            const Scenario& scenario) {
  ComponentSpec s;
  s.name = std::move(name);
  s.role = role;
  s.terms = std::move(terms);
  record_verdicts(s, scenario);
  return s;
}

ComponentSpec directive_spec(std::string name, ComponentRole role, WeightedContrast directive,
                             const Scenario& scenario) {
  ComponentSpec s;
  s.name = std::move(name);
  s.role = role;
  s.terms = expand(directive, scenario);
  s.directive = std::move(directive);
  record_verdicts(s, scenario);
  return s;
}

std::vector<ComponentSpec> components_single(const Query& q) {
  require_m1(q);
  const auto sc = Scenario::single();
  auto A = ComponentRole::Additive;
  auto X = ComponentRole::Auxiliary;
  // Flags for one mediator: (m fixed, unused).
  std::vector<CellTerm> interaction = {
      {+1, kA, false, false}, {-1, kAs, false, false}, {-1, kA, true, false}, {+1, kAs, true, false}};
  std::vector<ComponentSpec> out;
  out.push_back(cde_spec(sc));
  out.push_back(directive_spec("INT_ref", A, {interaction, kRefWeights}, sc));
  out.push_back(directive_spec("INT_med", A, {interaction, kMedWeights}, sc));
  out.push_back(directive_spec("PIE", A, {{{+1, kAs, false, false}, {-1, kAs, true, false}}, kMedWeights}, sc));
  out.push_back(contrast_spec("NatINT_AM", X,
                              {{+1, natural1(kA, kA)}, {-1, natural1(kAs, kA)},
                               {-1, natural1(kA, kAs)}, {+1, natural1(kAs, kAs)}},
                              sc));
  out.push_back(contrast_spec("PDE", X, {{+1, natural1(kA, kAs)}, {-1, natural1(kAs, kAs)}}, sc));
  out.push_back(contrast_spec("TDE", X, {{+1, natural1(kA, kA)}, {-1, natural1(kAs, kA)}}, sc));
  out.push_back(contrast_spec("TIE", X, {{+1, natural1(kA, kA)}, {-1, natural1(kA, kAs)}}, sc));
  out.push_back(contrast_spec("TE", ComponentRole::Total,
                              {{+1, natural1(kA, kA)}, {-1, natural1(kAs, kAs)}}, sc));
  return out;
}

std::vector<ComponentSpec> components_nonseq2(const Query& q) {
  require_m1(q);
  require_m2(q);
  const auto sc = Scenario::non_sequential(2);
  auto A = ComponentRole::Additive;
  std::vector<ComponentSpec> out;
  out.push_back(cde_spec(sc));
  out.push_back(directive_spec("INT_ref-AM1", A, {bracket_am1(), kRefWeights}, sc));
  out.push_back(directive_spec("INT_ref-AM2", A, {bracket_am2(), kRefWeights}, sc));
  out.push_back(directive_spec("INT_ref-AM1M2", A, {bracket_am1m2(), kRefWeights}, sc));
  for (auto& s : natural_block(sc)) out.push_back(std::move(s));
  return out;
}

std::vector<ComponentSpec> components_seq2(const Query& q) {
  require_m1(q);
  require_m2(q);
  const auto sc = Scenario::chain(2);
  auto A = ComponentRole::Additive;
  std::vector<ComponentSpec> out;
  out.push_back(cde_spec(sc));
  out.push_back(directive_spec("INT_ref-AM1", A, {bracket_am1(), kRefWeights}, sc));
  out.push_back(directive_spec("INT_ref-AM2+AM1M2", A, {bracket_am2_am1m2(), kRefWeights}, sc));
  for (auto& s : natural_block(sc)) out.push_back(std::move(s));
  return out;
}

std::vector<ComponentSpec> components_for(const Scenario& scenario, const Query& q) {
  if (scenario.mediators() == 1) return components_single(q);
  if (scenario.mediators() != 2) {
    throw InvalidArgument("decomposition catalogs exist for one or two mediators only");
  }
  return scenario.nests() ? components_seq2(q) : components_nonseq2(q);
}

std::vector<ComponentSpec> auxiliary_components(const Scenario& scenario) {
  if (scenario.mediators() != 2) return {};
  auto W = [&](const ExposureLevel& y, const ExposureLevel& e1, const ExposureLevel& e2) {
    return natural(scenario, y, e1, e2);
  };
  auto X = ComponentRole::Auxiliary;
  return {contrast_spec("TDE", X, {{+1, W(kA, kA, kA)}, {-1, W(kAs, kA, kA)}}, scenario),
          contrast_spec("SIE_M1", X, {{+1, W(kAs, kA, kA)}, {-1, W(kAs, kAs, kA)}}, scenario)};
}

std::vector<ComponentSpec> mediated_contrasts(const Query& q, const Scenario& scenario) {
  auto A = ComponentRole::Additive;
  if (scenario.mediators() == 1) {
    require_m1(q);
    std::vector<CellTerm> interaction = {{+1, kA, false, false}, {-1, kAs, false, false},
                                         {-1, kA, true, false},  {+1, kAs, true, false}};
    return {directive_spec("INT_med", A, {interaction, kMedWeights}, scenario)};
  }
  if (scenario.mediators() != 2) {
    throw InvalidArgument("mediated contrasts exist for one or two mediators only");
  }
  std::vector<ComponentSpec> out;
  if (q.m2_star) out.push_back(directive_spec("INT_med-AM1", A, {bracket_am1(), kMedWeights}, scenario));
  if (q.m1_star) out.push_back(directive_spec("INT_med-AM2", A, {bracket_am2(), kMedWeights}, scenario));
  if (q.m1_star && q.m2_star) {
    out.push_back(directive_spec("INT_med-AM1M2", A, {bracket_am1m2(), kMedWeights}, scenario));
  }
  if (scenario.nests() && q.m1_star && q.m2_star) {
    out.push_back(directive_spec("INT_ref-AM2", A, {bracket_am2(), kRefWeights}, scenario));
    out.push_back(directive_spec("INT_ref-AM1M2", A, {bracket_am1m2(), kRefWeights}, scenario));
  }
  if (out.empty()) throw MissingFixedLevel("mediated contrasts need m1* and/or m2*");
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

double evaluate_directive(const DiscreteScm& model, const WeightedContrast& d, const Query& q) {
  const bool two = model.scenario().mediators() == 2;
  std::size_t f1 = 0, f2 = 0;
  bool need1 = false, need2 = false;
  for (const auto& b : d.bracket) {
    need1 = need1 || b.m1_fixed;
    need2 = need2 || (two && b.m2_fixed);
  }
  if (need1) f1 = resolve_fixed(model, MediatorSpec::fixed(1), q);
  if (need2) f2 = resolve_fixed(model, MediatorSpec::fixed(2), q);

  std::vector<std::size_t> eb, ew;
  for (const auto& b : d.bracket) eb.push_back(resolve_exposure(model, b.exposure, q));
  for (const auto& w : d.weights) ew.push_back(resolve_exposure(model, w.exposure, q));

  const std::size_t n1 = model.m1_size(), n2 = model.m2_size();
  double total = 0;
  for (std::size_t m1 = 0; m1 < n1; ++m1) {
    for (std::size_t m2 = 0; m2 < n2; ++m2) {
      double bracket = 0;
      for (std::size_t i = 0; i < d.bracket.size(); ++i) {
        const auto& b = d.bracket[i];
        std::size_t x1 = b.m1_fixed ? f1 : m1;
        std::size_t x2 = (two && b.m2_fixed) ? f2 : m2;
        bracket += b.sign * model.ymean(eb[i], x1, x2);
      }
      double weight = 0;
      for (std::size_t i = 0; i < d.weights.size(); ++i) {
        weight += d.weights[i].sign * model.pm1(ew[i], m1) * model.pm2(ew[i], m1, m2);
      }
      total += bracket * weight;
    }
  }
  return total;
}

double evaluate_component(const DiscreteScm& model, const ComponentSpec& spec, const Query& q) {
  if (spec.problematic) {
    std::string bad;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
      if (!spec.verdicts[i].identifiable()) {
        bad = format_cf(spec.terms[i].expr);
        break;
      }
    }
    throw EvaluationOfProblematicSpec(spec.name + " contains the non-identifiable formula " + bad);
  }
  if (spec.directive) return evaluate_directive(model, *spec.directive, q);
  double total = 0;
  for (const auto& t : spec.terms) total += t.sign * eval_expectation(model, t.expr, q);
  return total;
}

DecompositionResult evaluate(const DiscreteScm& model, const std::vector<ComponentSpec>& specs,
                             const Query& q) {
  DecompositionResult r;
  for (const auto& s : specs) {
    r.components.push_back({s.name, s.role, evaluate_component(model, s, q), std::nullopt});
  }
  r.finalize();
  return r;
}

DecompositionResult decompose(const DiscreteScm& model, const Query& q) {
  return evaluate(model, components_for(model.scenario(), q), q);
}

double additive_interaction(const std::vector<std::vector<double>>& cells) {
  if (cells.size() != 2 || cells[0].size() != 2 || cells[1].size() != 2) {
    throw InvalidArgument("additive interaction needs a complete 2x2 table of cell means");
  }
  return cells[1][1] - cells[0][1] - cells[1][0] + cells[0][0];
}

}  // namespace natfx
