#include "natfx/cfexpr.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "natfx/errors.hpp"

namespace natfx {

Scenario Scenario::non_sequential(std::size_t k) {
  if (k < 1) throw InvalidArgument("non-sequential scenario needs at least one mediator");
  if (k == 1) return single();
  return Scenario(ScenarioKind::NonSequential, k);
}

Scenario Scenario::chain(std::size_t k) {
  if (k < 1) throw InvalidArgument("chain scenario needs at least one mediator");
  if (k == 1) return single();
  return Scenario(ScenarioKind::OnePathChain, k);
}

namespace {

std::optional<std::size_t> parse_count(std::string_view digits) {
  if (digits.empty()) return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

}  // namespace

Scenario Scenario::parse(std::string_view name) {
  if (name == "single") return single();
  if (name.starts_with("nonseq")) {
    if (auto k = parse_count(name.substr(6)); k && *k >= 1) return non_sequential(*k);
  } else if (name.starts_with("seq")) {
    if (auto k = parse_count(name.substr(3)); k && *k >= 1) return chain(*k);
  }
  throw InvalidArgument("unknown scenario '" + std::string(name) +
                        "' (expected single, nonseq2 or seq2)");
}

std::string Scenario::name() const {
  switch (kind_) {
    case ScenarioKind::SingleMediator: return "single";
    case ScenarioKind::NonSequential: return "nonseq" + std::to_string(k_);
    case ScenarioKind::OnePathChain: return "seq" + std::to_string(k_);
  }
  return {};
}

std::string ExposureLevel::text() const {
  switch (tag) {
    case Tag::Treatment: return "a";
    case Tag::Reference: return "a*";
    case Tag::Named: return label;
  }
  return {};
}

MediatorSpec MediatorSpec::fixed(std::size_t index) {
  return fixed_label_of("m" + std::to_string(index) + "*", index);
}

MediatorSpec MediatorSpec::fixed_label_of(std::string label, std::size_t index) {
  MediatorSpec s;
  s.kind = Kind::Fixed;
  s.index = index;
  s.fixed_label = std::move(label);
  return s;
}

MediatorSpec MediatorSpec::counterfactual(std::size_t index, ExposureLevel exposure,
                                          std::vector<MediatorSpec> parents) {
  MediatorSpec s;
  s.kind = Kind::Counterfactual;
  s.index = index;
  s.exposure = std::move(exposure);
  s.parents = std::move(parents);
  return s;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.';
}

/// Recursive-descent parser over the raw text; tokens are words (with any
/// trailing '*'), '(' , ')' and ','.
class Parser {
 public:
  Parser(std::string_view text, const Scenario& scenario) : text_(text), scenario_(scenario) {}

  CfExpr parse() {
    skip_ws();
    auto start = pos_;
    auto head = word();
    if (head != "Y") throw SyntaxError(start, "formula must start with 'Y'");
    expect('(');
    CfExpr expr;
    expr.exposure = exposure();
    std::size_t slot = 0;
    while (accept(',')) {
      ++slot;
      expr.mediators.push_back(mediator(slot));
    }
    expect(')');
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected trailing input");
    if (expr.mediators.size() != scenario_.mediators()) {
      throw ArityError("Y takes " + std::to_string(scenario_.mediators()) +
                       " mediator argument(s) in scenario " + scenario_.name() + ", got " +
                       std::to_string(expr.mediators.size()));
    }
    return expr;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      std::string found = pos_ < text_.size() ? std::string("'") + text_[pos_] + "'" : "end of input";
      throw SyntaxError(pos_, std::string("expected '") + c + "', found " + found);
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string word() {
    skip_ws();
    auto start = pos_;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
    if (pos_ == start) {
      std::string found = pos_ < text_.size() ? std::string("'") + text_[pos_] + "'" : "end of input";
      throw SyntaxError(pos_, "expected a symbol, found " + found);
    }
    while (pos_ < text_.size() && text_[pos_] == '*') ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  ExposureLevel exposure() {
    auto start = pos_;
    auto w = word();
    if (w == "a") return ExposureLevel::treatment();
    if (w == "a*") return ExposureLevel::reference();
    if (w == "Y" || mediator_index(w)) {
      throw SyntaxError(start, "'" + w + "' is reserved and cannot name an exposure level");
    }
    return ExposureLevel::named(std::move(w));
  }

  // "M<k>" or bare "M" (only in the single-mediator scenario).
  std::optional<std::size_t> mediator_index(const std::string& w) const {
    if (w.empty() || w[0] != 'M') return std::nullopt;
    if (w == "M") return std::size_t{1};
    return parse_count(std::string_view(w).substr(1));
  }

  // "m<k>*"
  static std::optional<std::size_t> fixed_index(const std::string& w) {
    if (w.size() < 3 || w[0] != 'm' || w.back() != '*') return std::nullopt;
    auto digits = std::string_view(w).substr(1, w.size() - 2);
    return parse_count(digits);
  }

  MediatorSpec mediator(std::size_t expected) {
    skip_ws();
    auto start = pos_;
    auto w = word();
    if (auto idx = mediator_index(w)) {
      if (w == "M" && scenario_.mediators() != 1) {
        throw UnknownMediatorIndex("bare 'M' is only valid with a single mediator");
      }
      if (!peek('(')) throw SyntaxError(pos_, "expected '(' after " + w);
      check_index(*idx, expected, w);
      expect('(');
      auto e = exposure();
      // In a chain, M_i's only parent is M_{i-1}.
      std::size_t want = (scenario_.nests() && *idx > 1) ? 1 : 0;
      auto arity = [&](std::size_t got) {
        return ArityError("M" + std::to_string(*idx) + " takes " + std::to_string(want) +
                          " parent mediator(s) in scenario " + scenario_.name() + ", got " +
                          std::to_string(got));
      };
      std::vector<MediatorSpec> parents;
      while (accept(',')) {
        if (parents.size() == want) throw arity(parents.size() + 1);
        parents.push_back(mediator(*idx - 1));
      }
      expect(')');
      if (parents.size() != want) throw arity(parents.size());
      return MediatorSpec::counterfactual(*idx, std::move(e), std::move(parents));
    }
    if (w == "Y") throw SyntaxError(start, "'Y' cannot appear as a mediator value");
    if (auto idx = fixed_index(w)) {
      check_index(*idx, expected, w);
      return MediatorSpec::fixed_label_of(std::move(w), *idx);
    }
    return MediatorSpec::fixed_label_of(std::move(w), expected);
  }

  void check_index(std::size_t idx, std::size_t expected, const std::string& w) const {
    if (idx < 1 || idx > scenario_.mediators()) {
      throw UnknownMediatorIndex("'" + w + "' refers to mediator " + std::to_string(idx) +
                                 " but scenario " + scenario_.name() + " has " +
                                 std::to_string(scenario_.mediators()));
    }
    if (idx != expected) {
      throw UnknownMediatorIndex("'" + w + "' found where M" + std::to_string(expected) +
                                 " was expected");
    }
  }

  std::string_view text_;
  const Scenario& scenario_;
  std::size_t pos_ = 0;
};

}  // namespace

CfExpr parse_cf(std::string_view text, const Scenario& scenario) {
  return Parser(text, scenario).parse();
}

// ---------------------------------------------------------------------------
// Printing

std::string format_spec(const MediatorSpec& spec) {
  if (spec.is_fixed()) return spec.fixed_label;
  std::string out = "M" + std::to_string(spec.index) + "(" + spec.exposure.text();
  for (const auto& p : spec.parents) out += ", " + format_spec(p);
  out += ")";
  return out;
}

std::string format_cf(const CfExpr& expr) {
  std::string out = "Y(" + expr.exposure.text();
  for (const auto& m : expr.mediators) out += ", " + format_spec(m);
  out += ")";
  return out;
}

// ---------------------------------------------------------------------------
// Shape checks

namespace {

void validate_spec(const MediatorSpec& spec, std::size_t expected, const Scenario& scenario) {
  if (spec.index != expected) {
    throw UnknownMediatorIndex(format_spec(spec) + " found where M" + std::to_string(expected) +
                               " was expected");
  }
  if (spec.is_fixed()) {
    if (!spec.parents.empty()) throw ArityError("fixed level carries parents");
    return;
  }
  std::size_t want = (scenario.nests() && expected > 1) ? 1 : 0;
  if (spec.parents.size() != want) {
    throw ArityError(format_spec(spec) + " needs " + std::to_string(want) +
                     " parent mediator(s) in scenario " + scenario.name());
  }
  if (want == 1) validate_spec(spec.parents.front(), expected - 1, scenario);
}

}  // namespace

void validate_cf(const CfExpr& expr, const Scenario& scenario) {
  if (expr.mediators.size() != scenario.mediators()) {
    throw ArityError("formula has " + std::to_string(expr.mediators.size()) +
                     " mediator slot(s); scenario " + scenario.name() + " has " +
                     std::to_string(scenario.mediators()));
  }
  for (std::size_t i = 0; i < expr.mediators.size(); ++i) {
    validate_spec(expr.mediators[i], i + 1, scenario);
  }
}

CfExpr natural_formula(const Scenario& scenario, ExposureLevel y,
                       const std::vector<ExposureLevel>& mediator_exposures) {
  if (mediator_exposures.size() != scenario.mediators()) {
    throw ArityError("natural_formula: one exposure per mediator is required");
  }
  CfExpr expr;
  expr.exposure = std::move(y);
  for (std::size_t i = 0; i < mediator_exposures.size(); ++i) {
    std::vector<MediatorSpec> parents;
    if (scenario.nests() && i > 0) parents.push_back(expr.mediators[i - 1]);
    expr.mediators.push_back(
        MediatorSpec::counterfactual(i + 1, mediator_exposures[i], std::move(parents)));
  }
  return expr;
}

// ---------------------------------------------------------------------------
// Identifiability

namespace {

void collect(const MediatorSpec& spec, std::vector<std::vector<MediatorSpec>>& seen) {
  if (spec.index >= 1 && spec.index <= seen.size()) {
    auto& bucket = seen[spec.index - 1];
    bool present = false;
    for (const auto& s : bucket) {
      if (s == spec) {
        present = true;
        break;
      }
    }
    if (!present) bucket.push_back(spec);
  }
  for (const auto& p : spec.parents) collect(p, seen);
}

}  // namespace

IdentifiabilityVerdict check_identifiability(const CfExpr& expr, const Scenario& scenario) {
  std::vector<std::vector<MediatorSpec>> seen(scenario.mediators());
  for (const auto& m : expr.mediators) collect(m, seen);

  IdentifiabilityVerdict verdict;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i].size() > 1) verdict.conflicts.push_back({i + 1, seen[i]});
  }
  if (!verdict.conflicts.empty()) verdict.status = IdentifiabilityVerdict::Status::Problematic;
  return verdict;
}

}  // namespace natfx
