#include "natfx/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "natfx/errors.hpp"
#include "natfx/rng.hpp"

namespace natfx {

namespace {

constexpr double kProbTol = 1e-12;

std::optional<std::size_t> find_label(const std::vector<std::string>& labels, std::string_view s) {
  auto it = std::find(labels.begin(), labels.end(), s);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

void check_levels(const std::vector<std::string>& labels, const char* what) {
  if (labels.empty()) throw InvalidModel(std::string("no levels declared for ") + what);
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw InvalidModel(std::string("duplicate level in ") + what);
}

// Validates one conditional distribution in place.
void normalize_row(double* row, std::size_t n, const std::string& where) {
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(row[i])) throw InvalidModel(where + ": non-finite probability");
    if (row[i] < 0) throw InvalidModel(where + ": negative probability");
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", sum);
    throw InvalidModel(where + ": probabilities sum to " + buf + ", not 1");
  }
  for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

template <typename T>
void expect_size(const std::vector<T>& v, std::size_t n, const std::string& what) {
  if (v.size() != n) {
    throw InvalidModel(what + " has " + std::to_string(v.size()) + " entries, expected " +
                       std::to_string(n));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

DiscreteScm DiscreteScm::single(ScmLevels levels, const Mat& pm1, const Mat& ymean) {
  DiscreteScm m;
  m.scenario_ = Scenario::single();
  levels.m2.clear();
  m.levels_ = std::move(levels);
  m.n1_ = m.levels_.m1.size();
  m.n2_ = 1;
  const auto na = m.levels_.exposure.size();
  expect_size(pm1, na, "pm1");
  expect_size(ymean, na, "ymean");
  for (std::size_t a = 0; a < na; ++a) {
    expect_size(pm1[a], m.n1_, "pm1 row");
    expect_size(ymean[a], m.n1_, "ymean row");
    for (std::size_t i = 0; i < m.n1_; ++i) {
      m.pm1_.push_back(pm1[a][i]);
      m.pm2_.push_back(1.0);
      m.y_.push_back(ymean[a][i]);
    }
  }
  m.validate_and_normalize();
  return m;
}

DiscreteScm DiscreteScm::sequential(ScmLevels levels, const Mat& pm1, const Cube& pm2,
                                    const Cube& ymean) {
  DiscreteScm m;
  m.scenario_ = Scenario::chain(2);
  m.levels_ = std::move(levels);
  m.n1_ = m.levels_.m1.size();
  m.n2_ = m.levels_.m2.size();
  const auto na = m.levels_.exposure.size();
  expect_size(pm1, na, "pm1");
  expect_size(pm2, na, "pm2");
  expect_size(ymean, na, "ymean");
  for (std::size_t a = 0; a < na; ++a) {
    expect_size(pm1[a], m.n1_, "pm1 row");
    expect_size(pm2[a], m.n1_, "pm2 block");
    expect_size(ymean[a], m.n1_, "ymean block");
    for (std::size_t i = 0; i < m.n1_; ++i) {
      m.pm1_.push_back(pm1[a][i]);
      expect_size(pm2[a][i], m.n2_, "pm2 row");
      expect_size(ymean[a][i], m.n2_, "ymean row");
      for (std::size_t j = 0; j < m.n2_; ++j) {
        m.pm2_.push_back(pm2[a][i][j]);
        m.y_.push_back(ymean[a][i][j]);
      }
    }
  }
  m.validate_and_normalize();
  return m;
}

DiscreteScm DiscreteScm::non_sequential(ScmLevels levels, const Mat& pm1, const Mat& pm2,
                                        const Cube& ymean) {
  const auto na = levels.exposure.size();
  expect_size(pm2, na, "pm2");
  Cube wide(na);
  for (std::size_t a = 0; a < na; ++a) wide[a].assign(levels.m1.size(), pm2[a]);
  auto m = sequential(std::move(levels), pm1, wide, ymean);
  m.scenario_ = Scenario::non_sequential(2);
  return m;
}

void DiscreteScm::validate_and_normalize() {
  check_levels(levels_.exposure, "A");
  check_levels(levels_.m1, "M1");
  if (scenario_.mediators() == 2) check_levels(levels_.m2, "M2");
  const auto na = levels_.exposure.size();
  for (std::size_t a = 0; a < na; ++a) {
    normalize_row(&pm1_[a * n1_], n1_, "pm1[A=" + levels_.exposure[a] + "]");
    for (std::size_t i = 0; i < n1_; ++i) {
      normalize_row(&pm2_[(a * n1_ + i) * n2_], n2_,
                    "pm2[A=" + levels_.exposure[a] + ", M1=" + levels_.m1[i] + "]");
    }
  }
  for (double y : y_) {
    if (!std::isfinite(y)) throw InvalidModel("non-finite outcome mean");
  }
}

std::optional<std::size_t> DiscreteScm::find_exposure(std::string_view label) const {
  return find_label(levels_.exposure, label);
}
std::optional<std::size_t> DiscreteScm::find_m1(std::string_view label) const {
  return find_label(levels_.m1, label);
}
std::optional<std::size_t> DiscreteScm::find_m2(std::string_view label) const {
  return find_label(levels_.m2, label);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using json = nlohmann::json;

std::string level_text(const json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InvalidModel(std::string("levels of ") + what + " must be strings or integers");
}

std::vector<std::string> read_levels(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw InvalidModel(std::string("levels.") + key + " must be an array");
  }
  std::vector<std::string> out;
  for (const auto& v : j[key]) out.push_back(level_text(v, key));
  return out;
}

const json& child(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidModel(where + ": missing entry for level '" + key + "'");
  }
  return j[key];
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InvalidModel(where + ": expected a number");
  return j.get<double>();
}

DiscreteScm::Vec read_row(const json& j, const std::vector<std::string>& labels,
                          const std::string& where) {
  DiscreteScm::Vec out;
  for (const auto& l : labels) out.push_back(number(child(j, l, where), where + "[" + l + "]"));
  if (j.is_object() && j.size() != labels.size()) {
    throw InvalidModel(where + ": entries for undeclared levels");
  }
  return out;
}

}  // namespace

DiscreteScm DiscreteScm::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("model is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidModel("model must be a JSON object");
  if (!j.contains("scenario") || !j["scenario"].is_string()) {
    throw InvalidModel("model needs a 'scenario' string");
  }
  auto scenario = Scenario::parse(j["scenario"].get<std::string>());
  if (scenario.mediators() > 2) throw InvalidModel("models support at most two mediators");
  if (!j.contains("levels")) throw InvalidModel("model needs 'levels'");
  ScmLevels levels;
  levels.exposure = read_levels(j["levels"], "A");
  levels.m1 = read_levels(j["levels"], "M1");
  if (scenario.mediators() == 2) levels.m2 = read_levels(j["levels"], "M2");

  for (const char* key : {"pm1", "ymean"}) {
    if (!j.contains(key)) throw InvalidModel(std::string("model needs '") + key + "'");
  }
  Mat pm1;
  for (const auto& a : levels.exposure) {
    pm1.push_back(read_row(child(j["pm1"], a, "pm1"), levels.m1, "pm1[" + a + "]"));
  }

  if (scenario.mediators() == 1) {
    Mat y;
    for (const auto& a : levels.exposure) {
      y.push_back(read_row(child(j["ymean"], a, "ymean"), levels.m1, "ymean[" + a + "]"));
    }
    return single(std::move(levels), pm1, y);
  }

  if (!j.contains("pm2")) throw InvalidModel("model needs 'pm2'");
  Cube y;
  for (const auto& a : levels.exposure) {
    Mat block;
    const auto& ja = child(j["ymean"], a, "ymean");
    for (const auto& m1 : levels.m1) {
      block.push_back(read_row(child(ja, m1, "ymean[" + a + "]"), levels.m2,
                               "ymean[" + a + "][" + m1 + "]"));
    }
    y.push_back(std::move(block));
  }
  if (scenario.nests()) {
    Cube pm2;
    for (const auto& a : levels.exposure) {
      Mat block;
      const auto& ja = child(j["pm2"], a, "pm2");
      for (const auto& m1 : levels.m1) {
        block.push_back(read_row(child(ja, m1, "pm2[" + a + "]"), levels.m2,
                                 "pm2[" + a + "][" + m1 + "]"));
      }
      pm2.push_back(std::move(block));
    }
    return sequential(std::move(levels), pm1, pm2, y);
  }
  Mat pm2;
  for (const auto& a : levels.exposure) {
    pm2.push_back(read_row(child(j["pm2"], a, "pm2"), levels.m2, "pm2[" + a + "]"));
  }
  return non_sequential(std::move(levels), pm1, pm2, y);
}

std::string DiscreteScm::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_.name();
  j["levels"]["A"] = levels_.exposure;
  j["levels"]["M1"] = levels_.m1;
  if (scenario_.mediators() == 2) j["levels"]["M2"] = levels_.m2;
  for (std::size_t a = 0; a < exposures(); ++a) {
    const auto& la = levels_.exposure[a];
    for (std::size_t i = 0; i < n1_; ++i) {
      const auto& l1 = levels_.m1[i];
      j["pm1"][la][l1] = pm1(a, i);
      if (scenario_.mediators() == 1) {
        j["ymean"][la][l1] = ymean(a, i, 0);
        continue;
      }
      for (std::size_t k = 0; k < n2_; ++k) {
        const auto& l2 = levels_.m2[k];
        if (scenario_.nests()) {
          j["pm2"][la][l1][l2] = pm2(a, i, k);
        } else if (i == 0) {
          j["pm2"][la][l2] = pm2(a, 0, k);
        }
        j["ymean"][la][l1][l2] = ymean(a, i, k);
      }
    }
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Evaluation

std::size_t resolve_exposure(const DiscreteScm& model, const ExposureLevel& e, const Query& q) {
  std::string label;
  switch (e.tag) {
    case ExposureLevel::Tag::Treatment: label = q.a; break;
    case ExposureLevel::Tag::Reference: label = q.a_star; break;
    case ExposureLevel::Tag::Named: {
      auto it = q.named.find(e.label);
      label = it != q.named.end() ? it->second : e.label;
      break;
    }
  }
  auto idx = model.find_exposure(label);
  if (!idx) {
    throw UnboundLevel("exposure symbol '" + e.text() + "' (bound to '" + label +
                       "') is not a level of A");
  }
  return *idx;
}

std::size_t resolve_fixed(const DiscreteScm& model, const MediatorSpec& spec, const Query& q) {
  const auto& label = spec.fixed_label;
  std::optional<std::string> value;
  if ((label == "m1*" || label == "m*") && spec.index == 1) {
    value = q.m1_star;
  } else if (label == "m2*" && spec.index == 2) {
    value = q.m2_star;
  } else if (auto it = q.named.find(label); it != q.named.end()) {
    value = it->second;
  } else {
    value = label;
  }
  if (!value) throw UnboundLevel("fixed level '" + label + "' has no value");
  auto idx = spec.index == 1 ? model.find_m1(*value) : model.find_m2(*value);
  if (!idx) {
    throw UnknownSupportValue("'" + *value + "' is not in the support of M" +
                              std::to_string(spec.index));
  }
  return *idx;
}

BoundQuery bind(const DiscreteScm& model, const Query& q) {
  BoundQuery b;
  b.a = resolve_exposure(model, ExposureLevel::treatment(), q);
  b.a_star = resolve_exposure(model, ExposureLevel::reference(), q);
  if (q.m1_star) b.m1_star = resolve_fixed(model, MediatorSpec::fixed(1), q);
  if (q.m2_star && model.scenario().mediators() == 2) {
    b.m2_star = resolve_fixed(model, MediatorSpec::fixed(2), q);
  }
  return b;
}

namespace {

std::string describe(const IdentifiabilityVerdict& v) {
  std::string out;
  for (const auto& c : v.conflicts) {
    if (!out.empty()) out += "; ";
    out += "M" + std::to_string(c.mediator) + " appears as ";
    for (std::size_t i = 0; i < c.specs.size(); ++i) {
      if (i) out += " and ";
      out += format_spec(c.specs[i]);
    }
  }
  return out;
}

}  // namespace

double eval_expectation(const DiscreteScm& model, const CfExpr& expr, const Query& q) {
  const auto& sc = model.scenario();
  validate_cf(expr, sc);
  auto verdict = check_identifiability(expr, sc);
  if (!verdict.identifiable()) {
    throw NotIdentifiable(format_cf(expr) + ": " + describe(verdict));
  }

  const std::size_t ey = resolve_exposure(model, expr.exposure, q);
  const auto& s1 = expr.mediators[0];
  const std::size_t n1 = model.m1_size();
  const std::size_t n2 = model.m2_size();

  std::optional<std::size_t> f1, f2;
  std::size_t e1 = 0, e2 = 0;
  if (s1.is_fixed()) {
    f1 = resolve_fixed(model, s1, q);
  } else {
    e1 = resolve_exposure(model, s1.exposure, q);
  }
  bool has_m2 = sc.mediators() == 2;
  if (has_m2) {
    const auto& s2 = expr.mediators[1];
    if (s2.is_fixed()) {
      f2 = resolve_fixed(model, s2, q);
    } else {
      e2 = resolve_exposure(model, s2.exposure, q);
    }
  }

  double total = 0;
  for (std::size_t m1 = 0; m1 < n1; ++m1) {
    double w1 = f1 ? (*f1 == m1 ? 1.0 : 0.0) : model.pm1(e1, m1);
    if (w1 == 0) continue;
    double inner = 0;
    for (std::size_t m2 = 0; m2 < n2; ++m2) {
      double w2 = 1.0;
      if (has_m2) w2 = f2 ? (*f2 == m2 ? 1.0 : 0.0) : model.pm2(e2, m1, m2);
      inner += model.ymean(ey, m1, m2) * w2;
    }
    total += w1 * inner;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

std::size_t draw(const double* probs, std::size_t n, double u) {
  double acc = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

Dataset simulate(const DiscreteScm& model, const SimulationOptions& opt) {
  if (opt.n == 0) throw InvalidArgument("simulate needs n >= 1");
  if (!(opt.noise_sd >= 0) || !std::isfinite(opt.noise_sd)) {
    throw InvalidArgument("noise sd must be finite and non-negative");
  }
  const auto na = model.exposures();
  std::vector<double> pa = opt.exposure_probs;
  if (pa.empty()) pa.assign(na, 1.0 / static_cast<double>(na));
  if (pa.size() != na) {
    throw InvalidArgument("exposure distribution has " + std::to_string(pa.size()) +
                          " entries for " + std::to_string(na) + " levels");
  }
  try {
    normalize_row(pa.data(), pa.size(), "exposure distribution");
  } catch (const InvalidModel& e) {
    throw InvalidArgument(e.what());
  }

  const bool two = model.scenario().mediators() == 2;
  const std::size_t n1 = model.m1_size(), n2 = model.m2_size();
  std::vector<std::uint32_t> ca(opt.n), c1(opt.n), c2(opt.n);
  std::vector<double> y(opt.n);

  Rng rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> row1(n1), row2(n2);
  for (std::size_t r = 0; r < opt.n; ++r) {
    auto a = draw(pa.data(), na, rng.uniform());
    for (std::size_t i = 0; i < n1; ++i) row1[i] = model.pm1(a, i);
    auto m1 = draw(row1.data(), n1, rng.uniform());
    std::size_t m2 = 0;
    if (two) {
      for (std::size_t k = 0; k < n2; ++k) row2[k] = model.pm2(a, m1, k);
      m2 = draw(row2.data(), n2, rng.uniform());
    }
    ca[r] = static_cast<std::uint32_t>(a);
    c1[r] = static_cast<std::uint32_t>(m1);
    c2[r] = static_cast<std::uint32_t>(m2);
    y[r] = model.ymean(a, m1, m2) + opt.noise_sd * noise(rng.engine());
  }

  Dataset out;
  out.add(opt.roles.exposure, Column::categorical(model.levels().exposure, std::move(ca)));
  out.add(opt.roles.m1, Column::categorical(model.levels().m1, std::move(c1)));
  if (two) {
    out.add(opt.roles.m2.value_or("M2"), Column::categorical(model.levels().m2, std::move(c2)));
  }
  out.add(opt.roles.outcome, Column::numeric(std::move(y)));
  return out;
}

// ---------------------------------------------------------------------------
// Plug-in construction

namespace {

using Vec = DiscreteScm::Vec;
using Mat = DiscreteScm::Mat;
using Cube = DiscreteScm::Cube;

struct Coded {
  std::vector<std::string> levels;
  std::vector<std::uint32_t> codes;
};

bool integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

Coded categories_of(const Dataset& data, const std::string& name) {
  const auto& col = data.column(name);
  if (col.is_numeric()) {
    for (double v : col.values()) {
      if (!integral(v)) throw NonCategoricalColumn(name + " (non-integer value found)");
    }
    auto c = col.as_categorical();
    return {c.levels(), c.codes()};
  }
  return {col.levels(), col.codes()};
}

// Maps data codes onto declared support indices.
std::vector<std::uint32_t> recode(const Coded& c, const std::vector<std::string>& support,
                                  const std::string& name) {
  std::vector<std::uint32_t> map(c.levels.size());
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    auto idx = find_label(support, c.levels[i]);
    if (!idx) {
      throw UnknownSupportValue("'" + c.levels[i] + "' in column " + name +
                                " is not a declared level");
    }
    map[i] = static_cast<std::uint32_t>(*idx);
  }
  std::vector<std::uint32_t> out(c.codes.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = map[c.codes[r]];
  return out;
}

}  // namespace

DiscreteScm from_dataset(const Dataset& data, const Scenario& scenario, const Roles& roles,
                         const std::optional<ScmLevels>& declared) {
  if (scenario.mediators() > 2) throw InvalidArgument("plug-in models support at most two mediators");
  const bool two = scenario.mediators() == 2;
  if (two && !roles.m2) throw InvalidArgument("scenario " + scenario.name() + " needs an m2 role");
  const std::size_t n = data.rows();
  if (n == 0) throw InvalidArgument("dataset has no rows");

  auto ca = categories_of(data, roles.exposure);
  auto c1 = categories_of(data, roles.m1);
  Coded c2;
  if (two) {
    c2 = categories_of(data, *roles.m2);
  } else {
    c2.levels = {""};
    c2.codes.assign(n, 0);
  }
  const auto& ycol = data.column(roles.outcome);
  if (!ycol.is_numeric()) throw InvalidArgument("outcome column '" + roles.outcome + "' is not numeric");
  const auto& y = ycol.values();

  ScmLevels levels;
  std::vector<std::uint32_t> ia, i1, i2;
  if (declared) {
    levels = *declared;
    if (!two) levels.m2.clear();
    ia = recode(ca, levels.exposure, roles.exposure);
    i1 = recode(c1, levels.m1, roles.m1);
    if (two) {
      i2 = recode(c2, levels.m2, *roles.m2);
    } else {
      i2 = c2.codes;
    }
  } else {
    levels.exposure = ca.levels;
    levels.m1 = c1.levels;
    if (two) levels.m2 = c2.levels;
    ia = std::move(ca.codes);
    i1 = std::move(c1.codes);
    i2 = std::move(c2.codes);
  }

  const std::size_t na = levels.exposure.size(), n1 = levels.m1.size();
  const std::size_t n2 = two ? levels.m2.size() : 1;
  std::vector<double> count_a(na, 0), count_a1(na * n1, 0), count_a2(na * n2, 0),
      count_a12(na * n1 * n2, 0), sum_y(na * n1 * n2, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t a = ia[r], m1 = i1[r], m2 = i2[r];
    count_a[a] += 1;
    count_a1[a * n1 + m1] += 1;
    count_a2[a * n2 + m2] += 1;
    const std::size_t cell = (a * n1 + m1) * n2 + m2;
    count_a12[cell] += 1;
    sum_y[cell] += y[r];
  }

  std::vector<std::string> empty;
  for (std::size_t a = 0; a < na; ++a) {
    const auto& la = levels.exposure[a];
    if (count_a[a] == 0) empty.push_back("(" + roles.exposure + "=" + la + ")");
    for (std::size_t m1 = 0; m1 < n1; ++m1) {
      const auto& l1 = levels.m1[m1];
      if (count_a1[a * n1 + m1] == 0) {
        empty.push_back("(" + roles.exposure + "=" + la + ", " + roles.m1 + "=" + l1 + ")");
      }
      if (!two) continue;
      for (std::size_t m2 = 0; m2 < n2; ++m2) {
        if (count_a12[(a * n1 + m1) * n2 + m2] == 0) {
          empty.push_back("(" + roles.exposure + "=" + la + ", " + roles.m1 + "=" + l1 + ", " +
                          *roles.m2 + "=" + levels.m2[m2] + ")");
        }
      }
    }
  }
  if (!empty.empty()) throw EmptyCell(std::move(empty));

  Mat pm1(na, Vec(n1));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t m1 = 0; m1 < n1; ++m1) pm1[a][m1] = count_a1[a * n1 + m1] / count_a[a];
  }
  if (!two) {
    Mat ym(na, Vec(n1));
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t m1 = 0; m1 < n1; ++m1) ym[a][m1] = sum_y[a * n1 + m1] / count_a1[a * n1 + m1];
    }
    return DiscreteScm::single(std::move(levels), pm1, ym);
  }
  Cube ym(na, Mat(n1, Vec(n2)));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t m1 = 0; m1 < n1; ++m1) {
      for (std::size_t m2 = 0; m2 < n2; ++m2) {
        const std::size_t cell = (a * n1 + m1) * n2 + m2;
        ym[a][m1][m2] = sum_y[cell] / count_a12[cell];
      }
    }
  }
  if (scenario.nests()) {
    Cube pm2(na, Mat(n1, Vec(n2)));
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t m1 = 0; m1 < n1; ++m1) {
        for (std::size_t m2 = 0; m2 < n2; ++m2) {
          pm2[a][m1][m2] = count_a12[(a * n1 + m1) * n2 + m2] / count_a1[a * n1 + m1];
        }
      }
    }
    return DiscreteScm::sequential(std::move(levels), pm1, pm2, ym);
  }
  Mat pm2(na, Vec(n2));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t m2 = 0; m2 < n2; ++m2) pm2[a][m2] = count_a2[a * n2 + m2] / count_a[a];
  }
  return DiscreteScm::non_sequential(std::move(levels), pm1, pm2, ym);
}

}  // namespace natfx
