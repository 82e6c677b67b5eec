#include "natfx/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace natfx {

using json = nlohmann::ordered_json;

CoefficientTable coefficient_table(std::string model, const OlsFit& fit) {
  CoefficientTable t;
  t.model = std::move(model);
  t.terms = fit.names;
  for (std::size_t i = 0; i < fit.p; ++i) {
    t.estimate.push_back(fit.coef(static_cast<Eigen::Index>(i)));
    t.se.push_back(fit.se(static_cast<Eigen::Index>(i)));
  }
  t.residual_variance = fit.sigma2;
  t.n = fit.n;
  t.df = fit.n - fit.p;
  return t;
}

double round_sig(double v, int digits) {
  if (!std::isfinite(v) || v == 0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

std::string table_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", round_sig(v));
  return buf;
}

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["scenario"] = r.scenario;
  json comps = json::array();
  for (const auto& c : r.result.components) {
    json row;
    row["name"] = c.name;
    row["role"] = std::string(role_name(c.role));
    row["estimate"] = number(c.estimate);
    if (c.ci) {
      row["ci"] = json::array({number(c.ci->lower), number(c.ci->upper)});
    } else {
      row["ci"] = nullptr;
    }
    comps.push_back(row);
  }
  j["components"] = comps;
  j["te"] = number(r.result.te);
  j["sum_gap"] = number(r.result.sum_gap);

  json ledger;
  ledger["scenario"] = r.ledger.scenario;
  json entries = json::array();
  for (const auto& a : r.ledger.entries) {
    entries.push_back({{"id", a.id}, {"statement", a.statement}, {"meaning", a.meaning},
                       {"acknowledged", a.acknowledged}});
  }
  ledger["assumptions"] = entries;
  j["assumptions"] = ledger;

  if (!r.fits.empty() || r.n_used) {
    json diag;
    if (r.n_used) diag["n_used"] = *r.n_used;
    if (r.n_dropped) diag["n_dropped"] = *r.n_dropped;
    json fits = json::object();
    for (const auto& f : r.fits) {
      json rows = json::array();
      for (std::size_t i = 0; i < f.terms.size(); ++i) {
        rows.push_back({{"term", f.terms[i]}, {"estimate", number(f.estimate[i])}, {"se", number(f.se[i])}});
      }
      fits[f.model] = {{"coefficients", rows},
                       {"residual_variance", number(f.residual_variance)},
                       {"n", f.n},
                       {"df", f.df}};
    }
    if (!r.fits.empty()) diag["fits"] = fits;
    j["diagnostics"] = diag;
  }

  json prov;
  if (r.bootstrap) {
    prov["bootstrap"] = {{"replicates", r.bootstrap->replicates}, {"failed", r.bootstrap->failed},
                         {"level", r.bootstrap->level}, {"max_fail", r.bootstrap->max_fail},
                         {"seed", r.bootstrap->seed}};
  }
  json cfg = json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  prov["config"] = cfg;
  j["provenance"] = prov;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string render_table(const Report& r) {
  std::string out;
  std::size_t w = 10;
  for (const auto& c : r.result.components) w = std::max(w, c.name.size() + 2);
  bool with_ci = std::any_of(r.result.components.begin(), r.result.components.end(),
                             [](const ComponentValue& c) { return c.ci.has_value(); });
  std::string ci_head;
  if (with_ci && r.bootstrap) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%% C.I.", r.bootstrap->level * 100);
    ci_head = buf;
  }
  std::string head = pad("Component", w) + (ci_head.empty() ? "Estimate" : pad("Estimate", 12) + ci_head);
  out += head + "\n";
  for (const auto& c : r.result.components) {
    std::string line = pad(c.name, w) + pad(table_number(c.estimate), 12);
    if (c.ci) line += table_number(c.ci->lower) + ", " + table_number(c.ci->upper);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  out += "sum check: |sum of components - TE| = " + table_number(r.result.sum_gap) + "\n";

  if (r.n_used) {
    out += "\nrows used: " + std::to_string(*r.n_used);
    if (r.n_dropped) out += ", dropped for missing values: " + std::to_string(*r.n_dropped);
    out += "\n";
  }
  for (const auto& f : r.fits) {
    out += "\nmodel for " + f.model + " (n = " + std::to_string(f.n) + ", df = " + std::to_string(f.df) +
           ", residual variance = " + table_number(f.residual_variance) + ")\n";
    std::size_t tw = 8;
    for (const auto& t : f.terms) tw = std::max(tw, t.size() + 2);
    out += "  " + pad("term", tw) + pad("estimate", 12) + "se\n";
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      out += "  " + pad(f.terms[i], tw) + pad(table_number(f.estimate[i]), 12) + table_number(f.se[i]) + "\n";
    }
  }

  out += "\nassumptions (" + r.ledger.scenario + "), not testable from data:\n";
  for (const auto& a : r.ledger.entries) {
    out += "  [" + std::string(a.acknowledged ? "x" : " ") + "] " + pad(a.id, 5) + pad(a.statement, 40) +
           a.meaning + "\n";
  }
  if (r.bootstrap) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "\nbootstrap: B = %zu, failed = %zu, level = %g, seed = %llu\n",
                  r.bootstrap->replicates, r.bootstrap->failed, r.bootstrap->level,
                  static_cast<unsigned long long>(r.bootstrap->seed));
    out += buf;
  }
  if (!r.config.empty()) {
    out += "\nconfig:\n";
    for (const auto& [k, v] : r.config) out += "  " + k + " = " + v + "\n";
  }
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace natfx
