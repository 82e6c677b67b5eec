#include <cmath>
#include <map>

#include <json.hpp>

#include "natfx/errors.hpp"
#include "natfx/estimate.hpp"

namespace natfx {

using json = nlohmann::ordered_json;

void LinearParams::validate() const {
  const auto k = covariates.size();
  if (theta_c.size() != k || beta_c.size() != k || gamma_c.size() != k) {
    throw InvalidArgument("covariate coefficient vectors must all have " + std::to_string(k) +
                          " entries");
  }
  if (!(sigma2_m1 >= 0) || !std::isfinite(sigma2_m1)) {
    throw InvalidArgument("sigma2_m1 must be finite and non-negative");
  }
  auto finite = [](const auto& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!finite(theta) || !finite(beta) || !finite(gamma) || !finite(theta_c) || !finite(beta_c) ||
      !finite(gamma_c)) {
    throw InvalidArgument("non-finite model coefficient");
  }
}

CovariateProfile make_profile(const LinearParams& params,
                              const std::vector<std::pair<std::string, double>>& values) {
  std::map<std::string, double> given;
  for (const auto& [k, v] : values) {
    if (!given.emplace(k, v).second) throw InvalidArgument("covariate '" + k + "' given twice");
  }
  CovariateProfile prof;
  for (const auto& name : params.covariates) {
    auto it = given.find(name);
    if (it == given.end()) throw InvalidArgument("no value for covariate '" + name + "' (use --cov)");
    prof.c.push_back(it->second);
    given.erase(it);
  }
  if (!given.empty()) throw InvalidArgument("unknown covariate '" + given.begin()->first + "'");
  return prof;
}

namespace {

double dot(const std::vector<double>& x, const CovariateProfile& c) {
  if (x.size() != c.c.size()) {
    throw DimensionMismatch("covariate profile has " + std::to_string(c.c.size()) +
                            " values, model has " + std::to_string(x.size()));
  }
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * c.c[i];
  return s;
}

}  // namespace

double expectation_at(const LinearParams& p, const CovariateProfile& c, double y, double e1,
                      double e2) {
  const auto& t = p.theta;
  const auto& b = p.beta;
  const auto& g = p.gamma;
  const double mu = g[0] + g[1] * e1 + dot(p.gamma_c, c);  // E[M1(e1)]
  const double B = b[0] + b[1] * e2 + dot(p.beta_c, c);
  const double slope = b[2] + b[3] * e2;  // dM2/dM1 under exposure e2
  const double em1sq = p.sigma2_m1 + mu * mu;
  return (t[0] + t[1] * y + dot(p.theta_c, c)) + (t[3] + t[5] * y) * B + (t[2] + t[4] * y) * mu +
         (t[6] + t[7] * y) * B * mu + (t[3] + t[5] * y) * slope * mu +
         (t[6] + t[7] * y) * slope * em1sq;
}

double expectation_w(const LinearParams& p, int which, const CovariateProfile& c, double a,
                     double s) {
  switch (which) {
    case 1: return expectation_at(p, c, a, a, a);
    case 2: return expectation_at(p, c, a, a, s);
    case 3: return expectation_at(p, c, a, s, a);
    case 4: return expectation_at(p, c, s, a, a);
    case 5: return expectation_at(p, c, s, s, a);
    case 6: return expectation_at(p, c, s, a, s);
    case 7: return expectation_at(p, c, a, s, s);
    case 8: return expectation_at(p, c, s, s, s);
    default: throw InvalidArgument("W index must be 1..8");
  }
}

DecompositionResult linear_components(const LinearParams& p, const LinearQuery& q,
                                      const CovariateProfile& c) {
  p.validate();
  const auto& t = p.theta;
  const auto& b = p.beta;
  const auto& g = p.gamma;
  const double a = q.a, s = q.a_star, m1s = q.m1_star, m2s = q.m2_star;
  const double s2 = p.sigma2_m1;
  const double d = a - s;
  const double G = g[0] + dot(p.gamma_c, c);        // gamma0 + gamma2'c
  const double Bc = b[0] + dot(p.beta_c, c);        // beta0 + beta4'c
  const double mus = G + g[1] * s;                  // E[M1(a*)]
  const double Bs = Bc + b[1] * s;
  const double ks = b[2] + b[3] * s;                // beta2 + beta3 a*
  const double t67s = t[6] + t[7] * s;
  const double t35s = t[3] + t[5] * s;

  const double cde = (t[1] + t[4] * m1s + t[5] * m2s + t[7] * m1s * m2s) * d;
  const double int_ref_am1 = (mus - m1s) * (t[4] + t[7] * m2s) * d;
  const double int_ref_am2 = (t[1] + t[5] * Bs + t[7] * Bs * mus + t[5] * ks * mus +
                              t[7] * ks * (s2 + mus * mus) - (t[1] + t[5] * m2s) - t[7] * m2s * mus) *
                             d;

  const double nat_am1 = (t[4] * g[1] + t[7] * g[1] * Bs + t[5] * g[1] * ks + 2 * t[7] * g[1] * ks * G +
                          t[7] * g[1] * g[1] * ks * (a + s)) *
                         d * d;
  const double nat_am2 = (t[5] * b[1] + t[7] * b[1] * mus + t[5] * b[3] * mus +
                          t[7] * b[3] * (s2 + mus * mus)) *
                         d * d;
  const double nat_am1m2 = (t[7] * b[1] * g[1] + t[5] * b[3] * g[1] + 2 * t[7] * b[3] * g[1] * G +
                            t[7] * b[3] * g[1] * g[1] * (a + s)) *
                           d * d * d;
  const double nat_m1m2 = (b[1] * g[1] * t67s + b[3] * g[1] * t35s + 2 * b[3] * g[1] * t67s * G +
                           b[3] * g[1] * g[1] * t67s * (a + s)) *
                          d * d;
  const double pie_m1 = (g[1] * (t[2] + t[4] * s) + g[1] * t67s * Bs + g[1] * t35s * ks +
                         2 * g[1] * t67s * ks * G + g[1] * g[1] * t67s * ks * (a + s)) *
                        d;
  const double pie_m2 =
      (b[1] * t35s + b[1] * t67s * mus + b[3] * t35s * mus + b[3] * t67s * (s2 + mus * mus)) * d;

  // Total effect as a polynomial in a and a*.
  const double k1 = t[1] + t[5] * Bc + b[1] * t[3] + t[4] * G + g[1] * t[2] + t[7] * Bc * G +
                    b[1] * t[6] * G + g[1] * t[6] * Bc + t[5] * b[2] * G + t[3] * b[3] * G +
                    t[3] * b[2] * g[1] + t[7] * b[2] * s2 + t[6] * b[3] * s2 + t[7] * b[2] * G * G +
                    t[6] * b[3] * G * G + 2 * g[1] * t[6] * b[2] * G;
  const double k2 = b[1] * t[5] + g[1] * t[4] + b[1] * t[7] * G + g[1] * t[7] * Bc +
                    g[1] * b[1] * t[6] + t[5] * b[3] * G + t[5] * b[2] * g[1] + t[3] * b[3] * g[1] +
                    t[7] * b[3] * s2 + t[7] * b[3] * G * G + 2 * g[1] * t[7] * b[2] * G +
                    2 * g[1] * t[6] * b[3] * G + t[6] * b[2] * g[1] * g[1];
  const double k3 = g[1] * b[1] * t[7] + t[5] * b[3] * g[1] + 2 * g[1] * t[7] * b[3] * G +
                    t[7] * b[2] * g[1] * g[1] + t[6] * b[3] * g[1] * g[1];
  const double k4 = t[7] * b[3] * g[1] * g[1];
  const double te = k1 * d + k2 * (a * a - s * s) + k3 * (a * a * a - s * s * s) +
                    k4 * (a * a * a * a - s * s * s * s);

  const auto A = ComponentRole::Additive;
  DecompositionResult r;
  r.components = {
      {"CDE", A, cde, std::nullopt},
      {"INT_ref-AM1", A, int_ref_am1, std::nullopt},
      {"INT_ref-AM2+AM1M2", A, int_ref_am2, std::nullopt},
      {"NatINT_AM1", A, nat_am1, std::nullopt},
      {"NatINT_AM2", A, nat_am2, std::nullopt},
      {"NatINT_AM1M2", A, nat_am1m2, std::nullopt},
      {"NatINT_M1M2", A, nat_m1m2, std::nullopt},
      {"PDE", ComponentRole::Auxiliary, cde + int_ref_am1 + int_ref_am2, std::nullopt},
      {"PIE_M1", A, pie_m1, std::nullopt},
      {"PIE_M2", A, pie_m2, std::nullopt},
      {"TE", ComponentRole::Total, te, std::nullopt},
  };
  r.finalize();
  return r;
}

// ---------------------------------------------------------------------------
// Fitting

LinearFit fit_linear_system(const Dataset& input, const Roles& roles,
                            const std::vector<Transform>& transforms) {
  if (!roles.m2) throw InvalidArgument("the linear model needs an m2 role");
  Dataset data = input;
  apply_transforms(data, transforms);

  auto numeric = [&](const std::string& name) -> const std::vector<double>& {
    const auto& col = data.column(name);
    if (!col.is_numeric()) {
      throw InvalidArgument("column '" + name + "' must be numeric for the linear model");
    }
    return col.values();
  };
  const auto& A = numeric(roles.exposure);
  const auto& M1 = numeric(roles.m1);
  const auto& M2 = numeric(*roles.m2);
  const auto& Y = numeric(roles.outcome);
  std::vector<const std::vector<double>*> C;
  for (const auto& name : roles.covariates) C.push_back(&numeric(name));

  auto label = [&](const std::string& col) {
    for (const auto& t : data.applied_transforms()) {
      if (t == "log(" + col + ")") return t;
    }
    return col;
  };
  const std::string a = label(roles.exposure), m1 = label(roles.m1), m2 = label(*roles.m2);

  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto k = static_cast<Eigen::Index>(C.size());

  Eigen::MatrixXd XY(n, 8 + k), X2(n, 4 + k), X1(n, 2 + k);
  Eigen::VectorXd vy(n), vm2(n), vm1(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const double x = A[r], u = M1[r], v = M2[r];
    XY.row(i).head(8) << 1, x, u, v, x * u, x * v, u * v, x * u * v;
    X2.row(i).head(4) << 1, x, u, x * u;
    X1.row(i).head(2) << 1, x;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double cv = (*C[static_cast<std::size_t>(j)])[r];
      XY(i, 8 + j) = cv;
      X2(i, 4 + j) = cv;
      X1(i, 2 + j) = cv;
    }
    vy(i) = Y[r];
    vm2(i) = v;
    vm1(i) = u;
  }

  std::vector<std::string> ny = {"(Intercept)", a, m1, m2, a + ":" + m1, a + ":" + m2,
                                 m1 + ":" + m2, a + ":" + m1 + ":" + m2};
  std::vector<std::string> n2 = {"(Intercept)", a, m1, a + ":" + m1};
  std::vector<std::string> n1 = {"(Intercept)", a};
  for (const auto& c : roles.covariates) {
    ny.push_back(c);
    n2.push_back(c);
    n1.push_back(c);
  }

  LinearFit fit;
  fit.y_fit = fit_ols(XY, vy, ny);
  fit.m2_fit = fit_ols(X2, vm2, n2);
  fit.m1_fit = fit_ols(X1, vm1, n1);

  auto& p = fit.params;
  for (int j = 0; j < 8; ++j) p.theta[static_cast<std::size_t>(j)] = fit.y_fit.coef(j);
  for (int j = 0; j < 4; ++j) p.beta[static_cast<std::size_t>(j)] = fit.m2_fit.coef(j);
  for (int j = 0; j < 2; ++j) p.gamma[static_cast<std::size_t>(j)] = fit.m1_fit.coef(j);
  for (Eigen::Index j = 0; j < k; ++j) {
    p.theta_c.push_back(fit.y_fit.coef(8 + j));
    p.beta_c.push_back(fit.m2_fit.coef(4 + j));
    p.gamma_c.push_back(fit.m1_fit.coef(2 + j));
  }
  p.sigma2_m1 = fit.m1_fit.sigma2;
  p.covariates = roles.covariates;

  fit.n_used = data.rows();
  fit.n_dropped = data.dropped();
  fit.transforms = data.applied_transforms();
  fit.m1_mean = vm1.mean();
  fit.m2_mean = vm2.mean();
  return fit;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json params_json(const LinearParams& p) {
  json j;
  j["theta"] = p.theta;
  j["theta_c"] = p.theta_c;
  j["beta"] = p.beta;
  j["beta_c"] = p.beta_c;
  j["gamma"] = p.gamma;
  j["gamma_c"] = p.gamma_c;
  j["sigma2_m1"] = p.sigma2_m1;
  j["covariates"] = p.covariates;
  return j;
}

json ols_json(const OlsFit& f) {
  json j;
  json rows = json::array();
  for (std::size_t i = 0; i < f.p; ++i) {
    json r;
    r["term"] = f.names[i];
    r["estimate"] = f.coef(static_cast<Eigen::Index>(i));
    double se = f.se(static_cast<Eigen::Index>(i));
    if (std::isfinite(se)) {
      r["se"] = se;
    } else {
      r["se"] = nullptr;
    }
    rows.push_back(r);
  }
  j["coefficients"] = rows;
  j["residual_variance"] = f.sigma2;
  j["n"] = f.n;
  j["df"] = f.n - f.p;
  return j;
}

template <std::size_t N>
std::array<double, N> read_fixed(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N) {
    throw InvalidArgument(std::string("params: '") + key + "' must be an array of " +
                          std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) throw InvalidArgument(std::string("params: non-number in '") + key + "'");
    out[i] = j[key][i].get<double>();
  }
  return out;
}

std::vector<double> read_vec(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw InvalidArgument(std::string("params: '") + key + "' must be an array");
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw InvalidArgument(std::string("params: non-number in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

json parse_doc(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("params file is not valid JSON: ") + e.what());
  }
}

}  // namespace

std::string params_to_json(const LinearParams& p) { return params_json(p).dump(2); }

LinearParams params_from_json(std::string_view text) {
  json doc = parse_doc(text);
  const json& j = doc.contains("params") ? doc["params"] : doc;
  LinearParams p;
  p.theta = read_fixed<8>(j, "theta");
  p.beta = read_fixed<4>(j, "beta");
  p.gamma = read_fixed<2>(j, "gamma");
  p.theta_c = read_vec(j, "theta_c");
  p.beta_c = read_vec(j, "beta_c");
  p.gamma_c = read_vec(j, "gamma_c");
  if (!j.contains("sigma2_m1") || !j["sigma2_m1"].is_number()) {
    throw InvalidArgument("params: 'sigma2_m1' must be a number");
  }
  p.sigma2_m1 = j["sigma2_m1"].get<double>();
  if (j.contains("covariates")) {
    for (const auto& c : j["covariates"]) {
      if (!c.is_string()) throw InvalidArgument("params: covariate names must be strings");
      p.covariates.push_back(c.get<std::string>());
    }
  } else {
    for (std::size_t i = 0; i < p.theta_c.size(); ++i) p.covariates.push_back("c" + std::to_string(i + 1));
  }
  p.validate();
  return p;
}

std::optional<std::pair<double, double>> fit_means_from_json(std::string_view text) {
  json doc = parse_doc(text);
  if (!doc.contains("sample") || !doc["sample"].contains("m1_mean")) return std::nullopt;
  return std::make_pair(doc["sample"]["m1_mean"].get<double>(), doc["sample"]["m2_mean"].get<double>());
}

std::string linear_fit_json(const LinearFit& fit) {
  json j;
  j["params"] = params_json(fit.params);
  j["fits"]["Y"] = ols_json(fit.y_fit);
  j["fits"]["M2"] = ols_json(fit.m2_fit);
  j["fits"]["M1"] = ols_json(fit.m1_fit);
  j["sample"]["n_used"] = fit.n_used;
  j["sample"]["n_dropped"] = fit.n_dropped;
  j["sample"]["transforms"] = fit.transforms;
  j["sample"]["m1_mean"] = fit.m1_mean;
  j["sample"]["m2_mean"] = fit.m2_mean;
  j["diagnostics"]["sigma2_Y"] = fit.y_fit.sigma2;
  j["diagnostics"]["sigma2_M2"] = fit.m2_fit.sigma2;
  j["diagnostics"]["sigma2_M1"] = fit.m1_fit.sigma2;
  return j.dump(2);
}

}  // namespace natfx
