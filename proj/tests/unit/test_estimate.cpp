#include <doctest.h>

#include <cmath>
#include <random>

#include "natfx/errors.hpp"
#include "natfx/estimate.hpp"
#include "oracle.hpp"

using namespace natfx;

namespace {

const char* kAll[] = {"CDE",        "INT_ref-AM1",  "INT_ref-AM2+AM1M2", "NatINT_AM1", "NatINT_AM2", "NatINT_AM1M2",
                      "NatINT_M1M2", "PDE",          "PIE_M1",            "PIE_M2",     "TE"};

CovariateProfile profile() { return {{0.4, -0.3}}; }

double additive_sum(const DecompositionResult& r) {
  double s = 0;
  for (const auto& c : r.components)
    if (c.role == ComponentRole::Additive) s += c.estimate;
  return s;
}

}  // namespace

TEST_CASE("OLS exact fit and errors") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd X(50, 3);
  Eigen::VectorXd beta(3);
  beta << 1.5, -2, 0.25;
  for (int i = 0; i < 50; ++i) X.row(i) << 1, z(g), z(g);
  auto f = fit_ols(X, X * beta, {"(Intercept)", "x1", "x2"});
  CHECK((f.coef - beta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(f.sigma2 < 1e-20);

  Eigen::MatrixXd dup(50, 4);
  dup << X, X.col(2);
  try {
    fit_ols(dup, X * beta, {"(Intercept)", "x1", "x2", "x2_copy"});
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    std::string msg = e.what();
    CHECK((msg.find("x2") != std::string::npos));
  }
  CHECK_THROWS_AS(fit_ols(X.topRows(2), beta.head(2)), DimensionMismatch);
  CHECK_THROWS_AS(fit_ols(X, beta), DimensionMismatch);

  auto square = fit_ols(X.topRows(3), (X * beta).head(3));
  CHECK(square.sigma2 == 0);
  CHECK(std::isnan(square.se(0)));
}

TEST_CASE("W symmetry at a = a*") {
  auto p = oracle::random_params(5);
  auto c = profile();
  CHECK(expectation_w(p, 1, c, 0.7, 0.7) == doctest::Approx(expectation_w(p, 8, c, 0.7, 0.7)));
  CHECK(expectation_w(p, 2, c, 0.7, 0.7) == doctest::Approx(expectation_w(p, 6, c, 0.7, 0.7)));
  CHECK(expectation_w(p, 3, c, 0.7, 0.7) == doctest::Approx(expectation_w(p, 5, c, 0.7, 0.7)));
  CHECK_THROWS_AS(expectation_w(p, 9, c, 1, 0), InvalidArgument);
}

TEST_CASE("no interactions: TE collapses to the product-of-paths form") {
  auto p = oracle::random_params(6);
  p.theta[4] = p.theta[5] = p.theta[6] = p.theta[7] = 0;
  p.beta[3] = 0;
  auto c = profile();
  const double a = 1.3, as = -0.4;
  double te = expectation_w(p, 1, c, a, as) - expectation_w(p, 8, c, a, as);
  const auto& t = p.theta;
  const auto& b = p.beta;
  const auto& g = p.gamma;
  CHECK(te == doctest::Approx((t[1] + t[3] * b[1] + t[2] * g[1] + t[3] * b[2] * g[1]) * (a - as)).epsilon(1e-12));
  auto r = linear_components(p, {a, as, 0.2, -0.1}, c);
  for (const char* n : {"INT_ref-AM1", "INT_ref-AM2+AM1M2", "NatINT_AM1", "NatINT_AM2", "NatINT_AM1M2", "NatINT_M1M2"}) {
    CHECK(std::abs(r.value(n)) < 1e-12);
  }
}

TEST_CASE("a = a* zeroes every closed form") {
  auto p = oracle::random_params(8);
  auto r = linear_components(p, {0.6, 0.6, 1.0, -2.0}, profile());
  for (const auto& comp : r.components) CHECK(comp.estimate == 0);
}

TEST_CASE("closed forms add up to W1 - W8") {
  std::mt19937_64 g(77);
  std::uniform_real_distribution<double> u(-2, 2);
  for (std::uint64_t s = 1; s <= 1000; ++s) {
    auto p = oracle::random_params(s);
    LinearQuery q{u(g), u(g), u(g), u(g)};
    CovariateProfile c{{u(g), u(g)}};
    auto r = linear_components(p, q, c);
    double te = expectation_w(p, 1, c, q.a, q.a_star) - expectation_w(p, 8, c, q.a, q.a_star);
    CHECK(std::abs(additive_sum(r) - te) < 1e-9);
    CHECK(std::abs(r.te - te) < 1e-9);
    CHECK(r.value("PDE") == doctest::Approx(r.value("CDE") + r.value("INT_ref-AM1") + r.value("INT_ref-AM2+AM1M2")));
  }
}

// NatINT_M1M2 carries no M1-variance term: the variance enters W4, W5, W6
// and W8 with coefficients that cancel.
TEST_CASE("only some components depend on the M1 variance") {
  auto p = oracle::random_params(12);
  LinearQuery q{1, 0, 0.5, -0.5};
  auto before = linear_components(p, q, profile());
  p.sigma2_m1 *= 3.7;
  auto after = linear_components(p, q, profile());
  for (const char* n : {"CDE", "INT_ref-AM1", "NatINT_AM1", "NatINT_AM1M2", "NatINT_M1M2", "PIE_M1"}) {
    CHECK(before.value(n) == after.value(n));
  }
  for (const char* n : {"INT_ref-AM2+AM1M2", "NatINT_AM2", "PIE_M2", "TE"}) {
    CHECK(before.value(n) != after.value(n));
  }
}

TEST_CASE("shifting the outcome intercept moves every W, no component") {
  auto p = oracle::random_params(13);
  LinearQuery q{1, 0, 0.5, -0.5};
  auto c = profile();
  auto before = linear_components(p, q, c);
  double w1 = expectation_w(p, 1, c, 1, 0);
  p.theta[0] += 4.25;
  auto after = linear_components(p, q, c);
  CHECK(expectation_w(p, 1, c, 1, 0) == doctest::Approx(w1 + 4.25));
  for (const char* n : kAll) CHECK(after.value(n) == doctest::Approx(before.value(n)).epsilon(1e-12));
}

TEST_CASE("W1 agrees with simulation") {
  auto p = oracle::random_params(21);
  LinearQuery q{1, 0, 0, 0};
  auto mc = oracle::simulate_linear(p, q, profile().c, 200'000, 5);
  auto r = linear_components(p, q, profile());
  CHECK(std::abs(r.value("TE") - mc["TE"].mean) < 4 * mc["TE"].se);
}

TEST_CASE("parameter validation and profiles") {
  auto p = oracle::random_params(2);
  p.sigma2_m1 = -1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = oracle::random_params(2);
  p.beta_c.pop_back();
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = oracle::random_params(2);
  auto c = make_profile(p, {{"c2", 3.0}, {"c1", 1.0}});
  CHECK(c.c == std::vector<double>{1.0, 3.0});
  CHECK_THROWS_AS(make_profile(p, {{"c1", 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(make_profile(p, {{"c1", 1.0}, {"c2", 1.0}, {"c9", 1.0}}), InvalidArgument);
}

TEST_CASE("params JSON round trip") {
  auto p = oracle::random_params(3);
  auto back = params_from_json(params_to_json(p));
  CHECK(back.theta == p.theta);
  CHECK(back.beta_c == p.beta_c);
  CHECK(back.covariates == p.covariates);
  CHECK(back.sigma2_m1 == p.sigma2_m1);
  CHECK_THROWS_AS(params_from_json("{\"theta\": [1]}"), InvalidArgument);
}

TEST_CASE("linear system fit on zero-noise data") {
  auto p = oracle::random_params(4, 1);
  std::mt19937_64 g(1);
  std::normal_distribution<double> z(0, 1);
  std::string csv = "A,M1,M2,Y,C\n";
  for (int i = 0; i < 400; ++i) {
    double a = i % 2, cv = z(g);
    double m1 = p.gamma[0] + p.gamma[1] * a + p.gamma_c[0] * cv + z(g);
    double m2 = std::exp(p.beta[0] + p.beta[1] * a + p.beta[2] * m1 + p.beta[3] * a * m1 + p.beta_c[0] * cv + z(g));
    double l2 = std::log(m2);
    const auto& t = p.theta;
    double y = t[0] + t[1] * a + t[2] * m1 + t[3] * l2 + t[4] * a * m1 + t[5] * a * l2 + t[6] * m1 * l2 +
               t[7] * a * m1 * l2 + p.theta_c[0] * cv;
    char line[256];
    std::snprintf(line, sizeof line, "%g,%.17g,%.17g,%.17g,%.17g\n", a, m1, m2, y, cv);
    csv += line;
  }
  Roles roles{"A", "M1", std::string("M2"), "Y", {"C"}};
  std::vector<Transform> t{{"M2", Transform::Kind::Log}};
  auto d = parse_dataset(csv, roles, t, LoadOptions{true});
  auto fit = fit_linear_system(d, roles, t);
  for (int i = 0; i < 8; ++i) CHECK(fit.params.theta[i] == doctest::Approx(p.theta[i]).epsilon(1e-8));
  CHECK(fit.y_fit.names[3] == "log(M2)");
  CHECK(fit.n_used == 400);
  CHECK(fit.transforms == std::vector<std::string>{"log(M2)"});
  auto doc = linear_fit_json(fit);
  CHECK(params_from_json(doc).theta == fit.params.theta);
  REQUIRE(fit_means_from_json(doc).has_value());
  CHECK(fit_means_from_json(doc)->first == doctest::Approx(fit.m1_mean));
}

TEST_CASE("log transform on non-positive mediator names rows") {
  Roles roles{"A", "M1", std::string("M2"), "Y", {}};
  std::vector<Transform> t{{"M2", Transform::Kind::Log}};
  try {
    parse_dataset("A,M1,M2,Y\n1,2,3,4\n0,1,0,2\n1,1,5,1\n0,2,-1,0\n", roles, t, LoadOptions{true});
    FAIL("expected TransformDomainError");
  } catch (const TransformDomainError& e) {
    std::string msg = e.what();
    CHECK(msg.find("2, 4") != std::string::npos);
  }
}
