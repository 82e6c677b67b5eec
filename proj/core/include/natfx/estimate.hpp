#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "natfx/dataset.hpp"
#include "natfx/decomp.hpp"
#include "natfx/scm.hpp"

namespace natfx {

// ---------------------------------------------------------------------------
// Plug-in estimator for categorical mediators

/// Nine sequential components from the empirical double sums over (m1, m2),
/// plus PDE and TE (both computed on their own, not by summing). Works on
/// any two-mediator model; a non-sequential model is the m1-constant case.
DecompositionResult plugin_seq2(const DiscreteScm& model, const Query& q);

// ---------------------------------------------------------------------------
// Least squares

struct OlsFit {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;  // NaN when n == p
  double rss = 0;
  double sigma2 = 0;   // RSS / (n - p); 0 when n == p
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Column-pivoted Householder QR with relative pivot threshold 1e-10.
/// Throws DimensionMismatch or RankDeficient (naming a dependent column).
OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               std::vector<std::string> names = {});

// ---------------------------------------------------------------------------
// Gaussian-linear sequential model
//
//   M1 = g0 + g1 A + g2'C + e1,                    e1 ~ N(0, s2_M1)
//   M2 = b0 + b1 A + b2 M1 + b3 A M1 + b4'C + e2
//   Y  = t0 + t1 A + t2 M1 + t3 M2 + t4 A M1 + t5 A M2 + t6 M1 M2
//        + t7 A M1 M2 + t8'C + e3

struct LinearParams {
  std::array<double, 8> theta{};
  std::vector<double> theta_c;
  std::array<double, 4> beta{};
  std::vector<double> beta_c;
  std::array<double, 2> gamma{};
  std::vector<double> gamma_c;
  double sigma2_m1 = 0;
  std::vector<std::string> covariates;  // names, same order as the *_c vectors

  /// Throws InvalidArgument on length mismatch, negative variance or
  /// non-finite values.
  void validate() const;
};

struct CovariateProfile {
  std::vector<double> c;
};

/// Builds a profile from name=value pairs; every covariate must be given.
CovariateProfile make_profile(const LinearParams& params,
                              const std::vector<std::pair<std::string, double>>& values);

struct LinearQuery {
  double a = 1;
  double a_star = 0;
  double m1_star = 0;
  double m2_star = 0;
};

/// E[Y(y, M1(e1), M2(e2, M1(e1))) | c].
double expectation_at(const LinearParams& p, const CovariateProfile& c, double y, double e1,
                      double e2);

/// W1..W8 (which = 1..8). W1 = (a, a, a), W2 = (a, a, a*), W3 = (a, a*, a),
/// W4 = (a*, a, a), W5 = (a*, a*, a), W6 = (a*, a, a*), W7 = (a, a*, a*),
/// W8 = (a*, a*, a*) in (y, e1, e2) order.
double expectation_w(const LinearParams& p, int which, const CovariateProfile& c, double a,
                     double a_star);

/// Closed-form components in report order: CDE, INT_ref-AM1,
/// INT_ref-AM2+AM1M2, four NatINTs, PDE (auxiliary), PIE_M1, PIE_M2, TE.
/// TE uses its own polynomial form, not W1 - W8.
DecompositionResult linear_components(const LinearParams& p, const LinearQuery& q,
                                      const CovariateProfile& c);

struct LinearFit {
  LinearParams params;
  OlsFit y_fit;
  OlsFit m2_fit;
  OlsFit m1_fit;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  std::vector<std::string> transforms;
  double m1_mean = 0;  // analysis-sample means after transforms
  double m2_mean = 0;
};

/// Three least-squares fits with the regressor sets above. Transforms not
/// yet recorded on `data` are applied first.
LinearFit fit_linear_system(const Dataset& data, const Roles& roles,
                            const std::vector<Transform>& transforms);

/// JSON document: {"params": {...}, "fits": {...}, "sample": {...}}.
std::string linear_fit_json(const LinearFit& fit);
/// Accepts either a full fit document or a bare params object.
LinearParams params_from_json(std::string_view text);
std::string params_to_json(const LinearParams& p);
/// Sample means stored in a fit document, if present.
std::optional<std::pair<double, double>> fit_means_from_json(std::string_view text);

}  // namespace natfx
