#include <cmath>
#include <limits>

#include "natfx/errors.hpp"
#include "natfx/estimate.hpp"

namespace natfx {

OlsFit fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
               std::vector<std::string> names) {
  const auto n = static_cast<std::size_t>(design.rows());
  const auto p = static_cast<std::size_t>(design.cols());
  if (static_cast<std::size_t>(response.size()) != n) {
    throw DimensionMismatch("design has " + std::to_string(n) + " rows but response has " +
                            std::to_string(response.size()));
  }
  if (p == 0) throw DimensionMismatch("design has no columns");
  if (n < p) {
    throw DimensionMismatch(std::to_string(n) + " rows cannot identify " + std::to_string(p) +
                            " coefficients");
  }
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != p) throw DimensionMismatch("column names do not match the design");
  if (!design.allFinite() || !response.allFinite()) {
    throw InvalidArgument("non-finite value in regression data");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.rows(), design.cols());
  qr.setThreshold(1e-10);
  qr.compute(design);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < p) {
    const auto dep = static_cast<std::size_t>(qr.colsPermutation().indices()(static_cast<Eigen::Index>(rank)));
    throw RankDeficient(names[dep]);
  }

  OlsFit fit;
  fit.names = std::move(names);
  fit.n = n;
  fit.p = p;
  fit.coef = qr.solve(response);
  const Eigen::VectorXd resid = response - design * fit.coef;
  fit.rss = resid.squaredNorm();
  fit.sigma2 = n > p ? fit.rss / static_cast<double>(n - p) : 0.0;

  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const auto P = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(P, P).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(P, P));
  Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
  Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
  fit.se.resize(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    fit.se(j) = n > p ? std::sqrt(fit.sigma2 * cov(j, j)) : std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace natfx
