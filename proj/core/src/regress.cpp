#include "medcal/regress.hpp"

#include <stdexcept>
#include <string>

namespace medcal {

LinearFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const auto n = design.rows();
  const auto q = design.cols();
  if (response.size() != n) {
    throw std::invalid_argument("ols_fit: design rows and response length differ");
  }
  if (n < q) {
    throw std::invalid_argument("ols_fit: fewer observations than coefficients");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  // Rank threshold relative to the largest pivot; a dependent column shows up
  // as a pivot below tol.
  qr.setThreshold(1e-10);
  if (qr.rank() < q) {
    const int offending = static_cast<int>(qr.colsPermutation().indices()(qr.rank()));
    throw std::runtime_error("ols_fit: design is rank deficient (column " +
                             std::to_string(offending) + " is linearly dependent)");
  }

  LinearFit fit;
  fit.coefs = qr.solve(response);
  fit.n_obs = static_cast<int>(n);
  const Eigen::VectorXd resid = response - design * fit.coefs;
  fit.resid_var = resid.squaredNorm() / static_cast<double>(n);
  // (X^T X)^{-1} = R^{-1} R^{-T} up to the pivot permutation; recover it by
  // solving against the identity, which reuses the factorization.
  const Eigen::MatrixXd xtx = design.transpose() * design;
  fit.xtx_inv = xtx.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
  return fit;
}

double predict(const LinearFit& fit, const Eigen::VectorXd& x) {
  if (x.size() != fit.coefs.size()) {
    throw std::invalid_argument("predict: coefficient/input length mismatch");
  }
  return fit.coefs.dot(x);
}

}  // namespace medcal
