#pragma once

#include <Eigen/Dense>

namespace medcal {

/// Ordinary least squares fit. `resid_var` is the mean squared residual
/// with denominator n (not n-q), matching the empirical-variance convention
/// used throughout the estimating equations; it is therefore biased downward
/// by a factor (n-q)/n in small samples.
struct LinearFit {
  Eigen::VectorXd coefs;    // intercept first when the design carries one
  double resid_var = 0.0;   // (1/n) * sum of squared residuals
  Eigen::MatrixXd xtx_inv;  // (X^T X)^{-1}
  int n_obs = 0;

  int dim() const { return static_cast<int>(coefs.size()); }
};

// Solves the normal equations through a column-pivoted Householder QR.
// Throws std::runtime_error naming the offending column when the design is
// rank deficient.
LinearFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// coefs . x; throws std::invalid_argument on length mismatch.
double predict(const LinearFit& fit, const Eigen::VectorXd& x);

}  // namespace medcal
