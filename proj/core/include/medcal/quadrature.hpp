#pragma once

#include <Eigen/Dense>

namespace medcal {

/// Gauss-Hermite rule for integrals of the form int exp(-x^2) f(x) dx
/// (physicists' convention): sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Golub-Welsch construction via the symmetric tridiagonal Jacobi matrix.
GaussHermiteRule gauss_hermite(int order);

}  // namespace medcal
