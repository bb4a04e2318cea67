#pragma once

#include <Eigen/Dense>
#include <vector>

namespace medcal {

/// Measurement-error model A = gamma0 + gamma1 A* + gamma2.W + eps_A.
/// gamma1 is the calibration coefficient; sigma_gamma2 the residual variance.
struct ErrParams {
  double gamma0 = 0.0;
  double gamma1 = 1.0;
  Eigen::VectorXd gamma2;
  double sigma_gamma2 = 0.0;
};

/// Mediator model M = alpha0 + alpha1 A + alpha2.W + eps_M.
struct MedParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  Eigen::VectorXd alpha2;
  double sigma_alpha2 = 0.0;
};

enum class OrcKind { Orc1, Orc2 };

/// Linear predictor of the true exposure given (A*, M, W): either fitted
/// directly in the validation study (Orc1) or assembled in closed form from
/// the mediator and measurement-error models (Orc2).
struct OrcPredictor {
  OrcKind kind = OrcKind::Orc1;
  Eigen::VectorXd eta;  // (eta0, eta1 [A*], eta2 [M], eta3 [W...]), length p+3
};

/// Risk-set recalibration: per-interval coefficient vectors with the same
/// layout as OrcPredictor::eta; interval k covers [split_points[k], next).
struct RrcPredictor {
  std::vector<double> split_points;            // t_1 = 0 < t_2 < ... < t_K
  std::vector<Eigen::VectorXd> per_interval;   // xi(t_k), each length p+3
  int min_risk_size = 0;
};

/// Proportional-hazards outcome model coefficients. beta3 is the
/// exposure-mediator interaction; it is fixed at 0 when the model was fit
/// without the interaction column.
struct OutParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  Eigen::VectorXd beta4;
  Eigen::MatrixXd info;
  bool has_interaction = true;
};

}  // namespace medcal
