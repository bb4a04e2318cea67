#pragma once

#include <Eigen/Dense>

#include "medcal/coxfit.hpp"
#include "medcal/params.hpp"

namespace medcal {

/// Stacked mediator- and outcome-model parameters.
struct Theta {
  MedParams med;
  OutParams out;
};

/// Exposure contrast a* -> a at covariate profile w.
struct Contrast {
  double a = 1.0;
  double a_star = 0.0;
  Eigen::VectorXd w;
};

/// Mediation measures on the log-hazard-ratio scale. te == nie + nde by
/// construction; mp = nie/te is flagged undefined when |te| is numerically 0.
struct MediationMeasures {
  double nie = 0.0;
  double nde = 0.0;
  double te = 0.0;
  double mp = 0.0;
  bool mp_defined = false;
};

// Rare-outcome closed forms:
//   NIE = alpha1 (beta2 + beta3 a)(a - a*)
//   NDE = {beta1 + beta3(alpha0 + alpha1 a* + alpha2.w + beta2 sigma_a^2)}(a - a*)
//         + 0.5 beta3^2 sigma_a^2 (a^2 - a*^2)
MediationMeasures approx_measures(const Theta& theta, const Contrast& c);

// Exact measures at follow-up time t, with the cumulative baseline hazard
// evaluated from bh and the two Gaussian integrals computed by Gauss-Hermite
// quadrature of the given order (nodes centered at the counterfactual
// mediator mean, scale sigma_alpha). Integrands are combined in log space
// with max-subtraction, so large linear predictors degrade gracefully
// instead of overflowing.
MediationMeasures exact_measures(const Theta& theta, const BaselineHazard& bh,
                                 const Contrast& c, double t, int quad_order = 40);

/// Asymptotic relative bias of the unadjusted estimators under a rare outcome
/// with no exposure-mediator interaction, as a function of the calibration
/// coefficient gamma1 and the MP reliability index rho.
struct Theorem1RelBias {
  double nie = 0.0;
  double nde = 0.0;
  double te = 0.0;
  double mp = 0.0;
};

// Requires mp_true in (0,1) and rho in [0,1].
Theorem1RelBias theorem1_relbias(double gamma1, double rho, double mp_true);

// MP reliability index rho = sigma_g^2 / (sigma_g^2 + sigma_a^2 / alpha1^2),
// computed in the overflow-safe form alpha1^2 sigma_g^2 / (alpha1^2 sigma_g^2
// + sigma_a^2); alpha1 == 0 gives rho = 0.
double reliability_index(double alpha1, double sigma_alpha2, double sigma_gamma2);

// No-covariate identity rho = (1 - rho_AA*^2) / (1/rho_AM^2 - rho_AA*^2),
// bounded within [0, rho_AM^2].
double reliability_index_nocov(double rho_aastar, double rho_am);

// Flat coordinate layout (alpha0, alpha1, alpha2..., sigma_alpha2, beta1,
// beta2, [beta3 when the interaction is present], beta4...), used by the
// stacked sandwich and the delta method.
Eigen::VectorXd flatten_theta(const Theta& theta);
Theta unflatten_theta(const Eigen::VectorXd& x, int n_covariates, bool has_interaction);

}  // namespace medcal
