#pragma once

#include <optional>
#include <vector>

#include "medcal/params.hpp"
#include "medcal/study.hpp"

namespace medcal {

// OLS of the true exposure on (1, A*, W) in the validation study;
// sigma_gamma2 is the mean squared residual (denominator n2).
ErrParams fit_error_model(const Study& study);

struct PooledMediatorRow {
  double exposure = 0.0;  // imputed for main rows, true for validation rows
  double mediator = 0.0;
  Eigen::VectorXd covariates;
};

// Pooled estimating-equation fit of the mediator model over explicit rows.
// Main rows enter with an imputed exposure whose error variance is
// sigma_gamma2; the residual-variance estimate subtracts
// (n1/n) alpha1^2 sigma_gamma2 accordingly. A negative corrected variance is
// clamped to zero (reported through `clamped`). Either row list may be empty.
MedParams fit_mediator_pooled(const std::vector<PooledMediatorRow>& main_rows,
                              const std::vector<PooledMediatorRow>& validation_rows,
                              double sigma_gamma2, bool* clamped = nullptr);

// Main rows contribute the calibration mean mu_A(gamma) = gamma0 + gamma1 A*
// + gamma2.W, validation rows the observed true exposure.
MedParams fit_mediator(const Study& study, const ErrParams& err, bool* clamped = nullptr);

// Direct regression of A on (1, A*, M, W) in the validation study.
OrcPredictor orc1_fit(const Study& study);

// Closed-form conditional mean of A given (A*, M, W) for a normal
// measurement-error term, assembled from the mediator and error models.
OrcPredictor orc2_predictor(const MedParams& med, const ErrParams& err);

// Risk-set recalibration over K intervals. Default split points equally
// divide [0, t_v*], t_v* the maximum observed validation time; a custom
// increasing list starting at 0 may be supplied instead. Each risk set must
// hold at least p+4 members or the fit is rejected outright.
RrcPredictor rrc_fit(const Study& study, int k,
                     const std::vector<double>* custom_splits = nullptr);

// Leave-one-out cross-validation over K in {1..k_max} in the validation
// study, minimizing mean squared prediction error of the true exposure.
struct RrcCv {
  int best_k = 1;
  std::vector<double> mspe;  // indexed by K-1; NaN where a risk set is undersized
};
RrcCv rrc_select_k(const Study& study, int k_max);

double impute_exposure(const OrcPredictor& pred, const MainRecord& record);
// Uses the coefficients of the most recent split point at or before t_obs;
// times beyond the last split map to the last interval.
double impute_exposure(const RrcPredictor& pred, const MainRecord& record);

// Cox fit on the main study with an externally supplied exposure per row;
// Z = [m_A, M, m_A*M (optional), W].
OutParams fit_outcome_imputed(const Study& study, const std::vector<double>& m_a,
                              bool include_interaction);

OutParams fit_outcome(const Study& study, const OrcPredictor& pred, bool include_interaction);
OutParams fit_outcome(const Study& study, const RrcPredictor& pred, bool include_interaction);
OutParams fit_outcome_unadjusted(const Study& study, bool include_interaction);
OutParams fit_outcome_gold(const Study& study, const std::vector<double>& main_true_exposure,
                           bool include_interaction);

/// Estimation strategies for the full mediation pipeline.
enum class Method { Unadjusted, Gold, Orc1, Orc2, Rrc };

const char* method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct MethodOptions {
  bool include_interaction = true;
  int k_rrc = 4;
  std::optional<std::vector<double>> rrc_splits;
};

/// One method's complete fit: calibration pieces (where applicable), the
/// pooled mediator model, and the outcome model with its imputed exposures.
struct MethodFit {
  Method method = Method::Unadjusted;
  bool include_interaction = true;
  ErrParams gamma;
  OrcPredictor orc;
  RrcPredictor rrc;
  MedParams med;
  OutParams out;
  std::vector<double> imputed_exposure;  // m_A per main row
  bool sigma_alpha2_clamped = false;

  Theta theta() const;
};

// Gold requires the true exposure for every main row.
MethodFit fit_method(const Study& study, Method method, const MethodOptions& opts = {},
                     const std::vector<double>* main_true_exposure = nullptr);

/// Residual diagnostics of the calibration regression in the validation
/// study, used to assess the normality assumption behind the closed-form
/// predictor.
struct CalibrationDiagnostics {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  bool normality_warning = false;  // |skewness| > 1
  std::vector<double> residuals;
};
CalibrationDiagnostics calibration_residuals(const Study& study, const ErrParams& err);

}  // namespace medcal

#include "medcal/mediate.hpp"
