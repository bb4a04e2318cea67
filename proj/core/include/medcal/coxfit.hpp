#pragma once

#include <Eigen/Dense>
#include <vector>

namespace medcal {

struct CoxRow {
  double time = 0.0;
  bool event = false;
  Eigen::VectorXd z;
};

struct CoxFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd info;  // observed information at beta
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_path;  // loglik after each Newton step
};

struct CoxScore {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
};

/// Right-continuous step function for the cumulative baseline hazard.
struct BaselineHazard {
  std::vector<double> times;   // increasing jump times
  std::vector<double> cumhaz;  // cumulative value at and after times[i]
};

struct CoxOptions {
  double score_tol = 1e-8;
  double loglik_rel_tol = 1e-12;
  int max_iterations = 50;
  double beta_cap = 50.0;  // |beta_j| beyond this flags a monotone likelihood
};

// Log partial likelihood, score, and observed information under Breslow tie
// handling.
CoxScore partial_score_info(const std::vector<CoxRow>& rows, const Eigen::VectorXd& beta);

// Newton-Raphson with step-halving from beta = 0. Throws on no events,
// singular information, or a diverging coefficient; returns converged=false
// if the iteration cap is reached first.
CoxFit cox_fit(const std::vector<CoxRow>& rows, const CoxOptions& opts = {});

// Breslow estimator of the cumulative baseline hazard at fit.beta: each event
// contributes a unit jump scaled by the inverse risk-set sum of exp(beta.z).
BaselineHazard breslow_cumhaz(const CoxFit& fit, const std::vector<CoxRow>& rows);

// Right-continuous evaluation; 0 before the first jump. Throws on t < 0.
double cumhaz_at(const BaselineHazard& bh, double t);

/// Shared sweep machinery for repeated score evaluations on a fixed set of
/// (time, event) pairs with varying covariates, as needed by the stacked
/// estimating-equation Jacobians. Sorting happens once at construction.
class CoxScoreEngine {
 public:
  CoxScoreEngine(std::vector<double> times, std::vector<bool> events);

  int n() const { return static_cast<int>(times_.size()); }
  int n_events() const { return n_events_; }

  // Sum over subjects of the Breslow partial-likelihood score; z is n x d,
  // row-aligned with the constructor vectors.
  Eigen::VectorXd score_sum(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta) const;

  // Per-subject score contributions delta_i * (z_i - zbar(t_i)), n x d.
  Eigen::MatrixXd score_rows(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta) const;

  CoxScore score_info(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta) const;

  // Newton solve on externally supplied covariates.
  CoxFit fit(const Eigen::MatrixXd& z, const CoxOptions& opts = {}) const;

  BaselineHazard breslow(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta) const;

 private:
  std::vector<double> times_;
  std::vector<bool> events_;
  std::vector<int> order_;  // indices by descending time
  int n_events_ = 0;

  template <typename PerEvent>
  void sweep(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta, int moments,
             PerEvent&& per_event) const;
};

}  // namespace medcal
