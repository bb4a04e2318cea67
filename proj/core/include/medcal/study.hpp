#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace medcal {

struct MainRecord {
  double t_obs = 0.0;
  bool event = false;
  double mediator = 0.0;
  double exposure_star = 0.0;
  Eigen::VectorXd covariates;
};

// External validation design: both exposures observed, no failure indicator.
struct ValidationRecord {
  double t_obs = 0.0;
  double mediator = 0.0;
  double exposure_star = 0.0;
  double exposure_true = 0.0;
  Eigen::VectorXd covariates;
};

struct Study {
  std::vector<MainRecord> main;
  std::vector<ValidationRecord> validation;
  std::vector<std::string> covariate_names;
  double max_followup = 0.0;  // t*

  int n1() const { return static_cast<int>(main.size()); }
  int n2() const { return static_cast<int>(validation.size()); }
  int n_covariates() const { return static_cast<int>(covariate_names.size()); }
};

// Validates the study invariants (n1 >= 1, n2 >= p+3, consistent covariate
// lengths, finite nonnegative main times not exceeding t*). Validation times
// beyond t* are tolerated: only their risk-set membership matters and the
// validation follow-up horizon is reported separately in diagnostics.
Study make_study(std::vector<MainRecord> main, std::vector<ValidationRecord> validation,
                 std::vector<std::string> covariate_names,
                 std::optional<double> max_followup = std::nullopt);

struct Schema {
  std::string time = "time";
  std::string event = "event";
  std::string mediator = "mediator";
  std::string exposure = "exposure";            // error-prone measurement
  std::string true_exposure = "true_exposure";  // gold-standard measurement
  std::vector<std::string> covariates;
};

struct LoadedStudy {
  Study study;
  // Present when the main file also carries the true-exposure column
  // (simulator exports, benchmarking data); enables the gold-standard fit.
  std::optional<std::vector<double>> main_true_exposure;
  std::vector<std::string> warnings;
};

// CSV ingestion (header row, UTF-8, '.' decimal point). Missing values are
// rejected, never imputed. An event column in the validation file is ignored
// with a warning. Throws std::invalid_argument with the offending file,
// column, or 1-based data row in the message.
LoadedStudy load_study(const std::string& main_path, const std::string& validation_path,
                       const Schema& schema,
                       std::optional<double> max_followup = std::nullopt);

// Inverse of load_study up to field-identical round-trip.
void save_study(const Study& study, const std::string& main_path,
                const std::string& validation_path, const Schema& schema,
                const std::vector<double>* main_true_exposure = nullptr);

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
};

struct StudyDiagnostics {
  int n1 = 0;
  int n2 = 0;
  int n_events = 0;
  double event_rate = 0.0;
  bool rare_outcome = false;  // event rate below 10%
  double corr_a_astar = 0.0;  // empirical corr(A, A*) in the validation study
  double max_followup = 0.0;
  double max_validation_time = 0.0;  // validation follow-up horizon t_v*
  std::vector<ColumnStats> main_columns;
  std::vector<ColumnStats> validation_columns;
};

// Pure report; never mutates the study.
StudyDiagnostics validate_study(const Study& study);

}  // namespace medcal
