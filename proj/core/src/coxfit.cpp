#include "medcal/coxfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace medcal {

namespace {

void require_identifiable(const Eigen::MatrixXd& info) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info, Eigen::EigenvaluesOnly);
  const double max_ev = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-10 * std::max(1.0, max_ev))) {
    throw std::runtime_error(
        "cox_fit: non-identifiable covariate (singular information matrix)");
  }
}

}  // namespace

CoxScoreEngine::CoxScoreEngine(std::vector<double> times, std::vector<bool> events)
    : times_(std::move(times)), events_(std::move(events)) {
  if (times_.size() != events_.size()) {
    throw std::invalid_argument("CoxScoreEngine: time/event length mismatch");
  }
  order_.resize(times_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(),
            [&](int a, int b) { return times_[a] > times_[b]; });
  n_events_ = static_cast<int>(std::count(events_.begin(), events_.end(), true));
}

// Descending-time sweep. Risk-set accumulators s0, s1 (and s2 when
// moments >= 2) are extended by every subject tied at a time before the
// events at that time are processed, which yields the Breslow convention.
template <typename PerEvent>
void CoxScoreEngine::sweep(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta,
                           int moments, PerEvent&& per_event) const {
  const int n = static_cast<int>(times_.size());
  const int d = static_cast<int>(z.cols());
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd s2 = moments >= 2 ? Eigen::MatrixXd::Zero(d, d) : Eigen::MatrixXd();

  int pos = 0;
  while (pos < n) {
    int tie_end = pos;
    const double t = times_[order_[pos]];
    while (tie_end < n && times_[order_[tie_end]] == t) {
      const int i = order_[tie_end];
      const double w = std::exp(beta.dot(z.row(i)));
      s0 += w;
      s1.noalias() += w * z.row(i).transpose();
      if (moments >= 2) s2.noalias() += w * z.row(i).transpose() * z.row(i);
      ++tie_end;
    }
    for (int k = pos; k < tie_end; ++k) {
      const int i = order_[k];
      if (events_[i]) per_event(i, s0, s1, s2);
    }
    pos = tie_end;
  }
}

Eigen::VectorXd CoxScoreEngine::score_sum(const Eigen::MatrixXd& z,
                                          const Eigen::VectorXd& beta) const {
  Eigen::VectorXd score = Eigen::VectorXd::Zero(z.cols());
  sweep(z, beta, 1,
        [&](int i, double s0, const Eigen::VectorXd& s1, const Eigen::MatrixXd&) {
          score += z.row(i).transpose() - s1 / s0;
        });
  return score;
}

Eigen::MatrixXd CoxScoreEngine::score_rows(const Eigen::MatrixXd& z,
                                           const Eigen::VectorXd& beta) const {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  sweep(z, beta, 1,
        [&](int i, double s0, const Eigen::VectorXd& s1, const Eigen::MatrixXd&) {
          rows.row(i) = z.row(i) - s1.transpose() / s0;
        });
  return rows;
}

CoxScore CoxScoreEngine::score_info(const Eigen::MatrixXd& z,
                                    const Eigen::VectorXd& beta) const {
  const int d = static_cast<int>(z.cols());
  CoxScore out;
  out.loglik = 0.0;
  out.score = Eigen::VectorXd::Zero(d);
  out.info = Eigen::MatrixXd::Zero(d, d);
  sweep(z, beta, 2,
        [&](int i, double s0, const Eigen::VectorXd& s1, const Eigen::MatrixXd& s2) {
          const Eigen::VectorXd zbar = s1 / s0;
          out.loglik += beta.dot(z.row(i)) - std::log(s0);
          out.score += z.row(i).transpose() - zbar;
          out.info += s2 / s0 - zbar * zbar.transpose();
        });
  return out;
}

CoxFit CoxScoreEngine::fit(const Eigen::MatrixXd& z, const CoxOptions& opts) const {
  if (n_events_ == 0) throw std::runtime_error("cox_fit: no events in the data");
  const int d = static_cast<int>(z.cols());

  CoxFit fit;
  fit.beta = Eigen::VectorXd::Zero(d);
  CoxScore cur = score_info(z, fit.beta);
  require_identifiable(cur.info);
  fit.loglik = cur.loglik;
  fit.loglik_path.push_back(cur.loglik);

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (cur.score.lpNorm<Eigen::Infinity>() < opts.score_tol) {
      fit.converged = true;
      break;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cur.info);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("cox_fit: information matrix not positive definite");
    }
    const Eigen::VectorXd step = llt.solve(cur.score);

    // Step-halving keeps the partial likelihood ascending.
    double scale = 1.0;
    CoxScore next;
    Eigen::VectorXd beta_next;
    for (int half = 0; half < 30; ++half) {
      beta_next = fit.beta + scale * step;
      next = score_info(z, beta_next);
      if (std::isfinite(next.loglik) && next.loglik >= cur.loglik) break;
      scale *= 0.5;
    }
    if (!std::isfinite(next.loglik)) {
      throw std::runtime_error("cox_fit: partial likelihood became non-finite");
    }

    const double rel_change =
        std::abs(next.loglik - cur.loglik) / (std::abs(cur.loglik) + 1.0);
    fit.beta = beta_next;
    cur = next;
    fit.loglik = cur.loglik;
    fit.loglik_path.push_back(cur.loglik);
    fit.iterations = it + 1;

    if (fit.beta.lpNorm<Eigen::Infinity>() > opts.beta_cap) {
      throw std::runtime_error(
          "cox_fit: coefficient diverging (monotone partial likelihood)");
    }
    if (cur.score.lpNorm<Eigen::Infinity>() < opts.score_tol ||
        rel_change < opts.loglik_rel_tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged && cur.score.lpNorm<Eigen::Infinity>() < opts.score_tol) {
    fit.converged = true;
  }
  fit.info = cur.info;
  return fit;
}

BaselineHazard CoxScoreEngine::breslow(const Eigen::MatrixXd& z,
                                       const Eigen::VectorXd& beta) const {
  // Collect jumps in descending-time order, then reverse-accumulate.
  std::vector<std::pair<double, double>> jumps;  // (time, d_t / s0)
  double cur_time = std::numeric_limits<double>::quiet_NaN();
  sweep(z, beta, 1,
        [&](int i, double s0, const Eigen::VectorXd&, const Eigen::MatrixXd&) {
          if (!jumps.empty() && times_[i] == cur_time) {
            jumps.back().second += 1.0 / s0;
          } else {
            cur_time = times_[i];
            jumps.emplace_back(cur_time, 1.0 / s0);
          }
        });
  std::reverse(jumps.begin(), jumps.end());

  BaselineHazard bh;
  bh.times.reserve(jumps.size());
  bh.cumhaz.reserve(jumps.size());
  double cum = 0.0;
  for (const auto& [t, jump] : jumps) {
    cum += jump;
    bh.times.push_back(t);
    bh.cumhaz.push_back(cum);
  }
  return bh;
}

namespace {

CoxScoreEngine make_engine(const std::vector<CoxRow>& rows) {
  std::vector<double> times;
  std::vector<bool> events;
  times.reserve(rows.size());
  events.reserve(rows.size());
  for (const auto& r : rows) {
    times.push_back(r.time);
    events.push_back(r.event);
  }
  return CoxScoreEngine(std::move(times), std::move(events));
}

Eigen::MatrixXd covariate_matrix(const std::vector<CoxRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("cox: empty data");
  const int d = static_cast<int>(rows.front().z.size());
  Eigen::MatrixXd z(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].z.size() != d) {
      throw std::invalid_argument("cox: covariate vectors of unequal length");
    }
    z.row(i) = rows[i].z;
  }
  return z;
}

}  // namespace

CoxScore partial_score_info(const std::vector<CoxRow>& rows, const Eigen::VectorXd& beta) {
  return make_engine(rows).score_info(covariate_matrix(rows), beta);
}

CoxFit cox_fit(const std::vector<CoxRow>& rows, const CoxOptions& opts) {
  return make_engine(rows).fit(covariate_matrix(rows), opts);
}

BaselineHazard breslow_cumhaz(const CoxFit& fit, const std::vector<CoxRow>& rows) {
  return make_engine(rows).breslow(covariate_matrix(rows), fit.beta);
}

double cumhaz_at(const BaselineHazard& bh, double t) {
  if (t < 0) throw std::invalid_argument("cumhaz_at: negative time");
  // Last jump time <= t (right continuity: a jump at t counts).
  const auto it = std::upper_bound(bh.times.begin(), bh.times.end(), t);
  if (it == bh.times.begin()) return 0.0;
  return bh.cumhaz[static_cast<std::size_t>(it - bh.times.begin()) - 1];
}

}  // namespace medcal
