#include "medcal/mediate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "medcal/quadrature.hpp"

namespace medcal {

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(order);
  const double mu0 = std::sqrt(M_PI);  // int exp(-x^2) dx
  for (int i = 0; i < order; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = mu0 * v0 * v0;
  }
  return rule;
}

namespace {

double covariate_term(const Eigen::VectorXd& coefs, const Eigen::VectorXd& w,
                      const char* what) {
  if (coefs.size() != w.size()) {
    throw std::invalid_argument(std::string(what) + ": covariate profile length mismatch");
  }
  return coefs.dot(w);
}

constexpr double kTeZeroTol = 1e-12;

void finalize(MediationMeasures& m) {
  m.te = m.nie + m.nde;
  if (std::abs(m.te) < kTeZeroTol) {
    m.mp_defined = false;
    m.mp = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.mp_defined = true;
    m.mp = m.nie / m.te;
  }
}

// log of int exp(-L0 * exp(q0 + slope*x)) exp(-x^2) dx / sqrt(pi), by
// Gauss-Hermite with max-subtraction. The integrand is <= 1, so the log-sum
// never overflows; extreme exponents underflow individual terms to -inf.
double log_gaussian_survival_integral(double l0, double q0, double slope,
                                      const GaussHermiteRule& rule) {
  const int n = static_cast<int>(rule.nodes.size());
  Eigen::VectorXd logterms(n);
  double maxterm = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double q = q0 + slope * rule.nodes(i);
    const double h = q > 700.0 ? -std::numeric_limits<double>::infinity() : -l0 * std::exp(q);
    logterms(i) = std::log(rule.weights(i)) + h;
    maxterm = std::max(maxterm, logterms(i));
  }
  if (!std::isfinite(maxterm)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::exp(logterms(i) - maxterm);
  return maxterm + std::log(acc) - 0.5 * std::log(M_PI);
}

// Counterfactual log hazard ratio against the baseline: the hazard of T_{a M_{a*}}
// at covariate profile w, relative to lambda_0(t).
double delta_term(const Theta& theta, double l0, double a, double a_star,
                  const Eigen::VectorXd& w, const GaussHermiteRule& rule) {
  const auto& med = theta.med;
  const auto& out = theta.out;
  const double u = out.beta2 + out.beta3 * a;
  const double mu = med.alpha0 + med.alpha1 * a_star + covariate_term(med.alpha2, w, "mediate");
  const double sigma = std::sqrt(med.sigma_alpha2);
  const double b0 = out.beta1 * a + covariate_term(out.beta4, w, "mediate") + u * mu;
  const double smooth = 0.5 * u * u * med.sigma_alpha2;

  if (l0 == 0.0) return b0 + smooth;  // r == 1 exactly

  // Change of variables m = mu + sqrt(2) sigma x in both integrals of r.
  const double slope = u * std::sqrt(2.0) * sigma;
  const double log_num = log_gaussian_survival_integral(l0, b0 + 2.0 * smooth, slope, rule);
  const double log_den = log_gaussian_survival_integral(l0, b0, slope, rule);
  const double log_r = log_num - log_den;
  if (!std::isfinite(log_r)) {
    throw std::runtime_error("exact_measures: hazard-ratio integral underflowed to zero");
  }
  return log_r + b0 + smooth;
}

}  // namespace

MediationMeasures approx_measures(const Theta& theta, const Contrast& c) {
  const auto& med = theta.med;
  const auto& out = theta.out;
  const double diff = c.a - c.a_star;
  const double wterm = covariate_term(med.alpha2, c.w, "approx_measures");

  MediationMeasures m;
  m.nie = med.alpha1 * (out.beta2 + out.beta3 * c.a) * diff;
  m.nde = (out.beta1 +
           out.beta3 * (med.alpha0 + med.alpha1 * c.a_star + wterm +
                        out.beta2 * med.sigma_alpha2)) *
              diff +
          0.5 * out.beta3 * out.beta3 * med.sigma_alpha2 * (c.a * c.a - c.a_star * c.a_star);
  finalize(m);
  return m;
}

MediationMeasures exact_measures(const Theta& theta, const BaselineHazard& bh,
                                 const Contrast& c, double t, int quad_order) {
  if (quad_order < 10) throw std::invalid_argument("exact_measures: quad_order must be >= 10");
  if (t < 0) throw std::invalid_argument("exact_measures: negative time");
  const double l0 = cumhaz_at(bh, t);
  const GaussHermiteRule rule = gauss_hermite(quad_order);

  const double d_aa = delta_term(theta, l0, c.a, c.a, c.w, rule);
  const double d_aastar = delta_term(theta, l0, c.a, c.a_star, c.w, rule);
  const double d_starstar = delta_term(theta, l0, c.a_star, c.a_star, c.w, rule);

  MediationMeasures m;
  m.nie = d_aa - d_aastar;
  m.nde = d_aastar - d_starstar;
  finalize(m);
  return m;
}

Theorem1RelBias theorem1_relbias(double gamma1, double rho, double mp_true) {
  if (!(mp_true > 0.0 && mp_true < 1.0)) {
    throw std::invalid_argument("theorem1_relbias: mp_true must lie in (0,1)");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("theorem1_relbias: rho must lie in [0,1]");
  }
  Theorem1RelBias b;
  const double mp_excess = 1.0 / mp_true - 1.0;
  b.nie = gamma1 - 1.0 + gamma1 * rho * mp_excess;
  b.nde = (gamma1 - 1.0) * (1.0 - rho) - rho;
  b.te = gamma1 - 1.0;
  b.mp = rho * mp_excess;
  return b;
}

double reliability_index(double alpha1, double sigma_alpha2, double sigma_gamma2) {
  if (sigma_alpha2 < 0 || sigma_gamma2 < 0) {
    throw std::invalid_argument("reliability_index: negative variance");
  }
  if (alpha1 == 0.0) return 0.0;
  const double num = alpha1 * alpha1 * sigma_gamma2;
  const double den = num + sigma_alpha2;
  if (den == 0.0) {
    throw std::invalid_argument(
        "reliability_index: undefined when both variances are zero");
  }
  return num / den;
}

double reliability_index_nocov(double rho_aastar, double rho_am) {
  if (rho_am == 0.0) {
    throw std::invalid_argument("reliability_index_nocov: rho_am must be nonzero");
  }
  if (std::abs(rho_aastar) > 1.0 || std::abs(rho_am) >= 1.0) {
    throw std::invalid_argument("reliability_index_nocov: correlations out of range");
  }
  const double r2 = rho_aastar * rho_aastar;
  return (1.0 - r2) / (1.0 / (rho_am * rho_am) - r2);
}

Eigen::VectorXd flatten_theta(const Theta& theta) {
  const int p = static_cast<int>(theta.med.alpha2.size());
  const int d_beta = (theta.out.has_interaction ? 3 : 2) + p;
  Eigen::VectorXd x(p + 3 + d_beta);
  x(0) = theta.med.alpha0;
  x(1) = theta.med.alpha1;
  x.segment(2, p) = theta.med.alpha2;
  x(p + 2) = theta.med.sigma_alpha2;
  int k = p + 3;
  x(k++) = theta.out.beta1;
  x(k++) = theta.out.beta2;
  if (theta.out.has_interaction) x(k++) = theta.out.beta3;
  x.segment(k, p) = theta.out.beta4;
  return x;
}

Theta unflatten_theta(const Eigen::VectorXd& x, int n_covariates, bool has_interaction) {
  const int p = n_covariates;
  const int expected = p + 3 + (has_interaction ? 3 : 2) + p;
  if (x.size() != expected) {
    throw std::invalid_argument("unflatten_theta: coordinate vector has wrong length");
  }
  Theta theta;
  theta.med.alpha0 = x(0);
  theta.med.alpha1 = x(1);
  theta.med.alpha2 = x.segment(2, p);
  theta.med.sigma_alpha2 = x(p + 2);
  int k = p + 3;
  theta.out.beta1 = x(k++);
  theta.out.beta2 = x(k++);
  theta.out.has_interaction = has_interaction;
  theta.out.beta3 = has_interaction ? x(k++) : 0.0;
  theta.out.beta4 = x.segment(k, p);
  return theta;
}

}  // namespace medcal
