#include "rss/bounds.hpp"

#include <Eigen/Eigenvalues>

namespace rss {

namespace {

constexpr double kGapTolFactor = 1e-8;  // eigenvalues closer than this * lambda_max are equal

double log_inv(double delta) { return std::log(1.0 / delta); }

}  // namespace

BoundInputs BoundInputs::isotropic(int m, int n, int d, double alpha, double delta, double gamma,
                                   const Vector& mu0, double sigma0, const Vector& mu1,
                                   double sigma1) {
  BoundInputs inp;
  inp.m = m;
  inp.n = n;
  inp.d = d;
  inp.alpha = alpha;
  inp.delta = delta;
  inp.gamma = gamma;
  inp.mu0 = mu0;
  inp.mu1 = mu1;
  inp.kind = CovKind::Isotropic;
  inp.sigma0 = sigma0;
  inp.sigma1 = sigma1;
  inp.validate();
  return inp;
}

BoundInputs BoundInputs::general(int m, int n, int d, double alpha, double delta, double gamma,
                                 const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                                 const Matrix& cov1, double beta) {
  BoundInputs inp;
  inp.m = m;
  inp.n = n;
  inp.d = d;
  inp.alpha = alpha;
  inp.delta = delta;
  inp.gamma = gamma;
  inp.mu0 = mu0;
  inp.mu1 = mu1;
  inp.kind = CovKind::General;
  inp.cov0 = cov0;
  inp.cov1 = cov1;
  inp.beta = beta;
  inp.validate();
  return inp;
}

void BoundInputs::validate() const {
  require(m >= 1 && n >= 1 && d >= 1, "BoundInputs: counts must be >= 1");
  require(delta > 0.0 && delta < 1.0, "BoundInputs: delta must lie in (0, 1)");
  require(alpha >= 0.0, "BoundInputs: alpha must be >= 0");
  require(gamma > 0.0, "BoundInputs: gamma must be > 0");
  require(mu0.size() == d && mu1.size() == d, "BoundInputs: mean dimension mismatch");
  if (kind == CovKind::Isotropic) {
    require(sigma0 > 0.0 && sigma1 > 0.0, "BoundInputs: sigma must be > 0");
  } else {
    require(cov0.rows() == d && cov0.cols() == d && cov1.rows() == d && cov1.cols() == d,
            "BoundInputs: covariance dimension mismatch");
  }
}

BoundReport robust_excess_residual(const BoundInputs& inp) {
  inp.validate();
  require(inp.kind == CovKind::Isotropic, "robust_excess_residual: isotropic inputs required");
  const double mu0_sq = inp.mu0.squaredNorm();
  const double alpha_term = inp.alpha * (mu0_sq + inp.sigma0 * inp.sigma0);
  const double pool = 2.0 * inp.n + inp.m;
  const double n_term = std::sqrt(2.0 * inp.d / pool) + std::sqrt(2.0 * log_inv(inp.delta) / pool);
  const double m_term = std::sqrt(2.0 * log_inv(inp.delta) / inp.m);
  const double first = inp.gamma * std::sqrt((2.0 * inp.d / inp.m) * (alpha_term + n_term));

  BoundReport rep;
  rep.bound_id = 1;
  rep.residual = first + m_term;
  rep.breakdown = {{"alpha_term", alpha_term},
                   {"n_term", n_term},
                   {"labeled_complexity", first},
                   {"m_term", m_term}};
  return rep;
}

BoundReport nonrobust_excess_residual(const BoundInputs& inp) {
  inp.validate();
  require(inp.kind == CovKind::Isotropic, "nonrobust_excess_residual: isotropic inputs required");
  const double mu0_sq = inp.mu0.squaredNorm();
  const double mu1_sq = inp.mu1.squaredNorm();
  const double coeff = std::exp(-mu0_sq / (4.0 * inp.sigma0 * inp.sigma0)) /
                       std::sqrt(2.0 * inp.sigma0 * std::sqrt(2.0 * M_PI));
  const double alpha_term = (mu1_sq + inp.sigma1 * inp.sigma1) * 2.0 * inp.d * inp.alpha / inp.m;
  const double pool = 2.0 * inp.n + inp.m;
  const double n_term =
      (4.0 * inp.d / inp.m) * std::sqrt((2.0 * inp.d + 2.0 * log_inv(inp.delta)) / pool);
  const double m_term = std::sqrt(2.0 * log_inv(inp.delta) / inp.m);
  const double first = coeff * std::pow(alpha_term + n_term, 0.25);

  BoundReport rep;
  rep.bound_id = 2;
  rep.residual = first + m_term;
  rep.breakdown = {{"coeff", coeff},
                   {"alpha_term", alpha_term},
                   {"n_term", n_term},
                   {"excess_term", first},
                   {"m_term", m_term}};
  return rep;
}

GeneralBoundConstants general_bound_constants(const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                             const Matrix& cov1) {
  require(mu0.size() == mu1.size(), "general_bound_constants: mean dimension mismatch");
  require(cov0.rows() == mu0.size() && cov1.rows() == mu1.size(),
          "general_bound_constants: covariance dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es1(cov1);
  require(es1.info() == Eigen::Success, "general_bound_constants: eigendecomposition failed");
  const Vector evals = es1.eigenvalues();  // ascending
  const int d = static_cast<int>(evals.size());
  require(evals[0] > 0.0, "general_bound_constants: cov1 must be positive definite");

  GeneralBoundConstants c;
  c.lambda_max = evals[d - 1];
  c.lambda_min = evals[0];
  c.trace = evals.sum();
  const double tol = kGapTolFactor * c.lambda_max;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double diff = std::abs(evals[j] - evals[i]);
      if (diff > tol) gap = std::min(gap, diff);
    }
  if (!std::isfinite(gap)) {
    throw Error(
        "general_bound_constants: degenerate eigen-gap (all eigenvalues equal within tolerance); "
        "Delta(Sigma) is undefined");
  }
  c.gap = gap;
  c.kappa1 = c.lambda_max / c.lambda_min;
  c.kappa1_prime = c.lambda_max / c.gap;
  c.mu1_mahalanobis = mu1.dot(cov1.ldlt().solve(mu1));
  const double mu0_mahal = mu0.dot(cov0.ldlt().solve(mu0));
  c.vartheta = std::abs(c.mu1_mahalanobis - mu0_mahal);
  c.C = (mu0.squaredNorm() + c.lambda_min * mu0.norm()) / (c.lambda_min * c.lambda_min);
  c.mu1_norm_sq = mu1.squaredNorm();
  return c;
}

BoundReport general_excess_residual(const BoundInputs& inp) {
  inp.validate();
  require(inp.kind == CovKind::General, "general_excess_residual: general-covariance inputs required");
  const GeneralBoundConstants c = general_bound_constants(inp.mu0, inp.cov0, inp.mu1, inp.cov1);

  const double pool = 2.0 * inp.n + inp.m;
  const double sample_term = std::sqrt((inp.mu1.squaredNorm() + c.trace) / inp.m);
  const double shift_term = c.C * inp.alpha + std::sqrt(log_inv(inp.delta) / pool);
  const double spectral_term = inp.d * c.kappa1 * c.kappa1_prime / c.gap;
  // the whole bracket raised to 1/2 (see module notes on the display nesting)
  const double first = std::exp(c.vartheta * c.vartheta) *
                       std::sqrt(sample_term * shift_term * spectral_term);
  const double m_term = std::sqrt(log_inv(inp.delta) / inp.m);

  BoundReport rep;
  rep.bound_id = 3;
  rep.residual = first + m_term;
  rep.breakdown = {{"vartheta", c.vartheta},
                   {"C", c.C},
                   {"kappa1", c.kappa1},
                   {"kappa1_prime", c.kappa1_prime},
                   {"gap", c.gap},
                   {"sample_term", sample_term},
                   {"shift_term", shift_term},
                   {"spectral_term", spectral_term},
                   {"excess_term", first},
                   {"m_term", m_term}};
  return rep;
}

AdvantageRegimes advantage_check(double m, double n, double d, double alpha) {
  require(m > 0.0 && n > 0.0 && d > 0.0, "advantage_check: inputs must be positive");
  require(alpha >= 0.0, "advantage_check: alpha must be >= 0");
  AdvantageRegimes res;
  res.advantage = alpha <= d / m && n >= m * m / d;
  res.dim_free = alpha <= 1.0 / d && n >= d * d * d;
  return res;
}

double robust_gap_bound(const Vector& theta, double gamma, const GmmSpec& spec) {
  spec.validate();
  require(gamma > 0.0, "robust_gap_bound: gamma must be > 0");
  require(std::abs(theta.norm() - 1.0) <= 1e-9, "robust_gap_bound: theta must be unit norm");
  const double a = theta.dot(spec.mu0);
  const double var = spec.kind == CovKind::Isotropic
                         ? spec.sigma0 * spec.sigma0
                         : double(theta.transpose() * spec.cov0 * theta);
  // distance from the mean of y<theta,X> to the active interval [0, 1/gamma]
  double dist = 0.0;
  if (a < 0.0)
    dist = -a;
  else if (a > 1.0 / gamma)
    dist = a - 1.0 / gamma;
  return std::exp(-dist * dist / (2.0 * var)) / (2.0 * gamma * std::sqrt(2.0 * M_PI * var));
}

}  // namespace rss
