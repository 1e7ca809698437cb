// Numeric evaluators for the generalization-bound residuals (isotropic robust
// and non-robust bounds, the general-covariance bound), the ERM-advantage
// regime conditions, and the robustness-premium gap bound.
//
// All asymptotic O(.) factors are evaluated with constant 1 and flagged in
// each report: absolute values are convention-dependent, only monotonicity
// and comparisons across inputs are meaningful.
#pragma once

#include "rss/gmm_data.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rss {

struct BoundInputs {
  int m = 1, n = 1, d = 1;
  double alpha = 0.0;
  double delta = 0.05;
  double gamma = 1.0;
  Vector mu0, mu1;
  CovKind kind = CovKind::Isotropic;
  double sigma0 = 1.0, sigma1 = 1.0;
  Matrix cov0, cov1;
  double beta = 1.0;  // ||mu1|| >= beta * lambda_max(Sigma1) constant

  static BoundInputs isotropic(int m, int n, int d, double alpha, double delta, double gamma,
                               const Vector& mu0, double sigma0, const Vector& mu1,
                               double sigma1);
  static BoundInputs general(int m, int n, int d, double alpha, double delta, double gamma,
                             const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                             const Matrix& cov1, double beta);
  void validate() const;
};

struct BoundReport {
  int bound_id = 0;  // 1 robust excess, 2 non-robust isotropic, 3 general covariance
  double residual = 0.0;
  std::vector<std::pair<std::string, double>> breakdown;
  bool feasible = true;
  bool constant_one_convention = true;
};

// residual = gamma * sqrt((2d/m) (alpha (||mu0||^2 + sigma0^2)
//            + sqrt(2d/(2n+m)) + sqrt(2 log(1/delta)/(2n+m))))
//            + sqrt(2 log(1/delta)/m)
BoundReport robust_excess_residual(const BoundInputs& inp);

// residual = (e^{-||mu0||^2/4 sigma0^2} / sqrt(2 sigma0 sqrt(2 pi)))
//            * ((||mu1||^2 + sigma1^2) 2 d alpha / m
//               + (4d/m) sqrt((2d + 2 log(1/delta))/(2n+m)))^{1/4}
//            + sqrt(2 log(1/delta)/m)
BoundReport nonrobust_excess_residual(const BoundInputs& inp);

// Spectral constants of the general-covariance bound. Eigenvalues closer than
// 1e-8 * lambda_max are treated as equal when forming the gap.
struct GeneralBoundConstants {
  double vartheta = 0.0;     // |mu1' S1^{-1} mu1 - mu0' S0^{-1} mu0|
  double C = 0.0;            // (||mu0||^2 + lambda_min(S1) ||mu0||) / lambda_min(S1)^2
  double kappa1 = 0.0;       // lambda_max / lambda_min
  double kappa1_prime = 0.0; // lambda_max / Delta
  double gap = 0.0;          // Delta(S1): min difference between distinct eigenvalues
  double lambda_max = 0.0, lambda_min = 0.0;
  double trace = 0.0;
  double mu1_mahalanobis = 0.0;  // mu1' S1^{-1} mu1
  double mu1_norm_sq = 0.0;
};

// Throws on a degenerate eigen-gap (all eigenvalues equal within tolerance).
GeneralBoundConstants general_bound_constants(const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                             const Matrix& cov1);

// residual = e^{vartheta^2} * sqrt( sqrt((||mu1||^2 + Tr(S1))/m)
//            * (C alpha + sqrt(log(1/delta)/(2n+m))) * d k1 k1' / Delta )
//            + sqrt(log(1/delta)/m)
// (the whole bracket under the outer 1/2 power; the constants are reported
// individually in the breakdown).
BoundReport general_excess_residual(const BoundInputs& inp);

struct AdvantageRegimes {
  bool advantage = false;  // alpha <= d/m  and  n >= m^2/d
  bool dim_free = false;   // alpha <= 1/d  and  n >= d^3
};
AdvantageRegimes advantage_check(double m, double n, double d, double alpha);

// Upper bound on E[phi_gamma] - E[loss] for a unit-norm linear classifier
// under P0. With a = <theta, mu0> and v = theta' Sigma0 theta the bound is
//   exp(-dist(a, [0, 1/gamma])^2 / (2v)) / (2 gamma sqrt(2 pi v)),
// the sup-density form of the analytic gap bound. It coincides with the
// e^{-a^2/2v} form whenever a <= 0 (the regime where that display is exact)
// and stays a valid upper bound for a > 0, where the exponent must be clamped
// to the distance between the mean and the active interval.
double robust_gap_bound(const Vector& theta, double gamma, const GmmSpec& spec);

}  // namespace rss
