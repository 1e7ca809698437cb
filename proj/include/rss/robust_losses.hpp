// Wasserstein-DRO robust surrogate loss phi_gamma: closed forms for the
// zero-one loss with the L2 / squared-L2 transport costs, and a numeric path
// through the inner ascent solver for differentiable losses.
//
// phi_gamma(x, y; theta) = sup_z  loss(z, y; theta) - gamma * c(z, x).
// The dual additive term gamma*epsilon is dropped throughout (gamma is held
// fixed, not optimized).
#pragma once

#include "rss/common.hpp"

#include <functional>

namespace rss {

enum class CostKind { L2, L2Squared };

double cost_value(CostKind kind, const Vector& z, const Vector& x);
// Subgradient 0 is used for the L2 cost at z == x.
Vector cost_grad(CostKind kind, const Vector& z, const Vector& x);

enum class StepDecay { Constant, DivideByStep };

struct InnerSolverConfig {
  int steps = 15;
  double alpha = 0.1;                          // ascent step size
  StepDecay decay = StepDecay::DivideByStep;   // alpha_t = alpha / t
  double radius_cap = 0.0;                     // 0 => 100 * max(1, ||x||)
};

struct RobustConfig {
  double gamma = 1.0;         // labeled dual parameter
  double gamma_prime = 1.0;   // unlabeled dual parameter
  double lambda = 0.0;        // penalty weight
  CostKind labeled_cost = CostKind::L2;
  CostKind unlabeled_cost = CostKind::L2Squared;
  InnerSolverConfig inner;
  void validate() const {
    require(gamma > 0.0, "RobustConfig: gamma must be > 0");
    require(gamma_prime > 0.0, "RobustConfig: gamma_prime must be > 0");
    require(lambda >= 0.0, "RobustConfig: lambda must be >= 0");
  }
};

// min{1, max{0, 1 - gamma * y * <theta,x>}}; requires ||theta|| = 1 and
// refers to the L2 transport cost.
double phi_labeled_closed(const Vector& theta, const Vector& x, int y, double gamma);

// max{0, 1 - gamma' * <theta,x>^2}; the self-labeled term under the squared
// L2 cost, with pseudo-label h_theta(x). Requires ||theta|| = 1.
double phi_unlabeled_closed(const Vector& theta, const Vector& x, double gamma_prime);

// Differentiable per-point loss handle z -> loss(z, y; theta); the label and
// parameters are baked in by the caller (see models::point_loss).
struct PointLoss {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

struct PhiResult {
  double value = 0.0;  // loss(z) - gamma * c(z, x) at the returned point
  Vector z;            // perturbed point, for envelope-theorem gradients
};

// Inner maximization by projected gradient ascent (see inner_solver). Returns
// the best visited point, so the result never falls below the value at z = x.
PhiResult phi_numeric(const PointLoss& loss, const Vector& x, double gamma, CostKind cost,
                      const InnerSolverConfig& cfg);

}  // namespace rss
