// Adversarial perturbation: gradient ascent on z -> loss(z) - gamma * c(z, x)
// starting from z = x, plus an exhaustive line-search oracle used to verify
// the closed forms and the ascent path.
#pragma once

#include "rss/robust_losses.hpp"

namespace rss {

struct PerturbResult {
  Vector z_best;           // best visited point (returned perturbation)
  double value_best = 0;   // objective at z_best
  Vector z_last;           // final iterate
  double value_last = 0;   // objective at the final iterate
};

// cfg.steps >= 1 and cfg.alpha >= 0 required. The step size is decayed
// before each update (alpha_t = alpha / t for t = 1..steps). Throws
// DivergenceError when ||z - x|| exceeds the radius cap and Error when a
// gradient turns non-finite (message carries the step index).
PerturbResult adversarial_perturb(const PointLoss& loss, const Vector& x, double gamma,
                                  CostKind cost, const InnerSolverConfig& cfg);

struct GridResult {
  double value = 0.0;
  Vector z;
};

// Exhaustive max of loss(z) - gamma * c(z, x) over z = x + t * theta,
// t in [-grid_range, grid_range]. For linear models the full sup reduces to
// this line: the loss depends on z only through <theta, z> and both costs are
// minimized by staying on it.
GridResult grid_oracle(const PointLoss& loss, const Vector& theta, const Vector& x,
                       double gamma, CostKind cost, double grid_range, double grid_step);

}  // namespace rss
