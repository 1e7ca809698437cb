#include "rss/inner_solver.hpp"

namespace rss {

PerturbResult adversarial_perturb(const PointLoss& loss, const Vector& x, double gamma,
                                  CostKind cost, const InnerSolverConfig& cfg) {
  require(cfg.steps >= 1, "adversarial_perturb: steps must be >= 1");
  require(cfg.alpha >= 0.0, "adversarial_perturb: alpha must be >= 0");
  require(gamma > 0.0, "adversarial_perturb: gamma must be > 0");
  const double radius =
      cfg.radius_cap > 0.0 ? cfg.radius_cap : 100.0 * std::max(1.0, x.norm());

  auto objective = [&](const Vector& z) { return loss.value(z) - gamma * cost_value(cost, z, x); };

  Vector z = x;
  PerturbResult res;
  res.z_best = x;
  res.value_best = objective(x);
  for (int t = 1; t <= cfg.steps; ++t) {
    if (cfg.alpha == 0.0) break;
    // decay applied before the update
    const double step = cfg.decay == StepDecay::DivideByStep ? cfg.alpha / t : cfg.alpha;
    Vector g = loss.grad(z) - gamma * cost_grad(cost, z, x);
    if (!g.allFinite()) {
      throw Error("adversarial_perturb: non-finite gradient at step " + std::to_string(t));
    }
    z += step * g;
    if ((z - x).norm() > radius) {
      throw DivergenceError(
          "adversarial_perturb: iterate left the radius cap at step " + std::to_string(t) +
          " (inner problem looks non-concave; raise gamma or lower alpha)");
    }
    const double val = objective(z);
    if (!std::isfinite(val)) {
      throw Error("adversarial_perturb: non-finite objective at step " + std::to_string(t));
    }
    if (val > res.value_best) {
      res.value_best = val;
      res.z_best = z;
    }
  }
  res.z_last = z;
  res.value_last = objective(z);
  return res;
}

GridResult grid_oracle(const PointLoss& loss, const Vector& theta, const Vector& x, double gamma,
                       CostKind cost, double grid_range, double grid_step) {
  require(grid_range > 0.0 && grid_step > 0.0, "grid_oracle: range and step must be > 0");
  GridResult best;
  best.value = -std::numeric_limits<double>::infinity();
  const long steps = static_cast<long>(grid_range / grid_step);
  Vector z(x.size());
  for (long k = -steps; k <= steps; ++k) {
    const double t = k * grid_step;
    z = x + t * theta;
    const double val = loss.value(z) - gamma * cost_value(cost, z, x);
    if (val > best.value) {
      best.value = val;
      best.z = z;
    }
  }
  return best;
}

}  // namespace rss
