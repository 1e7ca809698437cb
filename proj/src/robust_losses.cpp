#include "rss/robust_losses.hpp"

#include "rss/inner_solver.hpp"

namespace rss {

double cost_value(CostKind kind, const Vector& z, const Vector& x) {
  const double n = (z - x).norm();
  return kind == CostKind::L2 ? n : n * n;
}

Vector cost_grad(CostKind kind, const Vector& z, const Vector& x) {
  Vector diff = z - x;
  if (kind == CostKind::L2Squared) return 2.0 * diff;
  const double n = diff.norm();
  if (n == 0.0) return Vector::Zero(z.size());
  return diff / n;
}

namespace {

void check_unit(const Vector& theta, const char* who) {
  require(std::abs(theta.norm() - 1.0) <= 1e-9,
          std::string(who) + ": closed form requires ||theta|| = 1");
}

}  // namespace

double phi_labeled_closed(const Vector& theta, const Vector& x, int y, double gamma) {
  check_unit(theta, "phi_labeled_closed");
  require(y == 1 || y == -1, "phi_labeled_closed: y must be +-1");
  require(gamma > 0.0, "phi_labeled_closed: gamma must be > 0");
  const double margin = double(y) * theta.dot(x);
  return std::min(1.0, std::max(0.0, 1.0 - gamma * margin));
}

double phi_unlabeled_closed(const Vector& theta, const Vector& x, double gamma_prime) {
  check_unit(theta, "phi_unlabeled_closed");
  require(gamma_prime > 0.0, "phi_unlabeled_closed: gamma_prime must be > 0");
  const double u = theta.dot(x);
  return std::max(0.0, 1.0 - gamma_prime * u * u);
}

PhiResult phi_numeric(const PointLoss& loss, const Vector& x, double gamma, CostKind cost,
                      const InnerSolverConfig& cfg) {
  const PerturbResult res = adversarial_perturb(loss, x, gamma, cost, cfg);
  return PhiResult{res.value_best, res.z_best};
}

}  // namespace rss
