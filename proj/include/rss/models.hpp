// Linear classifier and a small leaky-rectifier MLP with explicit forward,
// loss, and gradient evaluation (manual backpropagation). Gradients are
// produced both for the parameters (outer descent) and for the input (inner
// adversarial ascent).
#pragma once

#include "rss/robust_losses.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rss {

// Loss kinds. The margin surrogates carry the dual parameter as a scale:
//   Hinge01Surrogate: min{1, max{0, 1 - gamma * y * f(x)}}     (labeled)
//   SquaredMargin:    max{0, 1 - gamma * f(x)^2}               (self-labeled)
//   CrossEntropy:     2-class softmax CE for MLPs, logistic log(1+e^{-y f})
//                     for linear models.
// Subgradient 0 is taken at hinge kinks.
enum class LossKind { Hinge01Surrogate, CrossEntropy, SquaredMargin };

struct LossSpec {
  LossKind kind = LossKind::Hinge01Surrogate;
  double gamma = 1.0;  // margin scale for the surrogates; unused by CE
};

struct LinearParams {
  Vector w;
  bool normalize = true;  // project to the unit sphere after updates
  bool use_bias = false;  // off by default (the margin surrogates assume none)
  double bias = 0.0;

  double score(const Vector& x) const;
  // sign(<w,x>) with sign(0) = +1
  int predict(const Vector& x) const { return score(x) >= 0.0 ? +1 : -1; }
  void project() {
    if (normalize) {
      const double nrm = w.norm();
      require(nrm > 0.0, "LinearParams: cannot normalize a zero weight vector");
      w /= nrm;
    }
  }
};

struct MlpParams {
  std::vector<int> sizes;  // input d, hidden widths..., output k
  std::vector<Matrix> weights;  // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Vector> biases;
  double leaky_slope = 0.01;

  static MlpParams init(const std::vector<int>& sizes, Rng& rng, double leaky_slope = 0.01);

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  Vector scores(const Vector& x) const;
  // argmax score; class 1 maps to +1, class 0 to -1 (binary heads use k = 2)
  int predict(const Vector& x) const;
  // f(x) = score[1] - score[0], the margin the surrogates act on
  double margin(const Vector& x) const;
  void validate() const;
};

struct Model {
  std::variant<LinearParams, MlpParams> value;
  bool is_linear() const { return std::holds_alternative<LinearParams>(value); }
  LinearParams& linear() { return std::get<LinearParams>(value); }
  const LinearParams& linear() const { return std::get<LinearParams>(value); }
  MlpParams& mlp() { return std::get<MlpParams>(value); }
  const MlpParams& mlp() const { return std::get<MlpParams>(value); }
  int predict(const Vector& x) const;
};

// Scalar core of the margin losses: value and derivative w.r.t. the score f.
void margin_loss_scalar(const LossSpec& loss, double f, int y, double* value, double* dfdv);

struct LinearGrad {
  double value = 0.0;
  Vector w_grad;
  double bias_grad = 0.0;
  Vector x_grad;
};

struct MlpGrad {
  double value = 0.0;
  std::vector<Matrix> w_grad;
  std::vector<Vector> b_grad;
  Vector x_grad;
};

LinearGrad loss_and_grad(const LinearParams& model, const Vector& x, int y, const LossSpec& loss);
MlpGrad loss_and_grad(const MlpParams& model, const Vector& x, int y, const LossSpec& loss);

// Input-gradient view of the loss for the inner solver; theta and y are fixed.
PointLoss point_loss(const LinearParams& model, const LossSpec& loss, int y);
PointLoss point_loss(const MlpParams& model, const LossSpec& loss, int y);
PointLoss point_loss(const Model& model, const LossSpec& loss, int y);

// Checkpoint format: one JSON header line (kind, layer sizes, flags) followed
// by a single CSV row of all parameters.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace rss
