// The RSS objective (labeled robust term + lambda-weighted self-labeled
// robust penalty) and its mini-batch training loop, plus the labeled-only ERM
// baseline and the constrained-view feasibility check.
//
// The training loop follows the paired-batch scheme: both sets are split into
// k batches per epoch (k = batch_split, default 2); the shorter loader is
// cycled when sizes differ. Per batch, unlabeled points are self-labeled with
// the current model before any perturbation and never cached across steps.
// With inner.steps == 0 (or alpha == 0) the perturbation is skipped, which
// for unit-norm linear models trains directly on the closed-form surrogates.
#pragma once

#include "rss/gmm_data.hpp"
#include "rss/models.hpp"

#include <cstdint>
#include <string>

namespace rss {

struct ModelSpec {
  enum class Kind { Linear, Mlp };
  Kind kind = Kind::Linear;
  bool normalize = true;            // unit-norm projection (linear only)
  bool use_bias = false;
  std::vector<int> hidden = {64, 64};
  int outputs = 2;                  // MLP scores; CE uses 2 per binary head
  double leaky_slope = 0.01;
};

struct TrainConfig {
  int epochs = 100;
  int batch_split = 2;          // Algorithm-2 style k: batch size = set size / k
  double learning_rate = 0.05;
  double weight_decay = 0.0;
  bool adaptive = true;         // momentum-free per-parameter scaling
  RobustConfig robust;          // gamma, gamma_prime, lambda, costs, inner solver
  std::uint64_t seed = 0;
  ModelSpec model;

  void validate() const {
    require(epochs >= 1, "TrainConfig: epochs must be >= 1");
    require(learning_rate > 0.0, "TrainConfig: learning_rate must be > 0");
    require(weight_decay >= 0.0, "TrainConfig: weight_decay must be >= 0");
    require(batch_split >= 1, "TrainConfig: batch_split must be >= 1");
    robust.validate();
  }
};

struct TrainReport {
  Model model;
  std::vector<double> labeled_obj;    // per-epoch labeled robust term
  std::vector<double> unlabeled_obj;  // per-epoch lambda-weighted unlabeled term
  std::vector<double> total_obj;
  double wall_clock_sec = 0.0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct RssObjective {
  double total = 0.0;
  double labeled = 0.0;    // (1/m) sum phi_gamma
  double unlabeled = 0.0;  // (lambda/n) sum phi_gamma' at self-labels
};

// Full-set objective at the given model. Self-labels are recomputed from the
// model on every call. Unit-norm linear models evaluate the closed forms;
// everything else goes through the inner solver with cfg.inner.
RssObjective rss_objective(const Model& model, const LabeledSet& labeled,
                           const UnlabeledSet& unlabeled, const RobustConfig& cfg);

TrainReport train_rss(const LabeledSet& labeled, const UnlabeledSet& unlabeled,
                      const TrainConfig& cfg, const LabeledSet* test = nullptr);

// Labeled-only baseline: train_rss with lambda = 0 and no perturbation (the
// plain-loss path).
TrainReport train_erm(const LabeledSet& labeled, const TrainConfig& cfg,
                      const LabeledSet* test = nullptr);

// Constrained reformulation check: (1/n) sum phi_gamma'(x', h_theta(x'); theta) <= s.
bool constrained_view_check(const LinearParams& model, const UnlabeledSet& unlabeled,
                            double gamma_prime, double s);

double accuracy(const Model& model, const LabeledSet& set);

// Flat key-value JSON for configs, JSON + per-epoch CSV for reports.
void write_train_config_json(const TrainConfig& cfg, const std::string& path);
TrainConfig read_train_config_json(const std::string& path);
void write_train_report(const TrainReport& report, const std::string& json_path,
                        const std::string& epochs_csv_path);

}  // namespace rss
