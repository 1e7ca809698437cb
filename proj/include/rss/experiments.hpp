// Scenario runner: seeded end-to-end experiments over (labeled, unlabeled)
// size grids with ERM baselines and searched RSS models, embedding ingestion,
// and bound-sweep CSV emission.
#pragma once

#include "rss/bounds.hpp"
#include "rss/hyperparams.hpp"
#include "rss/rss_trainer.hpp"

#include <map>
#include <optional>
#include <string>

namespace rss {

struct Scenario {
  std::string id = "scenario";
  enum class Mode { SimulatedIso, SimulatedGeneral, Embeddings };
  Mode mode = Mode::SimulatedIso;

  // simulated modes
  int d = 200;
  double mu0_norm = 1.0;
  double sigma0 = 1.0;                      // calibration: Bayes accuracy Phi(mu0_norm/sigma0)
  std::vector<double> general_eigenvalues;  // simulated-general covariance spectrum
  double alpha = 0.0;                       // absolute shift magnitude
  std::uint64_t spec_seed = 7;              // direction of mu0 and of the shift

  // embeddings mode
  std::string labeled_csv, unlabeled_csv;
  std::map<std::string, int> label_map;  // class name -> {-1,+1}

  std::vector<int> labeled_sizes;
  std::vector<int> unlabeled_sizes;
  int test_size = 10000;
  // Simulated modes score search trials on a held-out synthetic validation
  // draw of this size (tuning data only, never trained on). Ingested data has
  // no generator to draw from, so it falls back to a 20% split of the labeled
  // set when m >= 20 and leave-one-out accuracy otherwise.
  int validation_size = 1000;
  int search_trials = 50;
  int search_epochs = 40;
  int final_epochs = 100;
  int unlabeled_search_cap = 2000;  // unlabeled subsample used inside validation folds
  int inner_steps = 0;              // 0 = closed-form surrogates (linear path)
  ModelSpec::Kind model_kind = ModelSpec::Kind::Linear;
  std::vector<int> mlp_hidden = {64, 64};
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
  static Scenario from_json_file(const std::string& path);
  void to_json_file(const std::string& path) const;
};

struct ResultRow {
  std::string scenario_id;
  int labeled_size = 0;
  int unlabeled_size = 0;  // 0 for ERM rows
  std::string method;      // "ERM" | "RSS"
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;
  double median_accuracy = 0.0;
  TrialConfig chosen;  // hyperparameters of the median-accuracy seed
  bool ok = true;
};

struct RunRow {
  int labeled_size = 0, unlabeled_size = 0;
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  TrialConfig chosen{};
  double validation_score = 0.0;
  bool ok = true;
  std::string error;
  double wall_clock_sec = 0.0;
};

struct ScenarioResult {
  std::vector<ResultRow> rows;
  std::vector<RunRow> runs;
  bool all_ok = true;
};

// For each (m, n) cell and seed: ERM baseline plus RSS tuned by random search
// over the published space on a validation split (20% when m >= 20, else
// leave-one-out), final models retrained on the full data and evaluated on a
// balanced held-out test set. Writes results.csv, runs.csv, per-cell trial
// logs, and per-run train reports under output_dir. Per-cell failures are
// recorded and the run continues.
ScenarioResult run_scenario(const Scenario& scenario);

// Materialize one search trial as a full training configuration using the
// scenario's knobs (model kind, inner steps, epochs).
TrainConfig trial_train_config(const Scenario& knobs, const TrialConfig& trial, int epochs,
                               bool rss, std::uint64_t train_seed);

// Random search over the published space. With a validation set supplied,
// each trial trains on the full labeled set and is scored on it; otherwise
// the split protocol applies (20% holdout when m >= 20, leave-one-out
// accuracy below that). The unlabeled set should already be capped by the
// caller.
SearchResult search_hyperparams(const Scenario& knobs, const LabeledSet& labeled,
                                const UnlabeledSet& unlabeled, bool rss, std::uint64_t seed,
                                const LabeledSet* validation = nullptr);

// CSV ingestion with a class->sign schema; labels may also be numeric +-1.
// Errors (ragged rows, unknown labels, dimension mismatch) carry the row
// number.
std::pair<LabeledSet, UnlabeledSet> ingest_embeddings(const std::string& labeled_csv,
                                                      const std::string& unlabeled_csv,
                                                      const std::map<std::string, int>& schema);

struct BoundSweep {
  int bound_id = 1;  // 1 robust excess, 2 non-robust isotropic, 3 general covariance
  std::vector<int> m_values, n_values, d_values;
  std::vector<double> alpha_values;
  double delta = 0.05;
  double gamma = 1.0;
  double mu0_norm = 1.0, sigma0 = 1.0, sigma1 = 1.0;
  std::vector<double> general_eigenvalues;  // general-covariance evaluator
  double beta = 1.0;
};

// Cartesian grid -> CSV (inputs + residual + breakdown columns).
void emit_bound_sweep(const BoundSweep& sweep, const std::string& out_path);

}  // namespace rss
