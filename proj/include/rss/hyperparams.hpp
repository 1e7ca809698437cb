// Plug-in hyperparameter prescriptions (gamma', s, gamma for
// the isotropic and general mixtures), the power-iteration spectral estimator
// they rely on, and the log-uniform random search harness.
//
// Every O(.) factor in the prescriptions is instantiated with constant 1
// (O(d/n) := d/n and so on); absolute values are convention-dependent, only
// monotonicity and comparisons are meaningful.
#pragma once

#include "rss/bounds.hpp"
#include "rss/gmm_data.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace rss {

struct SpectralEstimate {
  double lambda_max_hat = 0.0;  // top eigenvalue of the sample second moment
  double trace_hat = 0.0;
  int n_used = 0;
  int split_id = 0;  // identifier of the sample split the estimate came from
};

// Power iteration on the uncentered second-moment matrix (1/n) sum x x', run
// matrix-free to relative tolerance 1e-8 or the iteration cap. The trace is
// computed exactly.
SpectralEstimate estimate_spectrum(const UnlabeledSet& data, int max_iterations = 1000,
                                   int split_id = 0);

// Seeded half/half split; the halves carry split ids 1 and 2.
struct UnlabeledSplit {
  UnlabeledSet first, second;
  int first_id = 1, second_id = 2;
};
UnlabeledSplit split_unlabeled(const UnlabeledSet& data, std::uint64_t seed);

struct IsotropicPrescription {
  double gamma = 0.0;
  double gamma_prime = 0.0;
  double s = 0.0;
  bool feasible = true;    // false when s falls outside [0, 1]
  std::string note;        // lambda has no closed prescription; see below
};

// gamma' = 1 / (lambda_hat * log n + d/n)
// s      = 1 - gamma' * (lambda_hat * (1 - alpha) - 3 sqrt(d/n))
// gamma  = (e^{-lambda_hat / 4 sigma0^2} / sqrt(2 sigma0 sqrt(2 pi)))
//          * ( sqrt((2d/m)(alpha lambda_hat + sqrt((2d + 2 log(1/delta))/(2n+m))))
//              + sqrt(2 log(1/delta)/m) )^{-1/4}
// The penalty weight lambda itself has no closed form; (gamma', s) act as its
// dual surrogate and lambda is obtained by random search.
IsotropicPrescription prescribe_isotropic(const SpectralEstimate& estimate, int m, int n, int d,
                                          double delta, double sigma0_hat, double alpha);

struct GeneralPrescription {
  double gamma_prime = 0.0;
  double s = 0.0;
  double gamma = 0.0;
  double t_prime = 0.0;
};

// gamma' = 2 exp(-(beta/2) sqrt(lambda_hat))
// s      = inf_term + 12 gamma' Tr(Sigma_hat)/sqrt(n) + 2 sqrt(log(1/delta)/n)
//          + 16 sqrt(d/n) + alpha
// gamma  = sqrt( sqrt(m) / (2 t' lambda_hat) ), with t' assembled from the
// spectral constants (kappa1, kappa1', Delta, mu' Sigma^{-1} mu).
// The estimate must come from a split independent of the training unlabeled
// set; training_split_id is rejected when it matches estimate.split_id.
GeneralPrescription prescribe_general(const SpectralEstimate& estimate,
                                      const GeneralBoundConstants& constants,
                                      double inf_empirical_term, double alpha, double beta,
                                      int m, int n, int d, double delta,
                                      int training_split_id);

// Approximates inf over unit theta of the empirical unlabeled term by
// minimizing it alone with projected gradient steps.
double infimum_unlabeled_term(const UnlabeledSet& split, double gamma_prime, int epochs,
                              std::uint64_t seed);

// Log-uniform integer exponent ranges, exactly the published search space.
struct SearchSpace {
  int lr_lo = -5, lr_hi = -1;
  int wd_lo = -7, wd_hi = -2;
  int lambda_lo = -5, lambda_hi = 2;
  int alpha_lo = -5, alpha_hi = 1;   // inner ascent step size
  int gamma_lo = -7, gamma_hi = 2;
  int gamma_prime_lo = -7, gamma_prime_hi = 2;
  void validate() const;
};

struct TrialConfig {
  int lr_exp, wd_exp, lambda_exp, alpha_exp, gamma_exp, gamma_prime_exp;
  double lr() const { return std::pow(10.0, lr_exp); }
  double weight_decay() const { return std::pow(10.0, wd_exp); }
  double lambda() const { return std::pow(10.0, lambda_exp); }
  double alpha() const { return std::pow(10.0, alpha_exp); }
  double gamma() const { return std::pow(10.0, gamma_exp); }
  double gamma_prime() const { return std::pow(10.0, gamma_prime_exp); }
};

struct TrialRecord {
  TrialConfig config;
  double score = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

struct SearchResult {
  TrialConfig best{};
  double best_score = -std::numeric_limits<double>::infinity();
  int best_index = -1;
  std::vector<TrialRecord> log;
};

// Uniform draws over the integer exponent grids; the objective returns a
// validation accuracy to maximize. Callback failures are recorded per trial
// and the search continues. Ties keep the earliest trial.
SearchResult random_search(const SearchSpace& space, int trials,
                           const std::function<double(const TrialConfig&)>& objective,
                           std::uint64_t seed);

// One row per trial: exponents, validation accuracy, status.
void write_trial_log_csv(const SearchResult& result, const std::string& path);

}  // namespace rss
