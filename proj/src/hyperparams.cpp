#include "rss/hyperparams.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

namespace rss {

SpectralEstimate estimate_spectrum(const UnlabeledSet& data, int max_iterations, int split_id) {
  data.validate();
  const int n = data.n();
  const int d = data.d();
  require(n >= 2, "estimate_spectrum: need at least 2 samples");
  require(max_iterations >= 1, "estimate_spectrum: iteration cap must be >= 1");

  SpectralEstimate est;
  est.n_used = n;
  est.split_id = split_id;
  est.trace_hat = data.features.squaredNorm() / n;
  if (est.trace_hat == 0.0) {
    throw Error("estimate_spectrum: degenerate spectrum (all-zero data)");
  }

  // Matrix-free power iteration: v -> (1/n) X' (X v).
  Rng rng(0x73706563ULL);
  Vector v = rng.unit_vector(d);
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector xv = data.features * v;
    Vector mv = data.features.transpose() * xv / n;
    const double nrm = mv.norm();
    if (nrm == 0.0) {
      // started orthogonal to the data span; re-seed the direction
      v = rng.unit_vector(d);
      continue;
    }
    v = mv / nrm;
    const double next = v.dot(data.features.transpose() * (data.features * v)) / n;
    if (it > 0 && std::abs(next - lambda) <= 1e-8 * std::max(std::abs(next), 1e-300)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Rayleigh quotients of the PSD second moment cannot exceed its trace;
  // clip round-off
  est.lambda_max_hat = std::min(lambda, est.trace_hat);
  return est;
}

UnlabeledSplit split_unlabeled(const UnlabeledSet& data, std::uint64_t seed) {
  require(data.n() >= 2, "split_unlabeled: need at least 2 samples");
  std::vector<int> idx(data.n());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed, 0x73706c69ULL));
  rng.shuffle(idx);
  const int half = data.n() / 2;
  UnlabeledSplit split;
  split.first.features.resize(half, data.d());
  split.second.features.resize(data.n() - half, data.d());
  for (int i = 0; i < half; ++i) split.first.features.row(i) = data.features.row(idx[i]);
  for (int i = half; i < data.n(); ++i)
    split.second.features.row(i - half) = data.features.row(idx[i]);
  return split;
}

IsotropicPrescription prescribe_isotropic(const SpectralEstimate& estimate, int m, int n, int d,
                                          double delta, double sigma0_hat, double alpha) {
  require(n >= 2, "prescribe_isotropic: n must be >= 2");
  require(m >= 1 && d >= 1, "prescribe_isotropic: m and d must be >= 1");
  require(delta > 0.0 && delta < 1.0, "prescribe_isotropic: delta must lie in (0,1)");
  require(estimate.lambda_max_hat > 0.0, "prescribe_isotropic: spectral estimate must be > 0");
  require(sigma0_hat > 0.0, "prescribe_isotropic: sigma0 estimate must be > 0");
  require(alpha >= 0.0, "prescribe_isotropic: alpha must be >= 0");

  const double lam = estimate.lambda_max_hat;
  IsotropicPrescription out;
  // every O(.) instantiated with constant 1
  out.gamma_prime = 1.0 / (lam * std::log(double(n)) + double(d) / n);
  out.s = 1.0 - out.gamma_prime * (lam * (1.0 - alpha) - 3.0 * std::sqrt(double(d) / n));
  out.feasible = out.s >= 0.0 && out.s <= 1.0;
  if (!out.feasible) out.note = "s outside [0,1]; fall back to hyperparameter search";

  const double pool = 2.0 * double(n) + m;
  const double inner =
      std::sqrt((2.0 * d / m) *
                (alpha * lam + std::sqrt((2.0 * d + 2.0 * std::log(1.0 / delta)) / pool))) +
      std::sqrt(2.0 * std::log(1.0 / delta) / m);
  out.gamma = std::exp(-lam / (4.0 * sigma0_hat * sigma0_hat)) /
              std::sqrt(2.0 * sigma0_hat * std::sqrt(2.0 * M_PI)) * std::pow(inner, -0.25);
  if (out.note.empty())
    out.note = "lambda has no closed prescription; (gamma', s) is its dual surrogate";
  return out;
}

GeneralPrescription prescribe_general(const SpectralEstimate& estimate,
                                      const GeneralBoundConstants& constants, double inf_empirical_term,
                                      double alpha, double beta, int m, int n, int d,
                                      double delta, int training_split_id) {
  require(estimate.split_id != training_split_id,
          "prescribe_general: spectral estimate must come from a split independent of the "
          "training unlabeled set");
  require(n >= 2 && m >= 1 && d >= 1, "prescribe_general: bad counts");
  require(delta > 0.0 && delta < 1.0, "prescribe_general: delta must lie in (0,1)");
  require(beta >= 0.0, "prescribe_general: beta must be >= 0");
  require(alpha >= 0.0, "prescribe_general: alpha must be >= 0");
  require(inf_empirical_term >= 0.0, "prescribe_general: inf term must be >= 0");
  if (constants.gap <= 0.0) {
    throw Error("prescribe_general: degenerate eigen-gap (Delta undefined)");
  }

  GeneralPrescription out;
  out.gamma_prime = 2.0 * std::exp(-(beta / 2.0) * std::sqrt(estimate.lambda_max_hat));
  out.s = inf_empirical_term + 12.0 * out.gamma_prime * estimate.trace_hat / std::sqrt(double(n)) +
          2.0 * std::sqrt(std::log(1.0 / delta) / n) + 16.0 * std::sqrt(double(d) / n) + alpha;

  // t' = sqrt( (d k1 k1' / Delta) * e^{mu1' S1^{-1} mu1 / 2}
  //      * (18 g'^2 (Tr + ||mu1||^2) + 5 g' sqrt(log 1/delta) + 24 sqrt(d)
  //         + 4 alpha sqrt(n g')) / (2 sqrt(n)) )
  const double gp = out.gamma_prime;
  const double numerator =
      18.0 * gp * gp * (constants.trace + constants.mu1_norm_sq) +
      5.0 * gp * std::sqrt(std::log(1.0 / delta)) + 24.0 * std::sqrt(double(d)) +
      4.0 * alpha * std::sqrt(double(n) * gp);
  out.t_prime = std::sqrt((double(d) * constants.kappa1 * constants.kappa1_prime / constants.gap) *
                          std::exp(constants.mu1_mahalanobis / 2.0) * numerator /
                          (2.0 * std::sqrt(double(n))));
  out.gamma = std::sqrt(std::sqrt(double(m)) / (2.0 * out.t_prime * estimate.lambda_max_hat));
  return out;
}

double infimum_unlabeled_term(const UnlabeledSet& split, double gamma_prime, int epochs,
                              std::uint64_t seed) {
  split.validate();
  require(split.n() >= 1, "infimum_unlabeled_term: empty split");
  require(gamma_prime > 0.0, "infimum_unlabeled_term: gamma_prime must be > 0");
  require(epochs >= 1, "infimum_unlabeled_term: epochs must be >= 1");

  // Warm start at the top eigenvector of the second moment (the small-gamma'
  // minimizer), then refine with projected gradient steps on the term itself.
  Vector theta = Rng(mix_seed(seed, 0x696e66ULL)).unit_vector(split.d());
  for (int it = 0; it < 200; ++it) {
    Vector mv = split.features.transpose() * (split.features * theta) / split.n();
    const double nrm = mv.norm();
    if (nrm == 0.0) break;
    Vector next = mv / nrm;
    const bool converged = (next - theta).norm() < 1e-10;
    theta = next;
    if (converged) break;
  }

  auto term = [&](const Vector& w) {
    double sum = 0.0;
    for (int j = 0; j < split.n(); ++j) {
      const double u = split.features.row(j).dot(w);
      sum += std::max(0.0, 1.0 - gamma_prime * u * u);
    }
    return sum / split.n();
  };

  double best = term(theta);
  const double lr = 0.1;
  for (int e = 0; e < epochs; ++e) {
    Vector g = Vector::Zero(split.d());
    for (int j = 0; j < split.n(); ++j) {
      const auto row = split.features.row(j);
      const double u = row.dot(theta);
      if (1.0 - gamma_prime * u * u > 0.0) g.noalias() += -2.0 * gamma_prime * u * row.transpose();
    }
    g /= split.n();
    theta -= lr * g;
    const double nrm = theta.norm();
    if (nrm == 0.0) break;
    theta /= nrm;
    best = std::min(best, term(theta));
  }
  return best;
}

void SearchSpace::validate() const {
  // the published search space, exactly
  require(lr_lo == -5 && lr_hi == -1 && wd_lo == -7 && wd_hi == -2 && lambda_lo == -5 &&
              lambda_hi == 2 && alpha_lo == -5 && alpha_hi == 1 && gamma_lo == -7 &&
              gamma_hi == 2 && gamma_prime_lo == -7 && gamma_prime_hi == 2,
          "SearchSpace: exponent ranges must match the published search space");
}

SearchResult random_search(const SearchSpace& space, int trials,
                           const std::function<double(const TrialConfig&)>& objective,
                           std::uint64_t seed) {
  space.validate();
  require(trials >= 1, "random_search: trials must be >= 1");
  require(objective != nullptr, "random_search: objective required");

  Rng rng(mix_seed(seed, 0x736561726368ULL));
  SearchResult out;
  for (int t = 0; t < trials; ++t) {
    TrialRecord rec;
    rec.config = TrialConfig{rng.uniform_int(space.lr_lo, space.lr_hi),
                             rng.uniform_int(space.wd_lo, space.wd_hi),
                             rng.uniform_int(space.lambda_lo, space.lambda_hi),
                             rng.uniform_int(space.alpha_lo, space.alpha_hi),
                             rng.uniform_int(space.gamma_lo, space.gamma_hi),
                             rng.uniform_int(space.gamma_prime_lo, space.gamma_prime_hi)};
    try {
      rec.score = objective(rec.config);
      rec.ok = std::isfinite(rec.score);
      if (!rec.ok) rec.error = "non-finite score";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    if (rec.ok && rec.score > out.best_score) {  // ties keep the earliest trial
      out.best_score = rec.score;
      out.best = rec.config;
      out.best_index = t;
    }
    out.log.push_back(std::move(rec));
  }
  if (out.best_index < 0) throw Error("random_search: every trial failed");
  return out;
}

void write_trial_log_csv(const SearchResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_trial_log_csv: cannot open " + path);
  out << "trial,lr_exp,weight_decay_exp,lambda_exp,alpha_exp,gamma_exp,gamma_prime_exp,"
         "validation_accuracy,status\n";
  char buf[256];
  for (std::size_t t = 0; t < result.log.size(); ++t) {
    const TrialRecord& r = result.log[t];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%d,%d,%d,%d,%.17g,%s\n", t, r.config.lr_exp,
                  r.config.wd_exp, r.config.lambda_exp, r.config.alpha_exp, r.config.gamma_exp,
                  r.config.gamma_prime_exp, r.score, r.ok ? "ok" : "failed");
    out << buf;
  }
}

}  // namespace rss
