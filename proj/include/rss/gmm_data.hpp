// Two-component Gaussian mixture benchmark: samplers for the labeled
// distribution P0 and the shifted unlabeled marginal P1, controlled shift
// construction, analytic 0-1 risk of linear classifiers, and CSV dataset io.
//
// Conventions. P0 draws y uniform on {-1,+1} and X ~ N(y*mu0, Sigma0); the
// unlabeled marginal is the balanced mixture (1/2) N(mu1, Sigma1) +
// (1/2) N(-mu1, Sigma1). A point is counted as misclassified by theta when
// y<theta,X> <= 0 (the risk convention used throughout; the sign convention
// at exactly zero is the pessimistic one for risk, while predict() breaks the
// tie toward +1).
#pragma once

#include "rss/common.hpp"

#include <cstdint>
#include <string>

namespace rss {

enum class CovKind { Isotropic, General };

// Shift envelope constant: mean / covariance drift between P0 and P1 is
// required to stay within K * alpha with K = 1 (mean moved exactly alpha
// along a unit direction, variance unshifted, matching the experiment
// construction).
inline constexpr double kShiftEnvelopeK = 1.0;

struct GmmSpec {
  int d = 0;
  Vector mu0, mu1;
  CovKind kind = CovKind::Isotropic;
  double sigma0 = 1.0, sigma1 = 1.0;  // isotropic mode
  Matrix cov0, cov1;                  // general mode (SPD)
  double alpha = 0.0;                 // declared shift magnitude

  static GmmSpec isotropic(const Vector& mu0, double sigma0);
  static GmmSpec isotropic_shifted(const Vector& mu0, double sigma0, const Vector& mu1,
                                   double sigma1, double alpha);
  static GmmSpec general(const Vector& mu0, const Matrix& cov0);
  static GmmSpec general_shifted(const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                                 const Matrix& cov1, double alpha);

  Matrix covariance0() const;  // d x d, also valid in isotropic mode
  Matrix covariance1() const;

  // Throws on dimension mismatch, non-SPD covariance, or a mu/sigma drift
  // exceeding the K * alpha envelope.
  void validate() const;
};

// SPD matrix with the given eigenvalues and a seeded random orthogonal basis;
// used to build general-covariance specs with controllable eigen-gaps.
Matrix spd_from_eigenvalues(const std::vector<double>& eigenvalues, std::uint64_t basis_seed);

struct LabeledSet {
  RowMatrix features;      // m x d
  Eigen::VectorXi labels;  // entries in {-1, +1}
  int m() const { return static_cast<int>(features.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

struct UnlabeledSet {
  RowMatrix features;  // n x d
  int n() const { return static_cast<int>(features.rows()); }
  int d() const { return static_cast<int>(features.cols()); }
  void validate() const;
};

LabeledSet sample_labeled(const GmmSpec& spec, int m, std::uint64_t rng_seed);

// Exact class split (ceil(m/2) positives), for test sets that the experiment
// protocol requires to be balanced.
LabeledSet sample_labeled_balanced(const GmmSpec& spec, int m, std::uint64_t rng_seed);

UnlabeledSet sample_unlabeled(const GmmSpec& spec, int n, std::uint64_t rng_seed);

// mu1 = mu0 + alpha * v for a seeded uniform unit direction v; sigma (or
// covariance) carried over unchanged.
GmmSpec make_shifted_spec(const GmmSpec& base, double alpha, std::uint64_t direction_seed);

// Exact 0-1 risk of sign(<theta,.>) under P0: Q(<theta,mu0> / sqrt(theta' Sigma0 theta)).
// Requires ||theta|| = 1 within 1e-9.
double analytic_risk(const Vector& theta, const GmmSpec& spec);

// CSV layout: header row, one sample per row, label column first for labeled
// sets ("label,f0,...,f{d-1}"), plain "f0,..." otherwise. Doubles are written
// with 17 significant digits so a write/read cycle is bit-exact.
void write_labeled_csv(const LabeledSet& set, const std::string& path);
void write_unlabeled_csv(const UnlabeledSet& set, const std::string& path);
LabeledSet read_labeled_csv(const std::string& path);
UnlabeledSet read_unlabeled_csv(const std::string& path);

}  // namespace rss
