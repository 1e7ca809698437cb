#include "rss/gmm_data.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rss {

namespace {

constexpr double kShiftTol = 1e-9;

// Cholesky factor, also the SPD test.
Matrix chol_or_throw(const Matrix& cov, const char* name) {
  require(cov.rows() == cov.cols(), std::string(name) + ": covariance must be square");
  require(cov.isApprox(cov.transpose(), 1e-10), std::string(name) + ": covariance must be symmetric");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(name) + ": covariance is not positive definite");
  }
  return llt.matrixL();
}

double spectral_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

GmmSpec GmmSpec::isotropic(const Vector& mu0, double sigma0) {
  return isotropic_shifted(mu0, sigma0, mu0, sigma0, 0.0);
}

GmmSpec GmmSpec::isotropic_shifted(const Vector& mu0, double sigma0, const Vector& mu1,
                                   double sigma1, double alpha) {
  GmmSpec spec;
  spec.d = static_cast<int>(mu0.size());
  spec.mu0 = mu0;
  spec.mu1 = mu1;
  spec.sigma0 = sigma0;
  spec.sigma1 = sigma1;
  spec.alpha = alpha;
  spec.kind = CovKind::Isotropic;
  spec.validate();
  return spec;
}

GmmSpec GmmSpec::general(const Vector& mu0, const Matrix& cov0) {
  return general_shifted(mu0, cov0, mu0, cov0, 0.0);
}

GmmSpec GmmSpec::general_shifted(const Vector& mu0, const Matrix& cov0, const Vector& mu1,
                                 const Matrix& cov1, double alpha) {
  GmmSpec spec;
  spec.d = static_cast<int>(mu0.size());
  spec.mu0 = mu0;
  spec.mu1 = mu1;
  spec.cov0 = cov0;
  spec.cov1 = cov1;
  spec.alpha = alpha;
  spec.kind = CovKind::General;
  spec.validate();
  return spec;
}

Matrix GmmSpec::covariance0() const {
  if (kind == CovKind::General) return cov0;
  return sigma0 * sigma0 * Matrix::Identity(d, d);
}

Matrix GmmSpec::covariance1() const {
  if (kind == CovKind::General) return cov1;
  return sigma1 * sigma1 * Matrix::Identity(d, d);
}

void GmmSpec::validate() const {
  require(d >= 1, "GmmSpec: dimension must be >= 1");
  require(mu0.size() == d && mu1.size() == d, "GmmSpec: mean dimension mismatch");
  require(is_finite(mu0) && is_finite(mu1), "GmmSpec: means must be finite");
  require(alpha >= 0.0, "GmmSpec: alpha must be >= 0");
  const double mean_drift = (mu0 - mu1).norm();
  require(mean_drift <= kShiftEnvelopeK * alpha + kShiftTol,
          "GmmSpec: ||mu0 - mu1|| exceeds the K*alpha shift envelope");
  if (kind == CovKind::Isotropic) {
    require(sigma0 > 0.0 && sigma1 > 0.0, "GmmSpec: sigma must be > 0");
    require(std::abs(sigma0 - sigma1) <= kShiftEnvelopeK * alpha + kShiftTol,
            "GmmSpec: |sigma0 - sigma1| exceeds the K*alpha shift envelope");
  } else {
    require(cov0.rows() == d && cov1.rows() == d, "GmmSpec: covariance dimension mismatch");
    chol_or_throw(cov0, "GmmSpec cov0");
    chol_or_throw(cov1, "GmmSpec cov1");
    require(spectral_norm(cov1 - cov0) <= kShiftEnvelopeK * alpha + kShiftTol,
            "GmmSpec: ||cov1 - cov0||_2 exceeds the K*alpha shift envelope");
  }
}

Matrix spd_from_eigenvalues(const std::vector<double>& eigenvalues, std::uint64_t basis_seed) {
  const int d = static_cast<int>(eigenvalues.size());
  require(d >= 1, "spd_from_eigenvalues: need at least one eigenvalue");
  for (double ev : eigenvalues) require(ev > 0.0, "spd_from_eigenvalues: eigenvalues must be > 0");
  Rng rng(basis_seed);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Vector lam(d);
  for (int i = 0; i < d; ++i) lam[i] = eigenvalues[i];
  Matrix out = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());  // clean up round-off asymmetry
}

void LabeledSet::validate() const {
  require(features.rows() == labels.size(), "LabeledSet: row/label count mismatch");
  require(features.allFinite(), "LabeledSet: features must be finite");
  for (int i = 0; i < labels.size(); ++i)
    require(labels[i] == 1 || labels[i] == -1, "LabeledSet: labels must be +-1");
}

void UnlabeledSet::validate() const {
  require(features.allFinite(), "UnlabeledSet: features must be finite");
}

LabeledSet sample_labeled(const GmmSpec& spec, int m, std::uint64_t rng_seed) {
  require(m >= 1, "sample_labeled: m must be >= 1");
  spec.validate();
  Rng rng(rng_seed);
  LabeledSet set;
  set.features.resize(m, spec.d);
  set.labels.resize(m);
  const bool general = spec.kind == CovKind::General;
  Matrix chol;
  if (general) chol = chol_or_throw(spec.cov0, "sample_labeled");
  for (int i = 0; i < m; ++i) {
    const int y = rng.uniform() < 0.5 ? -1 : +1;
    Vector z = rng.normal_vector(spec.d);
    Vector x = general ? Vector(double(y) * spec.mu0 + chol * z)
                       : Vector(double(y) * spec.mu0 + spec.sigma0 * z);
    set.features.row(i) = x.transpose();
    set.labels[i] = y;
  }
  return set;
}

LabeledSet sample_labeled_balanced(const GmmSpec& spec, int m, std::uint64_t rng_seed) {
  require(m >= 1, "sample_labeled_balanced: m must be >= 1");
  spec.validate();
  Rng rng(rng_seed);
  LabeledSet set;
  set.features.resize(m, spec.d);
  set.labels.resize(m);
  const bool general = spec.kind == CovKind::General;
  Matrix chol;
  if (general) chol = chol_or_throw(spec.cov0, "sample_labeled_balanced");
  const int positives = (m + 1) / 2;
  for (int i = 0; i < m; ++i) {
    const int y = i < positives ? +1 : -1;
    Vector z = rng.normal_vector(spec.d);
    Vector x = general ? Vector(double(y) * spec.mu0 + chol * z)
                       : Vector(double(y) * spec.mu0 + spec.sigma0 * z);
    set.features.row(i) = x.transpose();
    set.labels[i] = y;
  }
  return set;
}

UnlabeledSet sample_unlabeled(const GmmSpec& spec, int n, std::uint64_t rng_seed) {
  require(n >= 1, "sample_unlabeled: n must be >= 1");
  spec.validate();
  Rng rng(rng_seed);
  UnlabeledSet set;
  set.features.resize(n, spec.d);
  const bool general = spec.kind == CovKind::General;
  Matrix chol;
  if (general) chol = chol_or_throw(spec.cov1, "sample_unlabeled");
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() < 0.5 ? -1.0 : +1.0;
    Vector z = rng.normal_vector(spec.d);
    Vector x = general ? Vector(u * spec.mu1 + chol * z)
                       : Vector(u * spec.mu1 + spec.sigma1 * z);
    set.features.row(i) = x.transpose();
  }
  return set;
}

GmmSpec make_shifted_spec(const GmmSpec& base, double alpha, std::uint64_t direction_seed) {
  require(alpha >= 0.0, "make_shifted_spec: alpha must be >= 0");
  base.validate();
  Rng rng(direction_seed);
  const Vector v = rng.unit_vector(base.d);
  GmmSpec out = base;
  out.mu1 = base.mu0 + alpha * v;
  out.alpha = alpha;
  if (base.kind == CovKind::Isotropic) {
    out.sigma1 = base.sigma0;
  } else {
    out.cov1 = base.cov0;
  }
  out.validate();
  return out;
}

double analytic_risk(const Vector& theta, const GmmSpec& spec) {
  spec.validate();
  require(theta.size() == spec.d, "analytic_risk: theta dimension mismatch");
  const double nrm = theta.norm();
  require(nrm > 0.0, "analytic_risk: theta must be nonzero");
  require(std::abs(nrm - 1.0) <= 1e-9, "analytic_risk: theta must be unit norm");
  const double mean = theta.dot(spec.mu0);
  const double var = spec.kind == CovKind::Isotropic
                         ? spec.sigma0 * spec.sigma0
                         : double(theta.transpose() * spec.cov0 * theta);
  return q_function(mean / std::sqrt(var));
}

namespace {

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, int row, int col) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw Error("csv: cannot parse value '" + s + "' at row " + std::to_string(row) +
                ", column " + std::to_string(col));
  }
}

}  // namespace

void write_labeled_csv(const LabeledSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path);
  if (!out) throw Error("write_labeled_csv: cannot open " + path);
  std::string line = "label";
  for (int j = 0; j < set.d(); ++j) line += ",f" + std::to_string(j);
  out << line << "\n";
  for (int i = 0; i < set.m(); ++i) {
    line = std::to_string(set.labels[i]);
    for (int j = 0; j < set.d(); ++j) {
      line += ',';
      format_double(line, set.features(i, j));
    }
    out << line << "\n";
  }
}

void write_unlabeled_csv(const UnlabeledSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path);
  if (!out) throw Error("write_unlabeled_csv: cannot open " + path);
  std::string line;
  for (int j = 0; j < set.d(); ++j) {
    if (j) line += ',';
    line += "f" + std::to_string(j);
  }
  out << line << "\n";
  for (int i = 0; i < set.n(); ++i) {
    line.clear();
    for (int j = 0; j < set.d(); ++j) {
      if (j) line += ',';
      format_double(line, set.features(i, j));
    }
    out << line << "\n";
  }
}

LabeledSet read_labeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_labeled_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("read_labeled_csv: empty file " + path);
  const auto header = split_csv_line(line);
  require(!header.empty() && header[0] == "label",
          "read_labeled_csv: expected 'label' as the first header column");
  const int d = static_cast<int>(header.size()) - 1;
  require(d >= 1, "read_labeled_csv: no feature columns");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw Error("read_labeled_csv: row " + std::to_string(row) + " has " +
                  std::to_string(fields.size()) + " fields, expected " + std::to_string(d + 1));
    const double lab = parse_double(fields[0], row, 0);
    if (lab != 1.0 && lab != -1.0)
      throw Error("read_labeled_csv: row " + std::to_string(row) + " label must be +-1");
    labels.push_back(static_cast<int>(lab));
    std::vector<double> vals(d);
    for (int j = 0; j < d; ++j) vals[j] = parse_double(fields[j + 1], row, j + 1);
    rows.push_back(std::move(vals));
  }
  LabeledSet set;
  set.features.resize(static_cast<int>(rows.size()), d);
  set.labels.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    set.labels[static_cast<int>(i)] = labels[i];
    for (int j = 0; j < d; ++j) set.features(static_cast<int>(i), j) = rows[i][j];
  }
  set.validate();
  return set;
}

UnlabeledSet read_unlabeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_unlabeled_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("read_unlabeled_csv: empty file " + path);
  const auto header = split_csv_line(line);
  const int d = static_cast<int>(header.size());
  require(d >= 1 && header[0] != "label",
          "read_unlabeled_csv: unlabeled files must not carry a label column");
  std::vector<std::vector<double>> rows;
  int row = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d)
      throw Error("read_unlabeled_csv: row " + std::to_string(row) + " has " +
                  std::to_string(fields.size()) + " fields, expected " + std::to_string(d));
    std::vector<double> vals(d);
    for (int j = 0; j < d; ++j) vals[j] = parse_double(fields[j], row, j);
    rows.push_back(std::move(vals));
  }
  UnlabeledSet set;
  set.features.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) set.features(static_cast<int>(i), j) = rows[i][j];
  set.validate();
  return set;
}

}  // namespace rss
