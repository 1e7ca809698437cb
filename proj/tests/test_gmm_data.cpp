#include "rss/gmm_data.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace rss;

namespace {

// Independent tail-probability oracle: trapezoid integration of the standard
// normal density, no erfc involved.
double q_oracle(double x) {
  const double hi = x + 12.0;
  const int steps = 400000;
  const double h = (hi - x) / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = x + i * h;
    const double f = std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    sum += (i == 0 || i == steps) ? 0.5 * f : f;
  }
  return sum * h;
}

Vector unit(int d, int axis) {
  Vector v = Vector::Zero(d);
  v[axis] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("labeled sampler: 1-d labels and symmetry") {
  GmmSpec spec = GmmSpec::isotropic(Vector::Zero(1), 1.0);
  LabeledSet s = sample_labeled(spec, 4, 11);
  CHECK(s.m() == 4);
  for (int i = 0; i < 4; ++i) CHECK((s.labels[i] == 1 || s.labels[i] == -1));

  // empirical label mean shrinks like the Hoeffding envelope
  LabeledSet big = sample_labeled(spec, 20000, 12);
  double mean = 0.0;
  for (int i = 0; i < big.m(); ++i) mean += big.labels[i];
  mean /= big.m();
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(0.25 / big.m()));
}

TEST_CASE("labeled sampler: class-conditional mean recovered (Monte-Carlo oracle)") {
  const int d = 200, m = 100000;
  Rng dir(5);
  Vector mu0 = dir.unit_vector(d);
  GmmSpec spec = GmmSpec::isotropic(mu0, 1.0);
  LabeledSet s = sample_labeled(spec, m, 21);
  Vector acc = Vector::Zero(d);
  for (int i = 0; i < m; ++i) acc += double(s.labels[i]) * s.features.row(i).transpose();
  acc /= m;
  // E[yX] = mu0; the l2 error concentrates below sigma*(sqrt(d/m) + 3/sqrt(m))
  const double envelope = 1.0 * (std::sqrt(double(d) / m) + 3.0 / std::sqrt(double(m)));
  CHECK((acc - mu0).norm() <= envelope);
}

TEST_CASE("labeled sampler: deterministic under fixed seed") {
  GmmSpec spec = GmmSpec::isotropic(unit(3, 0), 2.0);
  LabeledSet a = sample_labeled(spec, 50, 77);
  LabeledSet b = sample_labeled(spec, 50, 77);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.labels - b.labels).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("labeled sampler: class balance envelope") {
  GmmSpec spec = GmmSpec::isotropic(unit(2, 0), 1.0);
  int fails = 0;
  const int trials = 100, m = 400;
  for (int t = 0; t < trials; ++t) {
    LabeledSet s = sample_labeled(spec, m, 1000 + t);
    int pos = 0;
    for (int i = 0; i < m; ++i) pos += s.labels[i] == 1;
    if (std::abs(double(pos) / m - 0.5) > 3.0 * std::sqrt(0.25 / m)) ++fails;
  }
  CHECK(fails <= 1);
}

TEST_CASE("unlabeled sampler: alpha=0 matches the labeled marginal moments") {
  const int d = 5, n = 60000;
  Rng dir(6);
  Vector mu = dir.unit_vector(d);
  GmmSpec spec = GmmSpec::isotropic(mu, 1.0);
  UnlabeledSet u = sample_unlabeled(spec, n, 31);
  Vector mean = u.features.colwise().mean().transpose();
  CHECK(mean.norm() <= 0.03);  // mixture mean is zero
}

TEST_CASE("unlabeled sampler: mixture second moment (analytic oracle)") {
  // covariance of the balanced mixture is Sigma1 + mu1 mu1'
  const int d = 2, n = 100000;
  Vector mu1 = unit(d, 0);
  GmmSpec spec = GmmSpec::isotropic(mu1, 1.0);
  UnlabeledSet u = sample_unlabeled(spec, n, 32);
  Matrix second = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Vector x = u.features.row(i).transpose();
    second += x * x.transpose();
  }
  second /= n;
  Matrix expected = Matrix::Identity(d, d) + mu1 * mu1.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(second - expected);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("unlabeled sampler: single row") {
  GmmSpec spec = GmmSpec::isotropic(unit(4, 1), 0.5);
  UnlabeledSet u = sample_unlabeled(spec, 1, 3);
  CHECK(u.n() == 1);
  CHECK(u.features.allFinite());
}

TEST_CASE("invalid spec rejected") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(GmmSpec::general(unit(2, 0), bad), std::invalid_argument);
}

TEST_CASE("make_shifted_spec: exact magnitude, sigma preserved") {
  Rng dir(9);
  Vector mu0 = dir.unit_vector(50);
  GmmSpec base = GmmSpec::isotropic(mu0, 1.3);

  GmmSpec zero = make_shifted_spec(base, 0.0, 5);
  CHECK((zero.mu1 - mu0).norm() == 0.0);

  GmmSpec half = make_shifted_spec(base, 0.5 * mu0.norm(), 5);
  CHECK((half.mu1 - half.mu0).norm() == doctest::Approx(0.5 * mu0.norm()).epsilon(1e-12));
  CHECK(half.sigma1 == 1.3);

  GmmSpec other = make_shifted_spec(base, 0.5 * mu0.norm(), 6);
  CHECK((other.mu1 - half.mu1).norm() > 1e-6);  // distinct directions
  CHECK((other.mu1 - other.mu0).norm() ==
        doctest::Approx((half.mu1 - half.mu0).norm()).epsilon(1e-12));
}

TEST_CASE("make_shifted_spec: covariance carried over exactly (general mode)") {
  Matrix cov = spd_from_eigenvalues({1.0, 2.0, 4.0}, 17);
  Vector mu0 = unit(3, 0);
  GmmSpec base = GmmSpec::general(mu0, cov);
  GmmSpec shifted = make_shifted_spec(base, 0.25, 8);
  CHECK((shifted.cov1 - base.cov0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spd_from_eigenvalues: spectrum matches the request") {
  Matrix cov = spd_from_eigenvalues({0.5, 1.5, 3.0, 3.0}, 23);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(es.eigenvalues()[3] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("analytic risk: orthogonal direction is chance") {
  GmmSpec spec = GmmSpec::isotropic(unit(2, 0), 1.0);
  CHECK(analytic_risk(unit(2, 1), spec) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("analytic risk: Q(1) against the integration oracle") {
  GmmSpec spec = GmmSpec::isotropic(unit(2, 0), 1.0);
  const double risk = analytic_risk(unit(2, 0), spec);
  CHECK(risk == doctest::Approx(q_oracle(1.0)).epsilon(1e-7));
  CHECK(risk == doctest::Approx(0.15866).epsilon(1e-4));
}

TEST_CASE("analytic risk: general covariance, formula vs Monte-Carlo") {
  Matrix cov(2, 2);
  cov << 1.0, 0.0, 0.0, 4.0;
  Vector mu(2);
  mu << 1.0, 1.0;
  GmmSpec spec = GmmSpec::general_shifted(mu, cov, mu, cov, 0.0);
  const Vector theta = unit(2, 0);
  const double risk = analytic_risk(theta, spec);
  CHECK(risk == doctest::Approx(q_oracle(1.0)).epsilon(1e-7));

  // Monte-Carlo cross-check of the misclassification convention y<theta,X> <= 0
  const int draws = 2000000;
  LabeledSet s = sample_labeled(spec, draws, 77);
  long bad = 0;
  for (int i = 0; i < draws; ++i)
    if (double(s.labels[i]) * s.features.row(i).dot(theta) <= 0.0) ++bad;
  CHECK(std::abs(double(bad) / draws - risk) <= 1.5e-3);
}

TEST_CASE("analytic risk: zero and non-unit theta rejected") {
  GmmSpec spec = GmmSpec::isotropic(unit(2, 0), 1.0);
  CHECK_THROWS_AS(analytic_risk(Vector::Zero(2), spec), std::invalid_argument);
  CHECK_THROWS_AS(analytic_risk(2.0 * unit(2, 0), spec), std::invalid_argument);
}

TEST_CASE("empirical risk converges to the analytic value (Hoeffding envelope)") {
  Rng dir(13);
  Vector mu0 = dir.unit_vector(10);
  GmmSpec spec = GmmSpec::isotropic(mu0, 1.0);
  Vector theta = dir.unit_vector(10);
  const double truth = analytic_risk(theta, spec);
  const int trials = 100, N = 2000;
  int fails = 0;
  for (int t = 0; t < trials; ++t) {
    LabeledSet s = sample_labeled(spec, N, 500 + t);
    int bad = 0;
    for (int i = 0; i < N; ++i)
      if (double(s.labels[i]) * s.features.row(i).dot(theta) <= 0.0) ++bad;
    if (std::abs(double(bad) / N - truth) > 3.0 * std::sqrt(0.25 / N)) ++fails;
  }
  CHECK(fails <= 1);
}

TEST_CASE("balanced sampler: exact split") {
  GmmSpec spec = GmmSpec::isotropic(unit(3, 0), 1.0);
  LabeledSet s = sample_labeled_balanced(spec, 101, 4);
  int pos = 0;
  for (int i = 0; i < s.m(); ++i) pos += s.labels[i] == 1;
  CHECK(pos == 51);
}

TEST_CASE("dataset csv round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rss_gmm_csv_test";
  fs::create_directories(dir);

  Rng r(3);
  GmmSpec spec = GmmSpec::isotropic(r.unit_vector(7), 0.9);
  LabeledSet lab = sample_labeled(spec, 23, 6);
  UnlabeledSet unl = sample_unlabeled(spec, 17, 7);

  write_labeled_csv(lab, (dir / "lab.csv").string());
  write_unlabeled_csv(unl, (dir / "unl.csv").string());
  LabeledSet lab2 = read_labeled_csv((dir / "lab.csv").string());
  UnlabeledSet unl2 = read_unlabeled_csv((dir / "unl.csv").string());

  CHECK((lab2.features - lab.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lab2.labels - lab.labels).cwiseAbs().maxCoeff() == 0);
  CHECK((unl2.features - unl.features).cwiseAbs().maxCoeff() == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("labeled csv: ragged row reported with its number") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "rss_ragged.csv";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("label,f0,f1\n1,0.5,0.25\n-1,0.125\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(read_labeled_csv(path.string()),
                       doctest::Contains("row 3"), Error);
  fs::remove(path);
}
