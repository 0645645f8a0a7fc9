#include <doctest.h>

#include <cmath>
#include <random>

#include "regtrace/eigensolver.hpp"
#include "oracles.hpp"

using namespace regtrace;

TEST_CASE("eigh solves analytic 2x2 cases") {
  Eigen::MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  const SpectrumResult r = eigh(m);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.values[1] == doctest::Approx(3.0).epsilon(1e-14));

  Eigen::MatrixXd m2(2, 2);
  m2 << 1, 0.5, 0.5, 2;
  const SpectrumResult r2 = eigh(m2);
  CHECK(r2.values[0] == doctest::Approx(1.5 - std::sqrt(2.0) / 2).epsilon(1e-14));
  CHECK(r2.values[1] == doctest::Approx(1.5 + std::sqrt(2.0) / 2).epsilon(1e-14));
}

TEST_CASE("diagonal input returns sorted diagonal") {
  Eigen::VectorXd d(5);
  d << 4.0, 1.0, 3.0, -2.0, 0.5;
  const SpectrumResult r = eigh(Eigen::MatrixXd(d.asDiagonal()));
  Eigen::VectorXd sorted = d;
  std::sort(sorted.begin(), sorted.end());
  CHECK((r.values - sorted).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigh matches the characteristic polynomial oracle on random 3x3") {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 60; ++rep) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        a(i, j) = u(oracle::rng());
        a(j, i) = a(i, j);
      }
    const auto expect = oracle::eig3_charpoly(a);
    const SpectrumResult r = eigh(a);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.values[i] - expect[i]) < 1e-9);
  }
}

TEST_CASE("residual, orthonormality and moment sums on random symmetric input") {
  const int n = 48;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m(i, j) = u(oracle::rng());
      m(j, i) = m(i, j);
    }
  const SpectrumResult r = eigh(m);
  const double fro = m.norm();
  CHECK(r.residual_bound <= 1e-10 * fro);
  CHECK((r.vectors.transpose() * r.vectors - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(std::abs(r.values.sum() - m.trace()) <= 1e-9 * fro);
  CHECK(std::abs(r.values.squaredNorm() - fro * fro) <= 1e-9 * fro * fro);
  for (int i = 1; i < n; ++i) CHECK(r.values[i] >= r.values[i - 1]);
}

TEST_CASE("perturbation of a graded diagonal stays within the Frobenius bound") {
  const int n = 64;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = std::pow(i + 0.5, 2) + 1.0;
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 3); j <= std::min(n - 1, i + 3); ++j) {
      q(i, j) = u(oracle::rng());
      q(j, i) = q(i, j);
    }
  const SpectrumResult r = eigh(m + q);
  const Eigen::VectorXd mu = m.diagonal();
  CHECK((r.values - mu).cwiseAbs().maxCoeff() <= q.norm() + 1e-10);
}

TEST_CASE("eigh rejects asymmetric input") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 0, 1;
  CHECK_THROWS_AS(eigh(m), ValidationError);
}
