#include <doctest.h>

#include <cmath>
#include <numbers>

#include "regtrace/model.hpp"
#include "oracles.hpp"

using namespace regtrace;

namespace {

RawModel basic_raw(int r, double a, double alpha, int T, int K) {
  RawModel raw;
  raw.r = r;
  raw.a = a;
  raw.alpha = alpha;
  raw.T = T;
  raw.K = K;
  return raw;
}

}  // namespace

TEST_CASE("validate_scenario accepts the basic instance and derives constants") {
  RawModel raw = basic_raw(1, 1.0, 3.0, 2, 64);
  CosineTerm t;
  t.n = 1;
  t.coeff = Eigen::MatrixXd::Identity(2, 2);
  raw.terms.push_back(t);
  const SpectralModel m = validate_scenario(raw);
  CHECK(m.constants.beta == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(m.constants.delta == doctest::Approx(0.2).epsilon(1e-12));
  // cutoff: floor(|21/1|) + 1
  CHECK(m.constants.m_star == 22);
  CHECK(m.constants.d1_estimate > 0.0);
}

TEST_CASE("validate_scenario rejects alpha at the hypothesis boundary") {
  RawModel raw = basic_raw(1, 1.0, 2.0, 1, 8);
  CHECK_THROWS_WITH_AS(validate_scenario(raw),
                       doctest::Contains("alpha > 2r/(2r-1)"), ValidationError);
}

TEST_CASE("validate_scenario accepts an empty potential") {
  RawModel raw = basic_raw(1, 1.0, 3.0, 1, 8);
  const SpectralModel m = validate_scenario(raw);
  CHECK(m.potential.is_zero());
}

TEST_CASE("validate_scenario rejects structural violations") {
  CHECK_THROWS_AS(validate_scenario(basic_raw(0, 1.0, 3.0, 1, 8)), ValidationError);
  CHECK_THROWS_AS(validate_scenario(basic_raw(1, 0.0, 3.0, 1, 8)), ValidationError);
  CHECK_THROWS_AS(validate_scenario(basic_raw(1, -2.0, 3.0, 1, 8)), ValidationError);
  CHECK_THROWS_AS(validate_scenario(basic_raw(1, 1.0, 3.0, 0, 8)), ValidationError);
  CHECK_THROWS_AS(validate_scenario(basic_raw(1, 1.0, 3.0, 1, 0)), ValidationError);
  CHECK_THROWS_AS(validate_scenario(basic_raw(1, 1.0, 3.0, 64, 512)), ValidationError);

  RawModel raw = basic_raw(1, 1.0, 3.0, 2, 8);
  CosineTerm bad;
  bad.n = 1;
  bad.coeff = Eigen::MatrixXd::Zero(2, 2);
  bad.coeff(0, 1) = 1.0;  // clearly nonsymmetric
  raw.terms.push_back(bad);
  CHECK_THROWS_WITH_AS(validate_scenario(raw), doctest::Contains("not symmetric"),
                       ValidationError);

  RawModel dup = basic_raw(1, 1.0, 3.0, 1, 8);
  CosineTerm a, b;
  a.n = 2;
  a.coeff = Eigen::MatrixXd::Identity(1, 1);
  b = a;
  dup.terms = {a, b};
  CHECK_THROWS_WITH_AS(validate_scenario(dup), doctest::Contains("duplicate"),
                       ValidationError);

  RawModel wrong = basic_raw(1, 1.0, 3.0, 2, 8);
  CosineTerm c;
  c.n = 0;
  c.coeff = Eigen::MatrixXd::Identity(3, 3);
  wrong.terms = {c};
  CHECK_THROWS_AS(validate_scenario(wrong), ValidationError);
}

TEST_CASE("coefficients are symmetrized after the gate") {
  RawModel raw = basic_raw(1, 1.0, 3.0, 2, 8);
  CosineTerm t;
  t.n = 1;
  t.coeff.resize(2, 2);
  t.coeff << 1.0, 0.5 + 4e-13, 0.5 - 4e-13, 2.0;
  raw.terms.push_back(t);
  const SpectralModel m = validate_scenario(raw);
  CHECK(m.potential.terms[0].coeff(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.potential.terms[0].coeff(0, 1) == m.potential.terms[0].coeff(1, 0));
}

TEST_CASE("gamma_j follows the exact power law") {
  SpectralModel m = validate_scenario(basic_raw(1, 1.0, 3.0, 1, 8));
  CHECK(gamma_j(m, 2) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(gamma_j(m, 1) == doctest::Approx(1.0).epsilon(1e-15));
  SpectralModel m2 = validate_scenario(basic_raw(2, 2.0, 4.0, 1, 8));
  m2.alpha = 1.0;  // direct law check without the hypothesis gate
  m2.a = 2.0;
  CHECK(gamma_j(m2, 5) == doctest::Approx(10.0).epsilon(1e-15));

  // strictly increasing
  SpectralModel m3 = validate_scenario(basic_raw(1, 0.7, 2.3, 1, 8));
  double prev = 0.0;
  for (int j = 1; j <= 20; ++j) {
    const double g = gamma_j(m3, j);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("potential_eval matches the cosine derivative cycle") {
  CosinePotential pot;
  pot.dim = 2;
  CosineTerm t;
  t.n = 1;
  t.coeff.resize(2, 2);
  t.coeff << 0.8, 0.1, 0.1, -0.3;
  pot.terms.push_back(t);

  CHECK((potential_eval(pot, 0.0, 0) - t.coeff).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(potential_eval(pot, 0.0, 1).cwiseAbs().maxCoeff() < 1e-15);

  // second derivative of cos at pi is +cos(pi) = ... -(-1) = +1 times C
  const Eigen::MatrixXd d2 = potential_eval(pot, std::numbers::pi, 2);
  CHECK((d2 - t.coeff).cwiseAbs().maxCoeff() < 1e-12);

  // oracle: second central difference of the d = 0 evaluation
  const double h = 1e-5;
  const double x = std::numbers::pi;
  const Eigen::MatrixXd fd =
      (potential_eval(pot, x + h, 0) - 2.0 * potential_eval(pot, x, 0) +
       potential_eval(pot, x - h, 0)) /
      (h * h);
  CHECK((d2 - fd).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("derivatives agree with finite differences of the lower order") {
  CosinePotential pot;
  pot.dim = 1;
  for (int n : {0, 1, 3}) {
    CosineTerm t;
    t.n = n;
    t.coeff = Eigen::MatrixXd::Constant(1, 1, 0.3 + 0.2 * n);
    pot.terms.push_back(t);
  }
  const double h = 1e-5;
  for (int d = 1; d <= 4; ++d) {
    for (double x : {0.3, 1.1, 2.7}) {
      const double fd =
          (potential_eval(pot, x + h, d - 1)(0, 0) - potential_eval(pot, x - h, d - 1)(0, 0)) /
          (2.0 * h);
      const double direct = potential_eval(pot, x, d)(0, 0);
      CHECK(std::abs(direct - fd) < 1e-6 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("odd derivatives cancel at the endpoints") {
  RawModel raw = basic_raw(3, 1.0, 2.0, 2, 4);
  raw.alpha = 3.0;
  for (int n : {0, 1, 2, 3, 5, 9}) {
    CosineTerm t;
    t.n = n;
    t.coeff.resize(2, 2);
    t.coeff << 1.0, 0.4, 0.4, -0.7;
    raw.terms.push_back(t);
  }
  const SpectralModel m = validate_scenario(raw);
  for (int i = 0; i <= m.r; ++i) {
    const int d = 2 * i + 1;
    const Eigen::MatrixXd sum = potential_endpoint(m.potential, Endpoint::kZero, d) +
                                potential_endpoint(m.potential, Endpoint::kPi, d);
    CHECK(sum.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("endpoint evaluation matches the generic path for even orders") {
  CosinePotential pot;
  pot.dim = 1;
  for (int n : {1, 2, 3}) {
    CosineTerm t;
    t.n = n;
    t.coeff = Eigen::MatrixXd::Constant(1, 1, 1.0 / n);
    pot.terms.push_back(t);
  }
  for (int d : {0, 2, 4}) {
    const double generic = potential_eval(pot, std::numbers::pi, d)(0, 0);
    const double exact = potential_endpoint(pot, Endpoint::kPi, d)(0, 0);
    CHECK(std::abs(generic - exact) < 1e-9 * (1.0 + std::abs(exact)));
    const double g0 = potential_eval(pot, 0.0, d)(0, 0);
    const double e0 = potential_endpoint(pot, Endpoint::kZero, d)(0, 0);
    CHECK(g0 == doctest::Approx(e0).epsilon(1e-14));
  }
}
