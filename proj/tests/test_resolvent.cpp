#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "regtrace/eigensolver.hpp"
#include "regtrace/resolvent.hpp"
#include "oracles.hpp"

using namespace regtrace;

namespace {

GalerkinSystem two_level() {
  Eigen::MatrixXd q(2, 2);
  q << 0.0, 0.5, 0.5, 0.0;
  return oracle::make_system({1.0, 2.0}, q);
}

GalerkinSystem random_banded_system(int n, double scale, int band) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> mu;
  double acc = 1.0;
  for (int i = 0; i < n; ++i) {
    mu.push_back(acc);
    acc += 1.0 + 0.5 * i;
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j <= std::min(n - 1, i + band); ++j) {
      q(i, j) = u(oracle::rng());
      q(j, i) = q(i, j);
    }
  return oracle::make_system(mu, q);
}

}  // namespace

TEST_CASE("trace_power closed cases") {
  Eigen::MatrixXd q0 = Eigen::MatrixXd::Zero(3, 3);
  const GalerkinSystem zero = oracle::make_system({1.0, 2.0, 3.0}, q0);
  CHECK(std::abs(trace_power(zero, Complex(0.1, 0.3), 3)) == 0.0);

  Eigen::MatrixXd q1(1, 1);
  q1 << 0.5;
  const GalerkinSystem one = oracle::make_system({1.25}, q1);
  CHECK(trace_power(one, Complex(0.0, 0.0), 1).real() == doctest::Approx(0.4).epsilon(1e-15));

  const GalerkinSystem two = two_level();
  CHECK(trace_power(two, Complex(0.0, 0.0), 2).real() ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(trace_power(two, Complex(0.0, 0.0), 2) -
                 oracle::trace_power_dense(two, Complex(0.0, 0.0), 2)) < 1e-14);
}

TEST_CASE("trace_power agrees with the dense oracle on a random system") {
  const GalerkinSystem sys = random_banded_system(14, 0.4, 3);
  for (int s = 1; s <= 6; ++s) {
    const Complex lambda(0.7, 1.3);
    const Complex fast = trace_power(sys, lambda, s);
    const Complex dense = oracle::trace_power_dense(sys, lambda, s);
    CHECK(std::abs(fast - dense) <= 1e-11 * (1.0 + std::abs(dense)));
  }
}

TEST_CASE("trace_power rejects lambda at a pole") {
  const GalerkinSystem two = two_level();
  CHECK_THROWS_WITH_AS(trace_power(two, Complex(1.0 + 1e-12, 0.0), 1),
                       doctest::Contains("mu_"), NumericalError);
}

TEST_CASE("trace_power is conjugate symmetric") {
  const GalerkinSystem sys = random_banded_system(10, 0.5, 2);
  const Complex lambda(2.3, 0.9);
  for (int s = 1; s <= 4; ++s) {
    const Complex up = trace_power(sys, lambda, s);
    const Complex down = trace_power(sys, std::conj(lambda), s);
    CHECK(std::abs(down - std::conj(up)) <= 1e-13 * (1.0 + std::abs(up)));
  }
}

TEST_CASE("second-order residue closed form") {
  const GalerkinSystem two = two_level();
  // pole at mu = 1: only the cross term survives, -2*1*0.25/(2-1)
  CHECK(residue_closed_form_s2(two, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  // diagonal perturbation: only the double pole contributes Q_qq^2
  Eigen::MatrixXd qd(2, 2);
  qd << 0.3, 0.0, 0.0, -0.7;
  const GalerkinSystem diag = oracle::make_system({1.0, 2.0}, qd);
  CHECK(residue_closed_form_s2(diag, 0) == doctest::Approx(0.09).epsilon(1e-13));
  CHECK(residue_closed_form_s2(diag, 1) == doctest::Approx(0.49).epsilon(1e-13));
}

TEST_CASE("residue quadrature matches the closed form and the dense oracle") {
  const GalerkinSystem sys = random_banded_system(12, 0.35, 2);
  const std::vector<PoleCluster> clusters = cluster_poles(sys.mu, 1e-9 * sys.mu[11]);
  REQUIRE(clusters.size() == 12);
  for (int ci : {0, 3, 7}) {
    const double closed = residue_closed_form_s2(sys, ci);
    const double quad = residue_at_pole(sys, clusters[ci], 2, ResidueRoute::kQuadrature);
    CHECK(std::abs(closed - quad) <= 1e-11 * (1.0 + std::abs(closed)));
    const double dense =
        oracle::residue_dense(sys, clusters[ci].value, 0.5 * clusters[ci].radius, 2);
    CHECK(std::abs(quad - dense) <= 1e-9 * (1.0 + std::abs(dense)));
  }
  // higher order against the dense full-integrand oracle
  for (int s : {3, 4, 5}) {
    const double quad = residue_at_pole(sys, clusters[2], s);
    const double dense =
        oracle::residue_dense(sys, clusters[2].value, 0.5 * clusters[2].radius, s);
    CHECK(std::abs(quad - dense) <= 1e-9 * (1.0 + std::abs(dense)));
  }
}

TEST_CASE("residues for zero perturbation vanish") {
  const GalerkinSystem zero = oracle::make_system({1.0, 2.5, 4.0},
                                                  Eigen::MatrixXd::Zero(3, 3));
  const auto clusters = cluster_poles(zero.mu, 1e-9 * 4.0);
  CHECK(residue_at_pole(zero, clusters[1], 2) == 0.0);
  CHECK(residue_at_pole(zero, clusters[1], 5) == 0.0);
}

TEST_CASE("multi-state cluster residues match the dense oracle") {
  // exact double eigenvalue at 2.0 with coupling inside and outside
  Eigen::MatrixXd q(4, 4);
  q << 0.2, 0.1, -0.2, 0.05,
       0.1, -0.1, 0.15, 0.2,
      -0.2, 0.15, 0.3, 0.1,
       0.05, 0.2, 0.1, -0.25;
  const GalerkinSystem sys = oracle::make_system({1.0, 2.0, 2.0, 3.5}, q);
  const auto clusters = cluster_poles(sys.mu, 1e-9 * 3.5);
  REQUIRE(clusters.size() == 3);
  REQUIRE(clusters[1].indices.size() == 2);
  CHECK(clusters[1].radius == doctest::Approx(0.5).epsilon(1e-14));
  for (int s : {2, 3, 4}) {
    const double quad = residue_at_pole(sys, clusters[1], s);
    const double dense =
        oracle::residue_dense(sys, clusters[1].value, 0.5 * clusters[1].radius, s, 512);
    CHECK(std::abs(quad - dense) <= 1e-9 * (1.0 + std::abs(dense)));
  }
}

TEST_CASE("manual degenerate cluster is rejected") {
  const GalerkinSystem two = two_level();
  PoleCluster tiny;
  tiny.value = 1.0;
  tiny.indices = {0};
  tiny.radius = 1e-30;
  CHECK_THROWS_WITH_AS(residue_at_pole(two, tiny, 2), doctest::Contains("degenerate"),
                       NumericalError);
}

TEST_CASE("cluster_poles partitions and assigns radii") {
  Eigen::VectorXd mu(6);
  mu << 1.0, 1.0, 2.0, 3.0, 3.0 + 1e-12, 6.0;
  const auto clusters = cluster_poles(mu, 1e-9 * 6.0);
  REQUIRE(clusters.size() == 4);
  CHECK(clusters[0].indices.size() == 2);
  CHECK(clusters[1].indices.size() == 1);
  CHECK(clusters[2].indices.size() == 2);
  CHECK(clusters[3].indices.size() == 1);
  int total = 0;
  for (const auto& c : clusters) total += static_cast<int>(c.indices.size());
  CHECK(total == 6);
  CHECK(clusters[0].radius == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(clusters[3].radius == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("contour forms agree and close over residues (two-level)") {
  const GalerkinSystem two = two_level();
  ContourSpec circle{Complex(0.0, 0.0), 3.0, 256};
  const double d2_res = contour_D_ps(two, circle, 2, DpsForm::kResolvent);
  const double d2_th = contour_D_ps(two, circle, 2, DpsForm::kTheorem1);
  // hand value: residues -0.5 and +1.0 sum to 0.5
  CHECK(d2_res == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(d2_th == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(d2_res - d2_th) <= 1e-8 * (1.0 + std::abs(d2_th)));
}

TEST_CASE("zero perturbation gives zero contour terms") {
  const GalerkinSystem zero =
      oracle::make_system({1.0, 2.0, 4.0}, Eigen::MatrixXd::Zero(3, 3));
  ContourSpec circle{Complex(0.0, 0.0), 3.0, 64};
  for (int s = 1; s <= 3; ++s) {
    CHECK(contour_D_ps(zero, circle, s, DpsForm::kResolvent) == 0.0);
    CHECK(contour_D_ps(zero, circle, s, DpsForm::kTheorem1) == 0.0);
  }
}

TEST_CASE("both contour forms agree for s = 1..4 on a random system") {
  const GalerkinSystem sys = random_banded_system(16, 0.3, 3);
  // circle between rank 8 and 9
  const double b = 0.5 * (sys.mu[7] + sys.mu[8]);
  const double gap = sys.mu[8] - sys.mu[7];
  ContourSpec circle{Complex(0.0, 0.0), b, contour_node_count(b, gap, 6)};
  for (int s = 1; s <= 4; ++s) {
    const double res = contour_D_ps(sys, circle, s, DpsForm::kResolvent);
    const double th = contour_D_ps(sys, circle, s, DpsForm::kTheorem1);
    CHECK(std::abs(res - th) <= 1e-8 * (1.0 + std::max(std::abs(res), std::abs(th))));
  }
}

TEST_CASE("residue-theorem closure for s <= 4") {
  const GalerkinSystem sys = random_banded_system(12, 0.3, 2);
  const double b = 0.5 * (sys.mu[5] + sys.mu[6]);
  const double gap = sys.mu[6] - sys.mu[5];
  ContourSpec circle{Complex(0.0, 0.0), b, contour_node_count(b, gap, 6)};
  const auto clusters = cluster_poles(sys.mu, 1e-9 * sys.mu[11]);
  for (int s = 2; s <= 4; ++s) {
    double residue_sum = 0.0;
    for (const auto& c : clusters)
      if (c.value < b) residue_sum += residue_at_pole(sys, c, s, ResidueRoute::kQuadrature);
    // D_ps = 2 (-1)^s s^{-1} * sum of residues
    const double from_residues = 2.0 * ((s % 2 == 0) ? 1.0 : -1.0) / s * residue_sum;
    const double from_contour = contour_D_ps(sys, circle, s, DpsForm::kTheorem1);
    CHECK(std::abs(from_residues - from_contour) <=
          1e-8 * (1.0 + std::abs(from_contour)));
  }
}

TEST_CASE("second moment equals the enclosed eigenvalue differences") {
  const GalerkinSystem two = two_level();
  const SpectrumResult sp = eigh(two.dense_matrix());

  ContourSpec big{Complex(0.0, 0.0), 3.0, 256};
  CHECK(contour_second_moment(two, sp, big) == doctest::Approx(0.5).epsilon(1e-10));

  // circle around the lower pair member only
  ContourSpec lowpair{Complex(0.0, 0.0), 1.35, 128};
  const double expected = sp.values[0] * sp.values[0] - 1.0;
  CHECK(expected == doctest::Approx(-0.37132).epsilon(1e-4));
  CHECK(contour_second_moment(two, sp, lowpair) ==
        doctest::Approx(expected).epsilon(1e-9));

  // a circle separating mu_1 from lambda_1 must be rejected
  ContourSpec bad{Complex(0.0, 0.0), 0.9, 64};
  CHECK_THROWS_WITH_AS(contour_second_moment(two, sp, bad),
                       doctest::Contains("contour selection"), NumericalError);
}

TEST_CASE("zero perturbation second moment and remainder vanish") {
  const GalerkinSystem zero =
      oracle::make_system({1.0, 2.0, 4.0}, Eigen::MatrixXd::Zero(3, 3));
  const SpectrumResult sp = eigh(zero.dense_matrix());
  ContourSpec circle{Complex(0.0, 0.0), 3.0, 64};
  CHECK(contour_second_moment(zero, sp, circle) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(remainder_estimate(zero, sp, circle, 4) == 0.0);
}

TEST_CASE("expansion closure: second moment equals the D sums plus the remainder") {
  const GalerkinSystem sys = random_banded_system(14, 0.3, 3);
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const int n_p = 7;
  const double b = 0.5 * (sys.mu[n_p - 1] + sys.mu[n_p]);
  const double gap = sys.mu[n_p] - sys.mu[n_p - 1];
  const int m = 5;
  ContourSpec circle{Complex(0.0, 0.0), b, contour_node_count(b, gap, 6)};

  double direct = 0.0;
  for (int q = 0; q < n_p; ++q)
    direct += sp.values[q] * sp.values[q] - sys.mu[q] * sys.mu[q];

  double total = remainder_estimate(sys, sp, circle, m);
  for (int s = 1; s <= m; ++s) total += contour_D_ps(sys, circle, s, DpsForm::kResolvent);
  CHECK(std::abs(direct - total) <= 1e-7 * (1.0 + std::abs(direct)));
}

TEST_CASE("cut_trace_suite matches the standalone operations") {
  const GalerkinSystem sys = random_banded_system(12, 0.25, 2);
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const int n_p = 6;
  const double b = 0.5 * (sys.mu[n_p - 1] + sys.mu[n_p]);
  const double gap = sys.mu[n_p] - sys.mu[n_p - 1];
  const int m = 4;
  ContourOptions opts;
  opts.nodes_mult = 4;
  const CutTraces suite = cut_trace_suite(sys, sp, b, gap, n_p, m, opts);

  ContourSpec fine{Complex(0.0, 0.0), b, suite.nodes_fine};
  ContourSpec base{Complex(0.0, 0.0), b, suite.nodes_base};
  CHECK(std::abs(suite.second_moment - contour_second_moment(sys, sp, fine)) < 1e-12);
  CHECK(std::abs(suite.d1_theorem1_fine -
                 contour_D_ps(sys, fine, 1, DpsForm::kTheorem1)) < 1e-12);
  CHECK(std::abs(suite.d2_resolvent_fine -
                 contour_D_ps(sys, fine, 2, DpsForm::kResolvent)) < 1e-12);
  CHECK(std::abs(suite.dps_theorem1[1] -
                 contour_D_ps(sys, base, 1, DpsForm::kTheorem1)) < 1e-12);
  CHECK(std::abs(suite.dps_theorem1[3] -
                 contour_D_ps(sys, base, 3, DpsForm::kTheorem1)) < 1e-12);
  CHECK(std::abs(suite.dps_resolvent[2] -
                 contour_D_ps(sys, base, 2, DpsForm::kResolvent)) < 1e-12);
  CHECK(std::abs(suite.remainder - remainder_estimate(sys, sp, base, m)) < 1e-12);
}

TEST_CASE("contour validation enforces the node floor and separation") {
  const GalerkinSystem sys = random_banded_system(10, 0.1, 2);
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const double b = 0.5 * (sys.mu[4] + sys.mu[5]);
  const double gap = sys.mu[5] - sys.mu[4];
  ContourSpec too_few{Complex(0.0, 0.0), b, 32};
  CHECK_THROWS_AS(validate_cut_contour(sys.mu, &sp.values, too_few, gap, 5),
                  NumericalError);
  ContourSpec wrong_count{Complex(0.0, 0.0), b, 64};
  CHECK_THROWS_AS(validate_cut_contour(sys.mu, &sp.values, wrong_count, gap, 7),
                  NumericalError);
  CHECK(contour_node_count(b, gap, 1) >= 64);
  CHECK(contour_node_count(100.0, 1.0, 1) == 1600);
  CHECK(contour_node_count(100.0, 1.0, 3) == 4800);
}
