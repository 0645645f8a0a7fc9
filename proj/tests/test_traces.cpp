#include <doctest.h>

#include <cmath>

#include "regtrace/eigensolver.hpp"
#include "regtrace/traces.hpp"
#include "oracles.hpp"

using namespace regtrace;

namespace {

SpectralModel scalar_model(int r, double a, double alpha,
                           const std::vector<std::pair<int, double>>& terms, int K = 8) {
  RawModel raw;
  raw.r = r;
  raw.a = a;
  raw.alpha = alpha;
  raw.T = 1;
  raw.K = K;
  for (const auto& [n, v] : terms) {
    CosineTerm t;
    t.n = n;
    t.coeff = Eigen::MatrixXd::Constant(1, 1, v);
    raw.terms.push_back(t);
  }
  return validate_scenario(raw);
}

}  // namespace

TEST_CASE("select_subsequence requires at least 8 eigenvalues") {
  Eigen::VectorXd mu(4);
  mu << 1.25, 3.25, 8.25, 10.25;
  CHECK_THROWS_AS(select_subsequence(mu, GapStrategy{}), ValidationError);
}

TEST_CASE("select_subsequence maximizes the relative gap per window") {
  // First window covers ranks 1..7; relative gap (mu_{n+1}-mu_n)/mu_{n+1}
  // is largest at the first rank for this ladder.
  Eigen::VectorXd mu(9);
  mu << 1.25, 3.25, 8.25, 10.25, 15.0, 16.0, 20.0, 21.0, 60.0;
  GapStrategy strategy;
  strategy.safe_fraction = 1.0;
  const Subsequence cuts = select_subsequence(mu, strategy);
  REQUIRE(!cuts.cuts.empty());
  // relative gaps: 2/3.25 = .615, 5/8.25 = .606, 2/10.25, 4.75/15, ...
  CHECK(cuts.cuts[0].n_p == 1);
  CHECK(cuts.cuts[0].b_p == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(cuts.cuts[0].gap_p == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("ties resolve toward the largest rank in the window") {
  // geometric ladder: constant relative gap, so every window ties and the
  // last admissible rank wins
  Eigen::VectorXd mu(12);
  for (int i = 0; i < 12; ++i) mu[i] = std::pow(2.0, i);
  GapStrategy strategy;
  strategy.safe_fraction = 1.0;
  const Subsequence cuts = select_subsequence(mu, strategy);
  REQUIRE(cuts.cuts.size() >= 2);
  CHECK(cuts.cuts[0].n_p == 7);   // window [1, 8)
  CHECK(cuts.cuts[1].n_p == 11);  // window [8, 12)
}

TEST_CASE("cuts respect midpoints, the gap floor and the truncation guard") {
  const SpectralModel m = scalar_model(1, 1.0, 3.0, {}, 8);
  const auto basis = enumerate_basis(m);
  Eigen::VectorXd mu(8);
  for (int i = 0; i < 8; ++i) mu[i] = basis[i].mu;
  const Subsequence cuts = select_subsequence(mu, GapStrategy{});
  REQUIRE(!cuts.cuts.empty());
  for (const auto& c : cuts.cuts) {
    CHECK(c.b_p == doctest::Approx(0.5 * (mu[c.n_p - 1] + mu[c.n_p])).epsilon(1e-15));
    CHECK(c.gap_p > 0.0);
    CHECK(mu[c.n_p] <= 0.5 * mu[7] + 1e-12);
    CHECK(c.n_p + 1 <= 8);
  }
}

TEST_CASE("gap floor suppresses windows without an admissible gap") {
  Eigen::VectorXd mu(10);
  // tightly packed at the bottom; the only real gap sits past the guard
  mu << 1.0, 1.0 + 1e-9, 1.0 + 2e-9, 1.0 + 3e-9, 1.0 + 4e-9, 1.0 + 5e-9, 1.0 + 6e-9,
      1.0 + 7e-9, 1.0 + 8e-9, 100.0;
  GapStrategy strategy;
  strategy.safe_fraction = 0.2;
  CHECK_THROWS_AS(select_subsequence(mu, strategy), ValidationError);
}

TEST_CASE("right-hand sides of both trace formulas") {
  const SpectralModel zero = scalar_model(1, 1.0, 3.0, {});
  CHECK(rhs_first(zero) == 0.0);
  CHECK(rhs_second(zero) == 0.0);

  const SpectralModel one = scalar_model(1, 1.0, 3.0, {{1, 1.0}});
  CHECK(rhs_first(one) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rhs_second(one) == doctest::Approx(1.25).epsilon(1e-14));

  const SpectralModel two = scalar_model(1, 1.0, 3.0, {{1, 2.0}, {3, -1.0}});
  CHECK(rhs_first(two) == doctest::Approx(0.5).epsilon(1e-14));

  const SpectralModel even = scalar_model(1, 1.0, 3.0, {{2, 0.9}});
  CHECK(rhs_first(even) == 0.0);
  CHECK(rhs_second(even) == 0.0);

  const RhsRoutes r1 = rhs_first_routes(one);
  CHECK(std::abs(r1.endpoint - r1.series) <= 1e-12);
  const RhsRoutes r2 = rhs_second_routes(one);
  CHECK(std::abs(r2.endpoint - r2.series) <= 1e-12);
}

TEST_CASE("right-hand sides scale linearly with the potential") {
  for (double t : {0.0, 1.0, 2.0}) {
    const SpectralModel m = scalar_model(1, 1.0, 3.0, {{1, 0.8 * t}, {3, -0.3 * t}});
    const SpectralModel base = scalar_model(1, 1.0, 3.0, {{1, 0.8}, {3, -0.3}});
    CHECK(rhs_first(m) == doctest::Approx(t * rhs_first(base)).epsilon(1e-13));
    CHECK(rhs_second(m) == doctest::Approx(t * rhs_second(base)).epsilon(1e-13));
  }
}

TEST_CASE("weyl fit recovers an exact power law") {
  std::vector<double> vals;
  for (int n_ = 1; n_ <= 256; ++n_) vals.push_back(2.0 * std::pow(n_, 1.2));
  const WeylFit fit = fit_weyl_exponent(vals);
  CHECK(fit.slope == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(fit.d1 == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("weyl fit rejects short and nonpositive input") {
  std::vector<double> tiny(32, 1.0);
  CHECK_THROWS_AS(fit_weyl_exponent(tiny), ValidationError);
  std::vector<double> bad;
  for (int n_ = 1; n_ <= 128; ++n_) bad.push_back(n_ - 40.0);
  CHECK_THROWS_AS(fit_weyl_exponent(bad), ValidationError);
}

TEST_CASE("extended spectra cover the truncation-complete population") {
  const SpectralModel m = scalar_model(1, 1.0, 3.0, {{1, 0.4}}, 64);
  const std::vector<double> mu_ext = extended_mu_spectrum(m);
  CHECK(mu_ext.size() > 64u);
  CHECK(std::is_sorted(mu_ext.begin(), mu_ext.end()));
  const double cap = std::pow(m.K - 0.5, 2.0) + 1.0;
  CHECK(mu_ext.back() <= cap);

  const GalerkinSystem sys = assemble_Q_matrix(m, enumerate_basis(m));
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const std::vector<double> lam_ext = extended_lambda_spectrum(m, sys, sp);
  CHECK(lam_ext.size() == mu_ext.size());
  CHECK(std::is_sorted(lam_ext.begin(), lam_ext.end()));
}

TEST_CASE("ledger partial sums follow their definitions") {
  // synthetic two-state ledger with hand-filled entries
  TraceLedger led;
  led.m = 2;
  led.n_max = 2;
  LedgerRow r1;
  r1.q = 1;
  r1.mu = 1.0;
  r1.lambda = 1.1;
  r1.diag_integral = 0.05;
  r1.residue_corr = {0.2};
  r1.correction_total = 0.2;  // 2 * (1/2) * Res
  LedgerRow r2;
  r2.q = 2;
  r2.mu = 2.0;
  r2.lambda = 2.3;
  r2.diag_integral = -0.1;
  r2.residue_corr = {-0.4};
  r2.correction_total = -0.4;
  led.rows = {r1, r2};

  CHECK(first_trace_partial(led, 1) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(first_trace_partial(led, 2) == doctest::Approx(0.45).epsilon(1e-14));
  const double lhs2_1 = (1.1 * 1.1 - 1.0) - 0.2 - 2.0 * 1.0 * 0.05;
  const double lhs2_2 = lhs2_1 + (2.3 * 2.3 - 4.0) + 0.4 - 2.0 * 2.0 * (-0.1);
  CHECK(second_trace_partial(led, 1) == doctest::Approx(lhs2_1).epsilon(1e-14));
  CHECK(second_trace_partial(led, 2) == doctest::Approx(lhs2_2).epsilon(1e-14));
}

TEST_CASE("build_ledger installs closed-form second-order residues") {
  const SpectralModel m = scalar_model(1, 1.0, 3.0, {{0, 0.2}, {1, 0.4}}, 16);
  const GalerkinSystem sys = assemble_Q_matrix(m, enumerate_basis(m));
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const TraceLedger led = build_ledger(sys, sp, 8, 4);
  for (int q = 0; q < 8; ++q) {
    CHECK(led.rows[q].residue_corr[0] ==
          doctest::Approx(residue_closed_form_s2(sys, q)).epsilon(1e-12));
    CHECK(led.rows[q].diag_integral == doctest::Approx(0.2).epsilon(1e-14));
    double total = 0.0;
    for (int s = 2; s <= 4; ++s)
      total += 2.0 * ((s % 2 == 0) ? 1.0 : -1.0) / s * led.rows[q].residue_corr[s - 2];
    CHECK(led.rows[q].correction_total == doctest::Approx(total).epsilon(1e-13));
  }
}

TEST_CASE("cluster members share the cluster residue equally") {
  Eigen::MatrixXd q(4, 4);
  q << 0.2, 0.1, -0.2, 0.05,
       0.1, -0.1, 0.15, 0.2,
      -0.2, 0.15, 0.3, 0.1,
       0.05, 0.2, 0.1, -0.25;
  GalerkinSystem sys = oracle::make_system({1.0, 2.0, 2.0, 3.5}, q);
  const SpectrumResult sp = eigh(sys.dense_matrix());
  const TraceLedger led = build_ledger(sys, sp, 4, 3);
  CHECK(led.rows[1].residue_corr[0] == led.rows[2].residue_corr[0]);
  CHECK(led.rows[1].residue_corr[1] == led.rows[2].residue_corr[1]);
  const auto clusters = cluster_poles(sys.mu, 1e-9 * 3.5);
  const double total = residue_at_pole(sys, clusters[1], 2);
  CHECK(led.rows[1].residue_corr[0] + led.rows[2].residue_corr[0] ==
        doctest::Approx(total).epsilon(1e-11));
}

TEST_CASE("fitted gap-law constant is positive") {
  const SpectralModel m = scalar_model(1, 1.0, 3.0, {}, 32);
  const auto basis = enumerate_basis(m);
  Eigen::VectorXd mu(32);
  for (int i = 0; i < 32; ++i) mu[i] = basis[i].mu;
  const Subsequence cuts = select_subsequence(mu, GapStrategy{});
  CHECK(fit_d2(mu, cuts, m.constants.beta) > 0.0);
}
