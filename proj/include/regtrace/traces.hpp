#pragma once

#include <vector>

#include "regtrace/eigensolver.hpp"
#include "regtrace/galerkin.hpp"
#include "regtrace/model.hpp"
#include "regtrace/resolvent.hpp"

namespace regtrace {

// One admissible cut of the eigenvalue ladder: the circle |lambda| = b_p
// passes through the midpoint of the gap above rank n_p.
struct SubsequenceCut {
  int n_p = 0;      // 1-based count of enclosed states
  double b_p = 0.0;
  double gap_p = 0.0;
};

struct Subsequence {
  std::vector<SubsequenceCut> cuts;
};

struct GapStrategy {
  double gap_floor_rel = 1e-6;   // absolute floor is gap_floor_rel * mu_N
  double safe_fraction = 0.5;    // cuts only while mu_{n+1} <= safe_fraction * mu_N
  int window_start = 8;          // first window begins at this rank
  double window_ratio = 2.0;     // geometric growth of window widths
};

// Picks one cut per window: the rank maximizing the relative gap
// (mu_{n+1} - mu_n)/mu_{n+1}, ties resolved toward the largest rank.
// Windows without an admissible gap (>= floor) are skipped; zero cuts
// overall is an error.
Subsequence select_subsequence(const Eigen::VectorXd& mu, const GapStrategy& strategy);

// Per-state ledger of the trace bookkeeping up to the largest cut.
struct LedgerRow {
  int q = 0;  // 1-based rank
  int k = 0;
  int j = 0;
  double mu = 0.0;
  double lambda = 0.0;
  double diag_integral = 0.0;            // (1/pi) Int (Q phi_j, phi_j) = (C_0)_{jj}
  std::vector<double> residue_corr;      // residues for s = 2..m (cluster share)
  double correction_total = 0.0;         // 2 sum_s (-1)^s s^{-1} Res_s
};

struct TraceLedger {
  int m = 2;
  int n_max = 0;  // rows cover ranks 1..n_max
  std::vector<LedgerRow> rows;
};

// Residue corrections through the pole clusters, distributed to cluster
// members in equal shares.  n_max is the largest rank that needs a row.
TraceLedger build_ledger(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                         int n_max, int m, const ContourOptions& opts = {});

// sum_{q <= n_p} [lambda_q - mu_q - diag_integral_q].
double first_trace_partial(const TraceLedger& ledger, int n_p);

// sum_{q <= n_p} [lambda_q^2 - mu_q^2 - correction_total_q - 2 mu_q diag_integral_q].
double second_trace_partial(const TraceLedger& ledger, int n_p);

// Right-hand sides, each computed two ways that must agree to 1e-12:
// endpoint evaluation of the potential derivatives versus the odd-
// frequency coefficient sums.
struct RhsRoutes {
  double endpoint = 0.0;
  double series = 0.0;
};
RhsRoutes rhs_first_routes(const SpectralModel& model);
RhsRoutes rhs_second_routes(const SpectralModel& model);
double rhs_first(const SpectralModel& model);
double rhs_second(const SpectralModel& model);

// Log-log least-squares fit of value against rank over ranks
// [N/4, N/2]; slope estimates the growth exponent, exp(intercept) the
// scale d1.
struct WeylFit {
  double slope = 0.0;
  double d1 = 0.0;
  int window_lo = 0;
  int window_hi = 0;
};
WeylFit fit_weyl_exponent(const std::vector<double>& values);

// Spectrum of the full operator restricted to states below the cosine
// truncation boundary, including the A-eigenmodes beyond the potential
// support (those are exactly unperturbed).  Used by the growth-law fits.
std::vector<double> extended_mu_spectrum(const SpectralModel& model);
std::vector<double> extended_lambda_spectrum(const SpectralModel& model,
                                             const GalerkinSystem& sys,
                                             const SpectrumResult& spectrum);

// A-posteriori gap-law constant: the smallest observed
// (mu_q - mu_{n_p}) / (q^beta - n_p^beta) over all cuts.
double fit_d2(const Eigen::VectorXd& mu, const Subsequence& cuts, double beta);

}  // namespace regtrace
