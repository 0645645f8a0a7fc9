#include "regtrace/traces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace regtrace {

Subsequence select_subsequence(const Eigen::VectorXd& mu, const GapStrategy& strategy) {
  const int n = static_cast<int>(mu.size());
  if (n < 8) throw ValidationError("select_subsequence: at least 8 eigenvalues required");
  const double mu_top = mu[n - 1];
  const double gap_floor = strategy.gap_floor_rel * mu_top;
  const double guard = strategy.safe_fraction * mu_top;

  Subsequence out;
  int lo = 1;
  int window_end = strategy.window_start;
  while (lo <= n - 1) {
    const int hi = std::min(n, window_end);
    // Candidate cuts n_p in [lo, hi): relative gap maximum, largest rank on ties.
    int best = -1;
    double best_gap = -1.0;
    for (int cut = lo; cut < hi && cut <= n - 1; ++cut) {
      const double gap = mu[cut] - mu[cut - 1];  // mu_{n_p+1} - mu_{n_p}
      if (gap < gap_floor) continue;
      if (mu[cut] > guard) break;  // truncation guard
      const double rel = gap / mu[cut];
      if (rel >= best_gap) {
        best_gap = rel;
        best = cut;
      }
    }
    if (best >= 0) {
      SubsequenceCut c;
      c.n_p = best;  // ranks 1..best enclosed (0-based cut index == count)
      c.gap_p = mu[best] - mu[best - 1];
      c.b_p = 0.5 * (mu[best - 1] + mu[best]);
      out.cuts.push_back(c);
    }
    lo = hi;
    window_end = std::max(window_end + 1,
                          static_cast<int>(std::ceil(window_end * strategy.window_ratio)));
  }
  if (out.cuts.empty())
    throw ValidationError("select_subsequence: no admissible cut (gaps below floor)");
  return out;
}

TraceLedger build_ledger(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                         int n_max, int m, const ContourOptions& opts) {
  const int n = sys.size();
  TraceLedger ledger;
  ledger.m = m;
  ledger.n_max = n_max;

  const double cluster_tol = 1e-9 * std::max(1.0, sys.mu[n - 1]);
  std::vector<PoleCluster> clusters = cluster_poles(sys.mu, cluster_tol);
  // Clusters with any member at rank <= n_max need residues.
  std::vector<PoleCluster> active;
  for (const auto& c : clusters)
    if (c.indices.front() < n_max) active.push_back(c);

  ResidueTable table = residues_bulk(sys, active, m, opts);
  // Closed form replaces the quadrature value for s = 2 on singletons.
  for (std::size_t ci = 0; ci < active.size(); ++ci)
    if (active[ci].indices.size() == 1 && m >= 2)
      table.values[ci][0] = residue_closed_form_s2(sys, active[ci].indices[0]);

  ledger.rows.resize(n_max);
  for (int q = 0; q < n_max; ++q) {
    LedgerRow& row = ledger.rows[q];
    row.q = q + 1;
    row.k = sys.basis[q].k;
    row.j = sys.basis[q].j;
    row.mu = sys.mu[q];
    row.lambda = spectrum.values[q];
    row.diag_integral = sys.model.potential.coefficient(0)(row.j - 1, row.j - 1);
    row.residue_corr.assign(std::max(0, m - 1), 0.0);
  }
  for (std::size_t ci = 0; ci < active.size(); ++ci) {
    const double share = 1.0 / active[ci].indices.size();
    for (int idx : active[ci].indices) {
      if (idx >= n_max) continue;  // cuts never split clusters
      for (int s = 2; s <= m; ++s)
        ledger.rows[idx].residue_corr[s - 2] = share * table.values[ci][s - 2];
    }
  }
  for (auto& row : ledger.rows) {
    double total = 0.0;
    for (int s = 2; s <= m; ++s) {
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      total += 2.0 * sign / s * row.residue_corr[s - 2];
    }
    row.correction_total = total;
  }
  return ledger;
}

double first_trace_partial(const TraceLedger& ledger, int n_p) {
  double sum = 0.0;
  for (int q = 0; q < n_p; ++q) {
    const LedgerRow& r = ledger.rows[q];
    sum += r.lambda - r.mu - r.diag_integral;
  }
  return sum;
}

double second_trace_partial(const TraceLedger& ledger, int n_p) {
  double sum = 0.0;
  for (int q = 0; q < n_p; ++q) {
    const LedgerRow& r = ledger.rows[q];
    sum += (r.lambda - r.mu) * (r.lambda + r.mu) - r.correction_total -
           2.0 * r.mu * r.diag_integral;
  }
  return sum;
}

namespace {

void check_routes(const RhsRoutes& r, const char* what) {
  const double scale = 1.0 + std::max(std::abs(r.endpoint), std::abs(r.series));
  if (std::abs(r.endpoint - r.series) > 1e-12 * scale) {
    std::ostringstream os;
    os << what << ": endpoint and coefficient-series routes disagree (" << r.endpoint
       << " vs " << r.series << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace

RhsRoutes rhs_first_routes(const SpectralModel& model) {
  RhsRoutes r;
  const Eigen::MatrixXd q0 = potential_endpoint(model.potential, Endpoint::kZero, 0);
  const Eigen::MatrixXd qpi = potential_endpoint(model.potential, Endpoint::kPi, 0);
  r.endpoint = 0.25 * (q0.trace() - qpi.trace());
  double s = 0.0;
  for (const auto& term : model.potential.terms)
    if (term.n % 2 == 1) s += term.coeff.trace();
  r.series = 0.5 * s;
  return r;
}

RhsRoutes rhs_second_routes(const SpectralModel& model) {
  RhsRoutes r;
  const int d = 2 * model.r;
  const double sign = (model.r % 2 == 0) ? 1.0 : -1.0;
  const Eigen::MatrixXd qd0 = potential_endpoint(model.potential, Endpoint::kZero, d);
  const Eigen::MatrixXd qdpi = potential_endpoint(model.potential, Endpoint::kPi, d);
  double v = sign * std::pow(2.0, -1.0 - 2.0 * model.r) * (qd0.trace() - qdpi.trace());
  const Eigen::MatrixXd q0 = potential_endpoint(model.potential, Endpoint::kZero, 0);
  const Eigen::MatrixXd qpi = potential_endpoint(model.potential, Endpoint::kPi, 0);
  double tr_a_diff = 0.0;
  for (int j = 1; j <= model.T; ++j)
    tr_a_diff += gamma_j(model, j) * (q0(j - 1, j - 1) - qpi(j - 1, j - 1));
  r.endpoint = v + 0.5 * tr_a_diff;

  double s = 0.0;
  for (const auto& term : model.potential.terms) {
    if (term.n % 2 == 0) continue;
    double tr_ac = 0.0;
    for (int j = 1; j <= model.T; ++j) tr_ac += gamma_j(model, j) * term.coeff(j - 1, j - 1);
    s += std::pow(2.0, -2.0 * model.r) * std::pow(static_cast<double>(term.n), d) *
             term.coeff.trace() +
         tr_ac;
  }
  r.series = s;
  return r;
}

double rhs_first(const SpectralModel& model) {
  const RhsRoutes r = rhs_first_routes(model);
  check_routes(r, "rhs_first");
  return r.endpoint;
}

double rhs_second(const SpectralModel& model) {
  const RhsRoutes r = rhs_second_routes(model);
  check_routes(r, "rhs_second");
  return r.endpoint;
}

WeylFit fit_weyl_exponent(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n < 64)
    throw ValidationError("fit_weyl_exponent: at least 64 eigenvalues required");
  WeylFit fit;
  fit.window_lo = std::max(1, n / 4);
  fit.window_hi = n / 2;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int rank = fit.window_lo; rank <= fit.window_hi; ++rank) {
    const double v = values[rank - 1];
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "fit_weyl_exponent: nonpositive eigenvalue " << v << " at rank " << rank;
      throw ValidationError(os.str());
    }
    const double x = std::log(static_cast<double>(rank));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.d1 = std::exp((sy - fit.slope * sx) / count);
  return fit;
}

std::vector<double> extended_mu_spectrum(const SpectralModel& model) {
  // Complete below the cosine cutoff: every state with
  // mu <= (K - 1/2)^{2r} + gamma_1 has k < K, so the list has no holes.
  const double cap = std::pow(model.K - 0.5, 2.0 * model.r) + gamma_j(model, 1);
  std::vector<double> mu;
  for (int j = 1;; ++j) {
    const double gj = gamma_j(model, j);
    if (gj > cap) break;
    for (int k = 0; k < model.K; ++k) {
      const double v = std::pow(k + 0.5, 2.0 * model.r) + gj;
      if (v > cap) break;
      mu.push_back(v);
    }
  }
  std::sort(mu.begin(), mu.end());
  return mu;
}

std::vector<double> extended_lambda_spectrum(const SpectralModel& model,
                                             const GalerkinSystem& sys,
                                             const SpectrumResult& spectrum) {
  const double cap = std::pow(model.K - 0.5, 2.0 * model.r) + gamma_j(model, 1);
  std::vector<double> out;
  for (int q = 0; q < sys.size(); ++q) {
    // Perturbed block states keep the cap of their unperturbed partner
    // so both lists cover the same population.
    if (sys.mu[q] <= cap) out.push_back(spectrum.values[q]);
  }
  for (int j = model.T + 1;; ++j) {
    const double gj = gamma_j(model, j);
    if (gj > cap) break;
    for (int k = 0; k < model.K; ++k) {
      const double v = std::pow(k + 0.5, 2.0 * model.r) + gj;
      if (v > cap) break;
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double fit_d2(const Eigen::VectorXd& mu, const Subsequence& cuts, double beta) {
  double d2 = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(mu.size());
  for (const auto& cut : cuts.cuts) {
    const double base = std::pow(static_cast<double>(cut.n_p), beta);
    for (int q = cut.n_p + 1; q <= n; ++q) {
      const double denom = std::pow(static_cast<double>(q), beta) - base;
      if (denom <= 0.0) continue;
      d2 = std::min(d2, (mu[q - 1] - mu[cut.n_p - 1]) / denom);
    }
  }
  return std::isfinite(d2) ? d2 : 0.0;
}

}  // namespace regtrace
