#include "regtrace/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "regtrace/eigensolver.hpp"

namespace regtrace {

namespace {

double rel_dev(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Pipeline::Pipeline(const RawModel& raw, const RunOptions& run) : run_(run) {
  model_ = validate_scenario(raw);
  m_ = run.m_override.value_or(model_.constants.m_star);
  if (m_ < 2) throw ValidationError("series cutoff m must be at least 2");
  fitted_constants_ = model_.constants;
  fitted_constants_.m_star = m_;
}

double Pipeline::rhs1() {
  if (!have_rhs_) {
    rhs1_routes_ = rhs_first_routes(model_);
    rhs2_routes_ = rhs_second_routes(model_);
    rhs1_ = rhs_first(model_);
    rhs2_ = rhs_second(model_);
    have_rhs_ = true;
  }
  return rhs1_;
}

double Pipeline::rhs2() {
  rhs1();
  return rhs2_;
}

const GalerkinSystem& Pipeline::system() {
  if (!have_system_) {
    system_ = assemble_Q_matrix(model_, enumerate_basis(model_));
    have_system_ = true;
  }
  return system_;
}

const SpectrumResult& Pipeline::spectrum() {
  if (!have_spectrum_) {
    spectrum_ = eigh(system().dense_matrix());
    have_spectrum_ = true;
  }
  return spectrum_;
}

const Subsequence& Pipeline::cuts() {
  if (!have_cuts_) {
    GapStrategy strategy;
    strategy.gap_floor_rel = run_.gap_floor;
    strategy.safe_fraction = run_.safe_fraction;
    Subsequence all = select_subsequence(system().mu, strategy);
    // Keep only cuts whose circle separates the perturbed spectrum too.
    const SpectrumResult& sp = spectrum();
    for (const auto& cut : all.cuts) {
      ContourSpec circle{Complex(0.0, 0.0), cut.b_p,
                         contour_node_count(cut.b_p, cut.gap_p, 1)};
      try {
        validate_cut_contour(system().mu, &sp.values, circle, cut.gap_p, cut.n_p);
        cuts_.cuts.push_back(cut);
      } catch (const NumericalError&) {
        ++dropped_cuts_;
      }
    }
    if (cuts_.cuts.empty())
      throw NumericalError(
          "no usable cut: every candidate circle fails to separate the perturbed spectrum");
    have_cuts_ = true;
  }
  return cuts_;
}

const TraceLedger& Pipeline::basic_ledger() {
  if (!have_basic_ledger_ && !have_full_ledger_) {
    const int n_max = cuts().cuts.back().n_p;
    ledger_ = TraceLedger{};
    ledger_.m = m_;
    ledger_.n_max = n_max;
    ledger_.rows.resize(n_max);
    for (int q = 0; q < n_max; ++q) {
      LedgerRow& row = ledger_.rows[q];
      row.q = q + 1;
      row.k = system().basis[q].k;
      row.j = system().basis[q].j;
      row.mu = system().mu[q];
      row.lambda = spectrum().values[q];
      row.diag_integral = model_.potential.coefficient(0)(row.j - 1, row.j - 1);
      row.residue_corr.assign(std::max(0, m_ - 1), 0.0);
    }
    have_basic_ledger_ = true;
  }
  return ledger_;
}

const TraceLedger& Pipeline::ledger() {
  if (!have_full_ledger_) {
    ContourOptions opts;
    opts.nodes_mult = run_.nodes_mult;
    ledger_ = build_ledger(system(), spectrum(), cuts().cuts.back().n_p, m_, opts);
    have_basic_ledger_ = true;
    have_full_ledger_ = true;
  }
  return ledger_;
}

const std::vector<CutRow>& Pipeline::cut_rows() {
  if (!have_cut_rows_) {
    const TraceLedger& led = ledger();
    ContourOptions opts;
    opts.nodes_mult = run_.nodes_mult;
    rhs1();
    int p = 0;
    for (const auto& cut : cuts().cuts) {
      CutRow row;
      row.p = ++p;
      row.n_p = cut.n_p;
      row.b_p = cut.b_p;
      row.gap_p = cut.gap_p;
      row.lhs1 = first_trace_partial(led, cut.n_p);
      row.lhs2 = second_trace_partial(led, cut.n_p);
      row.err1 = std::abs(row.lhs1 - rhs1_);
      row.err2 = std::abs(row.lhs2 - rhs2_);
      double ssd = 0.0;
      for (int q = 0; q < cut.n_p; ++q) {
        const double l = spectrum().values[q], u = system().mu[q];
        ssd += (l - u) * (l + u);
      }
      row.sum_sq_direct = ssd;
      CutTraces suite =
          cut_trace_suite(system(), spectrum(), cut.b_p, cut.gap_p, cut.n_p, m_, opts);
      row.second_moment_quad = suite.second_moment;
      row.dps_theorem1 = suite.dps_theorem1;
      row.dps_resolvent = suite.dps_resolvent;
      row.remainder = suite.remainder;
      row.d1_theorem1_fine = suite.d1_theorem1_fine;
      row.d1_resolvent_fine = suite.d1_resolvent_fine;
      row.d2_theorem1_fine = suite.d2_theorem1_fine;
      row.d2_resolvent_fine = suite.d2_resolvent_fine;
      row.nodes_fine = suite.nodes_fine;
      row.nodes_base = suite.nodes_base;
      // Closure residual of the expansion.  The first-order contour form
      // carries one power of lambda less, so its quadrature tails are
      // smaller by a factor of the contour radius; the two forms agree
      // by the equivalence check.
      double closure = ssd - suite.remainder;
      for (int s = 1; s <= m_; ++s) closure -= suite.dps_theorem1[s];
      row.closure_rel = std::abs(closure) / (1.0 + std::abs(ssd));
      cut_rows_.push_back(std::move(row));
    }
    have_cut_rows_ = true;
  }
  return cut_rows_;
}

const WeylReport& Pipeline::weyl() {
  if (!have_weyl_) {
    weyl_.target_beta = model_.constants.beta;
    const std::vector<double> mu_ext = extended_mu_spectrum(model_);
    weyl_.list_length = mu_ext.size();
    if (mu_ext.size() >= 64) {
      weyl_.mu_fit = fit_weyl_exponent(mu_ext);
      const std::vector<double> lambda_ext =
          extended_lambda_spectrum(model_, system(), spectrum());
      weyl_.lambda_fit = fit_weyl_exponent(lambda_ext);
      weyl_.computed = true;
      fitted_constants_.d1_estimate = weyl_.mu_fit.d1;
    }
    fitted_constants_.d2_estimate =
        fit_d2(system().mu, cuts(), model_.constants.beta);
    have_weyl_ = true;
  }
  return weyl_;
}

void Pipeline::add_check(const std::string& name, double measured, double tolerance) {
  checks_.push_back({name, measured, tolerance, measured <= tolerance});
}

void Pipeline::run_checks() {
  const GalerkinSystem& sys = system();
  const SpectrumResult& sp = spectrum();
  const int n = sys.size();
  rhs1();

  // Structural gates of the assembled system.
  {
    const double qmax = std::max(1e-300, sys.qmat.cwiseAbs().maxCoeff());
    add_check("qmat_symmetry",
              (sys.qmat - sys.qmat.transpose()).cwiseAbs().maxCoeff(), 1e-12 * qmax);

    double off_pattern = 0.0;
    for (int pq = 0; pq < n; ++pq)
      for (int q = 0; q < n; ++q) {
        bool allowed = false;
        for (const auto& term : model_.potential.terms)
          if (overlap_integral(term.n, sys.basis[pq].k, sys.basis[q].k) != 0.0)
            allowed = true;
        if (!allowed) off_pattern = std::max(off_pattern, std::abs(sys.qmat(pq, q)));
      }
    add_check("qmat_sparsity_pattern", off_pattern, 0.0);

    double trace_expected = 0.0;
    for (const auto& term : model_.potential.terms)
      for (int k = 0; k < model_.K; ++k)
        trace_expected += 2.0 / std::numbers::pi * overlap_integral(term.n, k, k) *
                          term.coeff.trace();
    add_check("qmat_trace_identity", rel_dev(sys.qmat.trace(), trace_expected), 1e-10);
  }

  // Boundary conditions of the potential (exact for cosine series).
  {
    double worst = 0.0;
    for (int i = 0; i <= model_.r; ++i) {
      const int d = 2 * i + 1;
      const Eigen::MatrixXd s = potential_endpoint(model_.potential, Endpoint::kZero, d) +
                                potential_endpoint(model_.potential, Endpoint::kPi, d);
      if (s.size() > 0) worst = std::max(worst, s.cwiseAbs().maxCoeff());
    }
    add_check("boundary_odd_derivatives", worst, 1e-12);
  }

  // Eigensolver quality gates.
  {
    const Eigen::MatrixXd mfull = sys.dense_matrix();
    const double fro = mfull.norm();
    add_check("eigh_residual", sp.residual_bound, 1e-10 * fro);
    const double ortho =
        (sp.vectors.transpose() * sp.vectors - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    add_check("eigh_orthonormality", ortho, 1e-10);
    add_check("eigh_trace_sum", std::abs(sp.values.sum() - mfull.trace()), 1e-9 * fro);
    add_check("eigh_frobenius_sum",
              std::abs(sp.values.squaredNorm() - fro * fro), 1e-9 * fro * fro);
    const double qnorm = sys.qmat.norm();
    const double worst_shift = (sp.values - sys.mu).cwiseAbs().maxCoeff();
    add_check("weyl_monotone_shift", std::max(0.0, worst_shift - qnorm),
              1e-8 * (1.0 + fro));
  }

  // Right-hand sides: two routes each, plus the endpoint Fourier limit.
  add_check("rhs_first_two_routes",
            std::abs(rhs1_routes_.endpoint - rhs1_routes_.series),
            1e-12 * (1.0 + std::abs(rhs1_)));
  add_check("rhs_second_two_routes",
            std::abs(rhs2_routes_.endpoint - rhs2_routes_.series),
            1e-12 * (1.0 + std::abs(rhs2_)));
  add_check("endpoint_fourier_equality",
            std::abs(oscillatory_sum_limit(model_) - rhs2_),
            1e-12 * (1.0 + std::abs(rhs2_)));
  add_check("endpoint_weight_route",
            std::abs(oscillatory_sum_endpoint_route(
                         model_, model_.potential.max_frequency() + 3) -
                     rhs2_),
            1e-10 * (1.0 + std::abs(rhs2_)));

  // Integration-by-parts identity over the coefficient table.
  {
    double worst = 0.0;
    for (int j = 1; j <= model_.T; ++j) {
      const DiagonalProfile prof = diagonal_profile(model_.potential, j);
      for (int k = 0; k < 64; ++k) {
        const IbpPair pair = ibp_identity_check(prof, k, model_.r);
        worst = std::max(worst,
                         std::abs(pair.lhs - pair.rhs) / (1.0 + std::abs(pair.lhs)));
      }
    }
    add_check("ibp_identity", worst, 1e-10);

    double worst_oracle = 0.0;
    for (int j = 1; j <= model_.T; ++j) {
      const DiagonalProfile prof = diagonal_profile(model_.potential, j);
      for (int k = 0; k <= 10; ++k) {
        const IbpPair closed = ibp_identity_check(prof, k, model_.r);
        const IbpPair quad = ibp_identity_check(prof, k, model_.r, IbpRoute::kQuadrature);
        worst_oracle = std::max(
            worst_oracle, std::abs(closed.lhs - quad.lhs) / (1.0 + std::abs(closed.lhs)));
        worst_oracle = std::max(
            worst_oracle, std::abs(closed.rhs - quad.rhs) / (1.0 + std::abs(closed.rhs)));
      }
    }
    add_check("ibp_quadrature_oracle", worst_oracle, 1e-10);
  }

  // Absolute-convergence bound of the coefficient series.
  {
    const Theorem2Result t2 = theorem2_series(model_, std::min(model_.K, 256));
    double monotone_violation = 0.0;
    for (std::size_t i = 1; i < t2.partial_sums.size(); ++i)
      monotone_violation =
          std::max(monotone_violation, t2.partial_sums[i - 1] - t2.partial_sums[i]);
    add_check("series_partial_sums_monotone", monotone_violation, 0.0);
    add_check("series_bounded", std::max(0.0, t2.absolute_sum - t2.bound),
              1e-12 * (1.0 + t2.bound));
    const int n_max_freq = model_.potential.max_frequency();
    if (n_max_freq % 2 == 1) {
      add_check("series_stabilization_index",
                std::abs(t2.stabilization_index - (n_max_freq + 1) / 2), 0.0);
    }
  }

  // Contour identities per cut.
  {
    const std::vector<CutRow>& rows = cut_rows();
    const TraceLedger& led = ledger();

    double worst_secmom = 0.0, worst_closure = 0.0, worst_eq1 = 0.0, worst_eq2 = 0.0;
    double worst_reassembly = 0.0, worst_d1_split = 0.0, worst_res_closure = 0.0;
    for (const auto& row : rows) {
      worst_secmom = std::max(worst_secmom,
                              rel_dev(row.second_moment_quad, row.sum_sq_direct));
      worst_closure = std::max(worst_closure, row.closure_rel);
      worst_eq1 =
          std::max(worst_eq1, rel_dev(row.d1_theorem1_fine, row.d1_resolvent_fine));
      if (m_ >= 2)
        worst_eq2 =
            std::max(worst_eq2, rel_dev(row.d2_theorem1_fine, row.d2_resolvent_fine));

      // Ledger bookkeeping must reassemble the quadrature second moment.
      double corrections = 0.0, diag_terms = 0.0, osc_closed = 0.0, diag_closed = 0.0;
      for (int q = 0; q < row.n_p; ++q) {
        const LedgerRow& r = led.rows[q];
        corrections += r.correction_total;
        diag_terms += 2.0 * r.mu * r.diag_integral;
        diag_closed += 2.0 * r.mu * r.diag_integral;
        osc_closed +=
            r.mu * model_.potential.coefficient(2 * r.k + 1)(r.j - 1, r.j - 1);
      }
      worst_reassembly = std::max(
          worst_reassembly,
          rel_dev(row.lhs2 + corrections + diag_terms, row.second_moment_quad));
      // First-order term splits into the closed diagonal part plus the
      // oscillatory endpoint part.
      worst_d1_split = std::max(
          worst_d1_split, rel_dev(row.d1_theorem1_fine, diag_closed + osc_closed));
      // Residue sums against the quadrature value of the s = 2 term.
      if (m_ >= 2) {
        double res_sum = 0.0;
        for (int q = 0; q < row.n_p; ++q) res_sum += led.rows[q].residue_corr[0];
        worst_res_closure = std::max(worst_res_closure,
                                     rel_dev(res_sum, row.d2_theorem1_fine));
      }
    }
    add_check("second_moment_exactness", worst_secmom, 1e-8);
    add_check("expansion_closure", worst_closure, 1e-7);
    add_check("theorem1_equivalence_s1", worst_eq1, 1e-8);
    if (m_ >= 2) add_check("theorem1_equivalence_s2", worst_eq2, 1e-8);
    add_check("ledger_reassembly", worst_reassembly, 1e-8);
    add_check("first_term_split", worst_d1_split, 1e-7);
    if (m_ >= 2) add_check("residue_theorem_closure_s2", worst_res_closure, 1e-8);

    // Closed form versus quadrature for second-order residues.
    {
      const double tol = 1e-9;
      const double cluster_tol = 1e-9 * std::max(1.0, sys.mu[n - 1]);
      std::vector<PoleCluster> clusters = cluster_poles(sys.mu, cluster_tol);
      std::vector<const PoleCluster*> singles;
      for (const auto& c : clusters)
        if (c.indices.size() == 1 && c.indices[0] < led.n_max)
          singles.push_back(&c);
      std::mt19937 rng(20240817u);
      std::shuffle(singles.begin(), singles.end(), rng);
      if (singles.size() > 50) singles.resize(50);
      ContourOptions opts;
      opts.nodes_mult = run_.nodes_mult;
      double worst = 0.0;
      for (const PoleCluster* c : singles) {
        const double closed = residue_closed_form_s2(sys, c->indices[0]);
        const double quad = residue_at_pole(sys, *c, 2, ResidueRoute::kQuadrature, opts);
        worst = std::max(worst, std::abs(closed - quad) / (1.0 + std::abs(closed)));
      }
      add_check("residue_closed_vs_quadrature", worst, tol);
    }

    // Convergence of both trace formulas along the cuts.  The decay
    // comparisons are meaningful only when the error at the first cut
    // sits above the rounding floor of the partial sums.
    const CutRow& first = rows.front();
    const CutRow& last = rows.back();
    add_check("first_trace_convergence", last.err1, 0.01 * (1.0 + std::abs(rhs1_)));
    add_check("second_trace_convergence", last.err2, 0.01 * (1.0 + std::abs(rhs2_)));
    if (rows.size() >= 2) {
      const double floor1 = 1e-12 * (1.0 + std::abs(last.b_p) * last.n_p);
      const double floor2 = 1e-12 * (1.0 + std::abs(last.sum_sq_direct));
      if (first.err1 > floor1)
        add_check("first_trace_error_decay", std::max(0.0, last.err1 - first.err1), 0.0);
      if (first.err2 > floor2)
        add_check("second_trace_error_decay", std::max(0.0, last.err2 - first.err2), 0.0);
      add_check("remainder_decay",
                std::max(0.0, std::abs(last.remainder) - 0.1 * std::abs(first.remainder)),
                0.0);
    }

    // Remainder trend against the decay exponent of the tail bound.
    {
      const double floor = 1e-18 * (1.0 + std::abs(last.sum_sq_direct));
      std::vector<double> xs, ys;
      for (const auto& row : rows)
        if (std::abs(row.remainder) > floor) {
          xs.push_back(std::log(static_cast<double>(row.n_p)));
          ys.push_back(std::log(std::abs(row.remainder)));
        }
      const double delta = model_.constants.delta;
      const double bound_exponent = 4.0 + delta - delta * m_;
      double slope = -std::numeric_limits<double>::infinity();
      if (xs.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          sx += xs[i];
          sy += ys[i];
          sxx += xs[i] * xs[i];
          sxy += xs[i] * ys[i];
        }
        const double denom = xs.size() * sxx - sx * sx;
        if (denom > 0) slope = (xs.size() * sxy - sx * sy) / denom;
      }
      if (std::isfinite(slope))
        add_check("remainder_trend_slope", std::max(0.0, slope - bound_exponent), 1.0);
    }
  }

  // Subsequence constants.
  {
    weyl();
    add_check("gap_law_d2_positive",
              fitted_constants_.d2_estimate > 0.0 ? 0.0 : 1.0, 0.0);
    // The growth-law fit is a meaningful gate only once the extended
    // list reaches its asymptotic regime.
    if (weyl_.computed && weyl_.list_length >= 4096) {
      const double beta = model_.constants.beta;
      add_check("weyl_fit_mu", std::abs(weyl_.mu_fit.slope - beta), 0.05 * beta);
      add_check("weyl_fit_lambda", std::abs(weyl_.lambda_fit.slope - beta), 0.05 * beta);
    }
  }

  // Conjugate symmetry spot check of the resolvent-power traces.
  if (!sys.sparse.col.empty() && m_ >= 2) {
    const Complex probe(0.37 * sys.mu[0] + 0.11, 0.73 * sys.mu[0] + 0.19);
    const Complex up = trace_power(sys, probe, 2);
    const Complex down = trace_power(sys, std::conj(probe), 2);
    add_check("conjugate_symmetry",
              std::abs(down - std::conj(up)) / (1.0 + std::abs(up)), 1e-13);
  }
}

const std::vector<CheckRow>& Pipeline::checks() {
  if (!have_checks_) {
    run_checks();
    have_checks_ = true;
  }
  return checks_;
}

int Pipeline::dropped_cuts() {
  cuts();
  return dropped_cuts_;
}

bool Pipeline::checks_pass() {
  for (const auto& c : checks())
    if (!c.pass) return false;
  return true;
}

std::string Pipeline::validate_summary() {
  rhs1();
  std::ostringstream os;
  os << "model: r=" << model_.r << " a=" << format_double(model_.a)
     << " alpha=" << format_double(model_.alpha) << " T=" << model_.T << " K=" << model_.K
     << " terms=" << model_.potential.terms.size() << "\n";
  os << "constants: beta=" << format_double(model_.constants.beta)
     << " delta=" << format_double(model_.constants.delta) << " m=" << m_
     << " d1_estimate=" << format_double(model_.constants.d1_estimate) << "\n";
  os << "rhs_first=" << format_double(rhs1_) << " rhs_second=" << format_double(rhs2_)
     << "\n";
  return os.str();
}

std::string Pipeline::assemble_summary() {
  const GalerkinSystem& sys = system();
  const int n = sys.size();
  std::ostringstream os;
  os << "system: N=" << n << " nnz=" << sys.sparse.col.size() << " density="
     << format_double(static_cast<double>(sys.sparse.col.size()) /
                      (static_cast<double>(n) * n))
     << " half_bandwidth=" << sys.half_bandwidth
     << " qmat_max=" << format_double(sys.qmat.cwiseAbs().maxCoeff())
     << " mu_max=" << format_double(sys.mu[n - 1]) << "\n";
  return os.str();
}

namespace {

void csv_cut_mark(std::ostringstream& os, const std::vector<CutRow>& rows, int q) {
  int mark = 0;
  for (const auto& row : rows)
    if (row.n_p == q) mark = row.p;
  os << mark;
}

}  // namespace

std::string Pipeline::ledger_trace1_csv() {
  const TraceLedger& led = have_full_ledger_ ? ledger() : basic_ledger();
  const std::vector<CutRow>& rows = cut_rows();
  std::ostringstream os;
  os << "# first regularized trace ledger\n";
  os << "# rhs_first = " << format_double(rhs1()) << "\n";
  os << "q,k,j,mu,lambda,diag_integral,term,partial_sum,cut_p\n";
  double partial = 0.0;
  for (const auto& r : led.rows) {
    const double term = r.lambda - r.mu - r.diag_integral;
    partial += term;
    os << r.q << "," << r.k << "," << r.j << "," << format_double(r.mu) << ","
       << format_double(r.lambda) << "," << format_double(r.diag_integral) << ","
       << format_double(term) << "," << format_double(partial) << ",";
    csv_cut_mark(os, rows, r.q);
    os << "\n";
  }
  return os.str();
}

std::string Pipeline::ledger_trace2_csv() {
  const TraceLedger& led = ledger();
  const std::vector<CutRow>& rows = cut_rows();
  std::ostringstream os;
  os << "# second regularized trace ledger (m = " << m_ << ")\n";
  os << "# rhs_second = " << format_double(rhs2()) << "\n";
  os << "q,k,j,mu,lambda,sq_diff,correction_total,diag_term,term,partial_sum,cut_p\n";
  double partial = 0.0;
  for (const auto& r : led.rows) {
    const double sq = (r.lambda - r.mu) * (r.lambda + r.mu);
    const double diag = 2.0 * r.mu * r.diag_integral;
    const double term = sq - r.correction_total - diag;
    partial += term;
    os << r.q << "," << r.k << "," << r.j << "," << format_double(r.mu) << ","
       << format_double(r.lambda) << "," << format_double(sq) << ","
       << format_double(r.correction_total) << "," << format_double(diag) << ","
       << format_double(term) << "," << format_double(partial) << ",";
    csv_cut_mark(os, rows, r.q);
    os << "\n";
  }
  return os.str();
}

std::string Pipeline::checks_csv() {
  std::ostringstream os;
  os << "name,measured,tolerance,pass\n";
  for (const auto& c : checks())
    os << c.name << "," << format_double(c.measured) << "," << format_double(c.tolerance)
       << "," << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

std::string Pipeline::weyl_csv() {
  const WeylReport& w = weyl();
  std::ostringstream os;
  os << "list,count,window_lo,window_hi,slope,d1,target_beta,rel_err\n";
  if (w.computed) {
    const auto line = [&](const char* name, const WeylFit& fit) {
      os << name << "," << w.list_length << "," << fit.window_lo << "," << fit.window_hi
         << "," << format_double(fit.slope) << "," << format_double(fit.d1) << ","
         << format_double(w.target_beta) << ","
         << format_double(std::abs(fit.slope - w.target_beta) / w.target_beta) << "\n";
    };
    line("mu", w.mu_fit);
    line("lambda", w.lambda_fit);
  }
  return os.str();
}

std::string Pipeline::report_json() {
  const std::vector<CutRow>& rows = cut_rows();
  const std::vector<CheckRow>& chk = checks();
  const WeylReport& w = weyl();
  std::ostringstream os;
  os << "{\n  \"model\": {\"r\": " << model_.r << ", \"a\": " << format_double(model_.a)
     << ", \"alpha\": " << format_double(model_.alpha) << ", \"T\": " << model_.T
     << ", \"K\": " << model_.K << ", \"terms\": [";
  for (std::size_t i = 0; i < model_.potential.terms.size(); ++i) {
    const auto& t = model_.potential.terms[i];
    os << (i ? ", " : "") << "{\"n\": " << t.n << ", \"matrix\": [";
    for (int rr = 0; rr < t.coeff.rows(); ++rr) {
      os << (rr ? ", " : "") << "[";
      for (int cc = 0; cc < t.coeff.cols(); ++cc)
        os << (cc ? ", " : "") << format_double(t.coeff(rr, cc));
      os << "]";
    }
    os << "]}";
  }
  os << "]},\n";
  os << "  \"constants\": {\"beta\": " << format_double(model_.constants.beta)
     << ", \"delta\": " << format_double(model_.constants.delta) << ", \"m\": " << m_
     << ", \"d1_estimate\": " << format_double(fitted_constants_.d1_estimate)
     << ", \"d2_estimate\": " << format_double(fitted_constants_.d2_estimate) << "},\n";
  os << "  \"rhs\": {\"first\": " << format_double(rhs1())
     << ", \"first_endpoint\": " << format_double(rhs1_routes_.endpoint)
     << ", \"first_series\": " << format_double(rhs1_routes_.series)
     << ", \"second\": " << format_double(rhs2())
     << ", \"second_endpoint\": " << format_double(rhs2_routes_.endpoint)
     << ", \"second_series\": " << format_double(rhs2_routes_.series) << "},\n";
  os << "  \"cuts\": [\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CutRow& r = rows[i];
    os << "    {\"p\": " << r.p << ", \"n_p\": " << r.n_p
       << ", \"b_p\": " << format_double(r.b_p) << ", \"gap_p\": " << format_double(r.gap_p)
       << ", \"lhs1\": " << format_double(r.lhs1) << ", \"err1\": " << format_double(r.err1)
       << ", \"lhs2\": " << format_double(r.lhs2) << ", \"err2\": " << format_double(r.err2)
       << ", \"remainder\": " << format_double(r.remainder)
       << ", \"second_moment\": " << format_double(r.second_moment_quad)
       << ", \"sum_sq_direct\": " << format_double(r.sum_sq_direct)
       << ", \"closure_rel\": " << format_double(r.closure_rel)
       << ", \"nodes_fine\": " << r.nodes_fine << ", \"nodes_base\": " << r.nodes_base
       << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"checks\": [\n";
  for (std::size_t i = 0; i < chk.size(); ++i) {
    os << "    {\"name\": \"" << chk[i].name
       << "\", \"measured\": " << format_double(chk[i].measured)
       << ", \"tolerance\": " << format_double(chk[i].tolerance) << ", \"pass\": "
       << (chk[i].pass ? "true" : "false") << "}" << (i + 1 < chk.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"weyl\": {\"computed\": " << (w.computed ? "true" : "false");
  if (w.computed) {
    os << ", \"mu_slope\": " << format_double(w.mu_fit.slope)
       << ", \"mu_d1\": " << format_double(w.mu_fit.d1)
       << ", \"lambda_slope\": " << format_double(w.lambda_fit.slope)
       << ", \"lambda_d1\": " << format_double(w.lambda_fit.d1)
       << ", \"target_beta\": " << format_double(w.target_beta)
       << ", \"list_length\": " << w.list_length;
  }
  os << "},\n";
  os << "  \"dropped_cuts\": " << dropped_cuts() << ",\n";
  os << "  \"status\": \"" << (checks_pass() ? "pass" : "fail") << "\"\n";
  os << "}\n";
  return os.str();
}

}  // namespace regtrace
