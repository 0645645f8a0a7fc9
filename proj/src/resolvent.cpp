#include "regtrace/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "regtrace/parallel.hpp"

namespace regtrace {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Complex> pole_scales(const Eigen::VectorXd& mu, Complex lambda) {
  std::vector<Complex> d(mu.size());
  for (int i = 0; i < mu.size(); ++i) d[i] = 1.0 / (mu[i] - lambda);
  return d;
}

void check_pole_distance(const Eigen::VectorXd& mu, Complex lambda) {
  const double floor = 1e-8 * std::max(1.0, mu.cwiseAbs().maxCoeff());
  for (int i = 0; i < mu.size(); ++i) {
    if (std::abs(mu[i] - lambda) < floor) {
      std::ostringstream os;
      os << "resolvent trace: lambda = (" << lambda.real() << ", " << lambda.imag()
         << ") too close to the unperturbed eigenvalue mu_" << (i + 1) << " = " << mu[i];
      throw NumericalError(os.str());
    }
  }
}

double checked_real(Complex v, double tol, const char* what) {
  if (std::abs(v.imag()) > tol * (1.0 + std::abs(v.real()))) {
    std::ostringstream os;
    os << what << ": quadrature failure, imaginary part " << v.imag()
       << " exceeds tolerance for real part " << v.real();
    throw NumericalError(os.str());
  }
  return v.real();
}

// Trapezoidal quadrature on a circle with conjugate-pair node layout.
// fn fills a vector of integrand channel values at one node; nodes on
// the lower half-circle reuse the conjugate of the mirrored node (valid
// for the real-symmetric data handled here).  Returns the raw sums
// sum_j e^{i theta_j} f(lambda_j); the caller applies (radius/nodes) and
// the form prefactor.  Node evaluations run on the worker pool; the
// reduction is a fixed-order serial loop.
std::vector<Complex> circle_sums(Complex center, double radius, int nodes, int channels,
                                 const std::function<void(Complex, std::vector<Complex>&)>& fn) {
  const int half = nodes / 2;
  std::vector<std::vector<Complex>> vals(half);
  parallel_for(half, [&](std::size_t j) {
    const double theta = 2.0 * kPi * (static_cast<double>(j) + 0.5) / nodes;
    const Complex w = std::polar(1.0, theta);
    vals[j].assign(channels, Complex(0.0, 0.0));
    fn(center + radius * w, vals[j]);
  });
  std::vector<Complex> out(channels, Complex(0.0, 0.0));
  for (int j = 0; j < nodes; ++j) {
    const double theta = 2.0 * kPi * (j + 0.5) / nodes;
    const Complex w = std::polar(1.0, theta);
    const int mirror = nodes - 1 - j;
    for (int ch = 0; ch < channels; ++ch) {
      const Complex f = (j < half) ? vals[j][ch] : std::conj(vals[mirror][ch]);
      out[ch] += w * f;
    }
  }
  return out;
}

// tr(B^s) for s = 1..s_max with B = Q diag(d), optionally the weighted
// diagonals tr(D B^s) and the perturbed-resolvent remainder trace
// tr((M - lambda)^{-1} B^{m+1}).
struct NodePowerTraces {
  std::vector<Complex> pow;       // s = 1..s_max
  std::vector<Complex> weighted;  // s = 1..s_max
  Complex remainder{0.0, 0.0};
};

NodePowerTraces node_power_traces(const GalerkinSystem& sys, Complex lambda, int s_max,
                                  bool want_weighted, bool want_remainder,
                                  double drop_rel) {
  NodePowerTraces out;
  out.pow.assign(s_max + 1, Complex(0.0, 0.0));
  out.weighted.assign(s_max + 1, Complex(0.0, 0.0));
  const int n = sys.size();
  if (sys.sparse.col.empty()) return out;  // Q = 0

  const std::vector<Complex> d = pole_scales(sys.mu, lambda);
  static thread_local DiagSparse b;
  fill_diag_scaled(sys.sparse, d, b);
  const int w = std::max(1, sys.half_bandwidth);

  // Half-power scheme: only powers up to ceil((s_max+1)/2) are formed;
  // higher traces come from banded pair products, which keeps the band
  // growth (and cost) at half the naive depth.  The workspace persists
  // across nodes to keep large pages resident.
  const int top = want_remainder ? s_max + 1 : s_max;
  const int half = (top + 1) / 2;
  static thread_local std::vector<BandedComplex> xs;
  if (static_cast<int>(xs.size()) < half + 1) xs.resize(half + 1);
  to_banded_into(b, xs[1]);
  for (int a = 2; a <= half; ++a) multiply_trim(xs[a - 1], b, drop_rel, xs[a]);

  for (int s = 1; s <= s_max; ++s) {
    if (s <= half) {
      out.pow[s] = trace(xs[s]);
      if (want_weighted) out.weighted[s] = weighted_trace(xs[s], d);
    } else {
      const int a = (s + 1) / 2, c = s - (s + 1) / 2;
      out.pow[s] = pair_trace(xs[a], xs[c]);
      if (want_weighted) out.weighted[s] = pair_trace(xs[a], xs[c], &d);
    }
  }
  if (want_remainder) {
    std::vector<Complex> shifted(n);
    std::vector<double> qdiag(n);
    for (int i = 0; i < n; ++i) {
      shifted[i] = Complex(sys.mu[i], 0.0) - lambda;
      qdiag[i] = sys.qmat(i, i);
    }
    BandedLDLT ldlt(sys.sparse, qdiag, w, shifted);
    out.remainder = ldlt.trace_inverse_between(xs[half], xs[top - half]);
  }
  return out;
}

}  // namespace

std::vector<PoleCluster> cluster_poles(const Eigen::VectorXd& mu, double tol) {
  const int n = static_cast<int>(mu.size());
  std::vector<PoleCluster> clusters;
  int start = 0;
  while (start < n) {
    int end = start;
    while (end + 1 < n && mu[end + 1] - mu[end] <= tol) ++end;
    PoleCluster c;
    double sum = 0.0;
    for (int i = start; i <= end; ++i) {
      c.indices.push_back(i);
      sum += mu[i];
    }
    c.value = sum / c.indices.size();
    clusters.push_back(std::move(c));
    start = end + 1;
  }
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    double dist = std::numeric_limits<double>::infinity();
    if (ci > 0) dist = std::min(dist, clusters[ci].value - clusters[ci - 1].value);
    if (ci + 1 < clusters.size())
      dist = std::min(dist, clusters[ci + 1].value - clusters[ci].value);
    clusters[ci].radius = std::isfinite(dist)
                              ? 0.5 * dist
                              : std::max(1.0, std::abs(clusters[ci].value));
  }
  return clusters;
}

int contour_node_count(double radius, double gap, int mult) {
  const int base =
      std::max(64, 16 * static_cast<int>(std::ceil(radius / std::max(gap, 1e-300))));
  return base * std::max(1, mult);
}

Complex trace_power(const GalerkinSystem& sys, Complex lambda, int s) {
  if (s < 1) throw ValidationError("trace_power: s must be a positive integer");
  check_pole_distance(sys.mu, lambda);
  if (sys.sparse.col.empty()) return Complex(0.0, 0.0);
  NodePowerTraces t = node_power_traces(sys, lambda, s, false, false, 1e-30);
  return t.pow[s];
}

double residue_closed_form_s2(const GalerkinSystem& sys, int q0) {
  const double mu_q = sys.mu[q0];
  double acc = sys.qmat(q0, q0) * sys.qmat(q0, q0);
  for (int t = sys.sparse.row_ptr[q0]; t < sys.sparse.row_ptr[q0 + 1]; ++t) {
    const int b = sys.sparse.col[t];
    if (b == q0) continue;
    const double qv = sys.sparse.val[t];
    acc -= 2.0 * mu_q * qv * qv / (sys.mu[b] - mu_q);
  }
  return acc;
}

ResidueTable residues_bulk(const GalerkinSystem& sys,
                           const std::vector<PoleCluster>& clusters, int m,
                           const ContourOptions& opts) {
  ResidueTable table;
  table.m = m;
  table.values.assign(clusters.size(), std::vector<double>(std::max(0, m - 1), 0.0));
  if (m < 2 || sys.sparse.col.empty()) return table;

  const int n = sys.size();
  const double mu_max = sys.mu[n - 1];
  const int nodes = 64 * std::max(1, (opts.nodes_mult + 3) / 4);

  parallel_for(clusters.size(), [&](std::size_t ci) {
    const PoleCluster& cl = clusters[ci];
    if (cl.radius < 1e-10 * std::max(1.0, mu_max)) {
      std::ostringstream os;
      os << "residue: degenerate gap around mu = " << cl.value
         << " (cluster radius " << cl.radius << ")";
      throw NumericalError(os.str());
    }
    const int c = static_cast<int>(cl.indices.size());
    const double rho = 0.5 * cl.radius;
    const int deg = m;  // channel series carried mod t^deg

    auto fn = [&](Complex lambda, std::vector<Complex>& out) {
      // Split B = A + (channel): A = Q D_reg zeroes the cluster columns,
      // the channel is the rank-c update through the cluster states.
      // Walks avoiding the cluster are analytic inside the circle and
      // integrate to zero, so only the channel part is accumulated:
      //   tr(B^s) - tr(A^s) = s [t^s] sum_nu (1/nu) tr((t H(t))^nu),
      //   H(t) = diag(u) G(t),  G_a = rows_cluster(A^a Q cols_cluster).
      std::vector<Complex> d(n);
      for (int i = 0; i < n; ++i) d[i] = 1.0 / (sys.mu[i] - lambda);
      std::vector<Complex> dreg = d;
      for (int idx : cl.indices) dreg[idx] = Complex(0.0, 0.0);

      // Y = A^a * U, U = Q columns at the cluster indices.
      std::vector<Complex> y(static_cast<std::size_t>(n) * c, Complex(0.0, 0.0));
      for (int t = 0; t < c; ++t) {
        const int q0 = cl.indices[t];
        for (int s = sys.sparse.row_ptr[q0]; s < sys.sparse.row_ptr[q0 + 1]; ++s)
          y[static_cast<std::size_t>(sys.sparse.col[s]) * c + t] = sys.sparse.val[s];
      }
      // g[a] is the c x c coefficient of t^a in G(t), row-major.
      std::vector<std::vector<Complex>> g(deg, std::vector<Complex>(c * c));
      std::vector<Complex> ynext(static_cast<std::size_t>(n) * c);
      for (int a = 0; a < deg; ++a) {
        for (int t1 = 0; t1 < c; ++t1)
          for (int t2 = 0; t2 < c; ++t2)
            g[a][t1 * c + t2] = y[static_cast<std::size_t>(cl.indices[t1]) * c + t2];
        if (a + 1 == deg) break;
        std::fill(ynext.begin(), ynext.end(), Complex(0.0, 0.0));
        for (int i = 0; i < n; ++i) {
          Complex* yi = &ynext[static_cast<std::size_t>(i) * c];
          for (int s = sys.sparse.row_ptr[i]; s < sys.sparse.row_ptr[i + 1]; ++s) {
            const Complex f = sys.sparse.val[s] * dreg[sys.sparse.col[s]];
            if (f == Complex(0.0, 0.0)) continue;
            const Complex* yj = &y[static_cast<std::size_t>(sys.sparse.col[s]) * c];
            for (int t = 0; t < c; ++t) yi[t] += f * yj[t];
          }
        }
        std::swap(y, ynext);
      }
      // H(t) = diag(u) G(t) over the cluster rows.
      for (int a = 0; a < deg; ++a)
        for (int t1 = 0; t1 < c; ++t1) {
          const Complex u = d[cl.indices[t1]];
          for (int t2 = 0; t2 < c; ++t2) g[a][t1 * c + t2] *= u;
        }
      // Accumulate sum_nu (1/nu) [t^{s-nu}] tr(H^nu) for every s.
      std::vector<std::vector<Complex>> p = g;  // H^nu, nu = 1
      std::vector<Complex> chan(m + 1, Complex(0.0, 0.0));
      std::vector<std::vector<Complex>> pn(deg, std::vector<Complex>(c * c));
      for (int nu = 1; nu <= m; ++nu) {
        for (int s = nu; s <= m; ++s) {
          const int want = s - nu;
          if (want >= deg) continue;
          Complex tr(0.0, 0.0);
          for (int t1 = 0; t1 < c; ++t1) tr += p[want][t1 * c + t1];
          chan[s] += tr / static_cast<double>(nu);
        }
        if (nu == m) break;
        for (auto& coef : pn) std::fill(coef.begin(), coef.end(), Complex(0.0, 0.0));
        for (int d1 = 0; d1 < deg; ++d1)
          for (int d2 = 0; d1 + d2 < deg; ++d2)
            for (int t1 = 0; t1 < c; ++t1)
              for (int t2 = 0; t2 < c; ++t2) {
                Complex acc(0.0, 0.0);
                for (int t3 = 0; t3 < c; ++t3)
                  acc += p[d1][t1 * c + t3] * g[d2][t3 * c + t2];
                pn[d1 + d2][t1 * c + t2] += acc;
              }
        std::swap(p, pn);
      }
      for (int s = 2; s <= m; ++s)
        out[s - 2] = lambda * (static_cast<double>(s) * chan[s]);
    };

    // Serial inner quadrature: the cluster loop is already parallel.
    const int half = nodes / 2;
    std::vector<std::vector<Complex>> vals(half);
    for (int j = 0; j < half; ++j) {
      const double theta = 2.0 * kPi * (j + 0.5) / nodes;
      vals[j].assign(m - 1, Complex(0.0, 0.0));
      fn(Complex(cl.value, 0.0) + std::polar(rho, theta), vals[j]);
    }
    std::vector<Complex> sums(m - 1, Complex(0.0, 0.0));
    for (int j = 0; j < nodes; ++j) {
      const double theta = 2.0 * kPi * (j + 0.5) / nodes;
      const Complex w = std::polar(1.0, theta);
      const int mirror = nodes - 1 - j;
      for (int s = 0; s < m - 1; ++s) {
        const Complex f = (j < half) ? vals[j][s] : std::conj(vals[mirror][s]);
        sums[s] += w * f;
      }
    }
    for (int s = 2; s <= m; ++s) {
      const Complex v = sums[s - 2] * (rho / nodes);
      table.values[ci][s - 2] = checked_real(v, 1e-9, "residue_at_pole");
    }
  });
  return table;
}

double residue_at_pole(const GalerkinSystem& sys, const PoleCluster& cluster, int s,
                       ResidueRoute route, const ContourOptions& opts) {
  if (s < 2) throw ValidationError("residue_at_pole: s >= 2 is required");
  const double mu_max = std::max(1.0, sys.mu[sys.size() - 1]);
  if (cluster.radius < 1e-10 * mu_max) {
    std::ostringstream os;
    os << "residue: degenerate gap around mu = " << cluster.value << " (cluster radius "
       << cluster.radius << ")";
    throw NumericalError(os.str());
  }
  if (route == ResidueRoute::kAuto && s == 2 && cluster.indices.size() == 1)
    return residue_closed_form_s2(sys, cluster.indices[0]);
  ResidueTable t = residues_bulk(sys, {cluster}, s, opts);
  return t.values[0][s - 2];
}

double contour_D_ps(const GalerkinSystem& sys, const ContourSpec& contour, int s,
                    DpsForm form, const ContourOptions& opts) {
  if (s < 1) throw ValidationError("contour_D_ps: s must be positive");
  auto fn = [&](Complex lambda, std::vector<Complex>& out) {
    NodePowerTraces t =
        node_power_traces(sys, lambda, s, form == DpsForm::kResolvent, false, opts.drop_rel);
    out[0] = (form == DpsForm::kTheorem1) ? lambda * t.pow[s]
                                          : lambda * lambda * t.weighted[s];
  };
  const std::vector<Complex> sums =
      circle_sums(contour.center, contour.radius, contour.nodes, 1, fn);
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  Complex v;
  if (form == DpsForm::kTheorem1) {
    v = sums[0] * (sign * 2.0 * contour.radius / (static_cast<double>(s) * contour.nodes));
  } else {
    v = sums[0] * (-sign * contour.radius / static_cast<double>(contour.nodes));
  }
  return checked_real(v, 1e-8, "contour_D_ps");
}

double contour_second_moment(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                             const ContourSpec& contour) {
  const int n_mu = count_inside(sys.mu, contour);
  const int n_lambda = count_inside(spectrum.values, contour);
  if (n_mu != n_lambda) {
    std::ostringstream os;
    os << "contour selection: circle of radius " << contour.radius << " encloses "
       << n_mu << " unperturbed but " << n_lambda
       << " perturbed eigenvalues; pick a different cut";
    throw NumericalError(os.str());
  }
  const int n = sys.size();
  auto fn = [&](Complex lambda, std::vector<Complex>& out) {
    Complex g(0.0, 0.0);
    for (int q = 0; q < n; ++q)
      g += 1.0 / (spectrum.values[q] - lambda) - 1.0 / (sys.mu[q] - lambda);
    out[0] = lambda * lambda * g;
  };
  const std::vector<Complex> sums =
      circle_sums(contour.center, contour.radius, contour.nodes, 1, fn);
  const Complex v = sums[0] * (-contour.radius / static_cast<double>(contour.nodes));
  return checked_real(v, 1e-8, "contour_second_moment");
}

double remainder_estimate(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                          const ContourSpec& contour, int m, const ContourOptions& opts) {
  const int n_mu = count_inside(sys.mu, contour);
  const int n_lambda = count_inside(spectrum.values, contour);
  if (n_mu != n_lambda) {
    std::ostringstream os;
    os << "contour selection: circle of radius " << contour.radius << " encloses "
       << n_mu << " unperturbed but " << n_lambda << " perturbed eigenvalues";
    throw NumericalError(os.str());
  }
  if (sys.sparse.col.empty()) return 0.0;
  auto fn = [&](Complex lambda, std::vector<Complex>& out) {
    NodePowerTraces t = node_power_traces(sys, lambda, m, false, true, opts.drop_rel);
    out[0] = lambda * lambda * t.remainder;
  };
  const std::vector<Complex> sums =
      circle_sums(contour.center, contour.radius, contour.nodes, 1, fn);
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const Complex v = sums[0] * (sign * contour.radius / static_cast<double>(contour.nodes));
  return checked_real(v, 1e-8, "remainder_estimate");
}

CutTraces cut_trace_suite(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                          double b_p, double gap_p, int n_p, int m,
                          const ContourOptions& opts) {
  CutTraces out;
  out.dps_theorem1.assign(m + 1, 0.0);
  out.dps_resolvent.assign(m + 1, 0.0);
  out.nodes_fine = contour_node_count(b_p, gap_p, opts.nodes_mult);

  const int n = sys.size();
  const bool zero_q = sys.sparse.col.empty();

  // Expansion grid size: the trapezoid tail of a pole at distance gap/2
  // from the circle decays like exp(-M gap/(2 b)); the near-pole weight
  // of the higher-order integrands is ~ b (2 qbar/gap)^3 times a path
  // count.  Size M so that tail * weight stays two orders below the
  // closure tolerance 1e-7 (1 + |sum of squared differences|), never
  // under the base node rule.
  {
    double qbar = 0.0;
    for (double v : sys.sparse.val) qbar = std::max(qbar, std::abs(v));
    double ssd = 0.0;
    for (int q = 0; q < n_p; ++q) {
      const double l = spectrum.values[q], u = sys.mu[q];
      ssd += (l - u) * (l + u);
    }
    const double weight =
        b_p * 50.0 * std::pow(2.0 * qbar / gap_p, 3.0) + 1e-300;
    const double budget = 1e-9 * (1.0 + std::abs(ssd));
    const double needed =
        (2.0 * b_p / gap_p) * std::log(std::max(1.0, weight / budget));
    int nodes = std::max(contour_node_count(b_p, gap_p, 1),
                         2 * (static_cast<int>(needed) / 2 + 1));
    nodes *= std::max(1, opts.nodes_mult / 4);
    out.nodes_base = nodes;
  }

  ContourSpec fine{Complex(0.0, 0.0), b_p, out.nodes_fine};
  validate_cut_contour(sys.mu, &spectrum.values, fine, gap_p, n_p);

  // Fine grid: O(nnz) integrands only (second moment, s <= 2 terms).
  auto fine_fn = [&](Complex lambda, std::vector<Complex>& o) {
    Complex g(0.0, 0.0);
    for (int q = 0; q < n; ++q)
      g += 1.0 / (spectrum.values[q] - lambda) - 1.0 / (sys.mu[q] - lambda);
    o[0] = lambda * lambda * g;
    if (zero_q) return;
    Complex t1(0.0, 0.0), t2(0.0, 0.0), w1(0.0, 0.0), w2(0.0, 0.0);
    std::vector<Complex> d = pole_scales(sys.mu, lambda);
    for (int i = 0; i < n; ++i) {
      const Complex di = d[i];
      for (int t = sys.sparse.row_ptr[i]; t < sys.sparse.row_ptr[i + 1]; ++t) {
        const int j = sys.sparse.col[t];
        const double qv = sys.sparse.val[t];
        if (j == i) {
          t1 += qv * di;
          w1 += qv * di * di;
        }
        const Complex pair = qv * qv * di * d[j];
        t2 += pair;
        w2 += pair * di;
      }
    }
    o[1] = lambda * t1;
    o[2] = lambda * t2;
    o[3] = lambda * lambda * w1;
    o[4] = lambda * lambda * w2;
  };
  const std::vector<Complex> fs = circle_sums(fine.center, b_p, out.nodes_fine, 5, fine_fn);
  const double wf = b_p / static_cast<double>(out.nodes_fine);
  out.second_moment = checked_real(fs[0] * (-wf), 1e-8, "contour_second_moment");
  if (!zero_q) {
    out.d1_theorem1_fine = checked_real(fs[1] * (-2.0 * wf), 1e-8, "contour_D_ps");
    out.d1_resolvent_fine = checked_real(fs[3] * (wf), 1e-8, "contour_D_ps");
    if (m >= 2) {
      out.d2_theorem1_fine = checked_real(fs[2] * (wf), 1e-8, "contour_D_ps");
      out.d2_resolvent_fine = checked_real(fs[4] * (-wf), 1e-8, "contour_D_ps");
    }
  }

  // Base grid: banded resolvent powers for every expansion order plus
  // the remainder, evaluated jointly so the expansion telescopes.
  if (!zero_q) {
    const int channels = 2 * m + 1;
    auto base_fn = [&](Complex lambda, std::vector<Complex>& o) {
      NodePowerTraces t = node_power_traces(sys, lambda, m, true, true, opts.drop_rel);
      int ch = 0;
      for (int s = 1; s <= m; ++s) {
        o[ch++] = lambda * t.pow[s];
        o[ch++] = lambda * lambda * t.weighted[s];
      }
      o[ch] = lambda * lambda * t.remainder;
    };
    const std::vector<Complex> bs =
        circle_sums(fine.center, b_p, out.nodes_base, channels, base_fn);
    const double wb = b_p / static_cast<double>(out.nodes_base);
    int ch = 0;
    for (int s = 1; s <= m; ++s) {
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      out.dps_theorem1[s] =
          checked_real(bs[ch++] * (sign * 2.0 * wb / s), 1e-8, "contour_D_ps");
      out.dps_resolvent[s] = checked_real(bs[ch++] * (-sign * wb), 1e-8, "contour_D_ps");
    }
    const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
    out.remainder = checked_real(bs[ch] * (sign_m * wb), 1e-8, "remainder_estimate");
  } else {
    out.d1_theorem1_fine = 0.0;
    out.d1_resolvent_fine = 0.0;
    out.d2_theorem1_fine = 0.0;
    out.d2_resolvent_fine = 0.0;
  }
  return out;
}

int count_inside(const Eigen::VectorXd& values, const ContourSpec& contour) {
  int count = 0;
  for (int i = 0; i < values.size(); ++i)
    if (std::abs(Complex(values[i], 0.0) - contour.center) < contour.radius) ++count;
  return count;
}

void validate_cut_contour(const Eigen::VectorXd& mu, const Eigen::VectorXd* lambda,
                          const ContourSpec& contour, double gap, int n_p) {
  const int n_mu = count_inside(mu, contour);
  if (n_mu != n_p) {
    std::ostringstream os;
    os << "contour selection: expected " << n_p << " unperturbed eigenvalues inside the "
       << "circle of radius " << contour.radius << ", found " << n_mu;
    throw NumericalError(os.str());
  }
  auto check_sep = [&](const Eigen::VectorXd& v, const char* label) {
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(std::abs(Complex(v[i], 0.0) - contour.center) - contour.radius) <
          0.25 * gap) {
        std::ostringstream os;
        os << "contour selection: " << label << " eigenvalue " << v[i]
           << " lies within gap/4 of the circle of radius " << contour.radius;
        throw NumericalError(os.str());
      }
    }
  };
  check_sep(mu, "unperturbed");
  if (lambda) {
    const int n_l = count_inside(*lambda, contour);
    if (n_l != n_p) {
      std::ostringstream os;
      os << "contour selection: expected " << n_p << " perturbed eigenvalues inside, found "
         << n_l;
      throw NumericalError(os.str());
    }
    check_sep(*lambda, "perturbed");
  }
  if (contour.nodes < 64 ||
      contour.nodes < 16 * static_cast<int>(std::ceil(contour.radius / gap))) {
    throw NumericalError("contour selection: node count below the quadrature rule floor");
  }
}

}  // namespace regtrace
