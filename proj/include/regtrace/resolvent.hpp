#pragma once

#include <complex>
#include <vector>

#include "regtrace/banded.hpp"
#include "regtrace/eigensolver.hpp"
#include "regtrace/galerkin.hpp"

namespace regtrace {

// Circle used for trapezoidal contour quadrature.  Nodes sit at the
// half-offset angles 2*pi*(j+1/2)/nodes so none touches the real axis
// and they come in conjugate pairs.
struct ContourSpec {
  Complex center{0.0, 0.0};
  double radius = 0.0;
  int nodes = 0;
};

// Group of numerically coincident unperturbed eigenvalues, treated as a
// single pole of the resolvent traces.
struct PoleCluster {
  double value = 0.0;
  std::vector<int> indices;  // 0-based positions in the sorted mu list
  double radius = 0.0;       // half the distance to the nearest external mu
};

enum class DpsForm { kResolvent, kTheorem1 };
enum class ResidueRoute { kAuto, kQuadrature };

struct ContourOptions {
  int nodes_mult = 4;       // multiplier on the 16*ceil(radius/gap) node floor
  double drop_rel = 1e-18;  // band trimming tolerance for resolvent powers
};

// Partition of 1..N into pole clusters with tolerance tol.
std::vector<PoleCluster> cluster_poles(const Eigen::VectorXd& mu, double tol);

// Node count rule shared by all circles: max(64, 16*ceil(radius/gap)) times mult.
int contour_node_count(double radius, double gap, int mult);

// tr((Q R0_lambda)^s), evaluated as tr(B^s) with B = Q * diag(1/(mu - lambda)).
Complex trace_power(const GalerkinSystem& sys, Complex lambda, int s);

// Residue of lambda -> tr(lambda (Q R0)^s) at the cluster value.  For
// s = 2 and singleton clusters the closed form
//   Q_qq^2 - 2 mu_q sum_{b != q} Q_qb^2 / (mu_b - mu_q)
// is used; otherwise trapezoidal quadrature on the circle
// (cluster.value, cluster.radius/2).
double residue_at_pole(const GalerkinSystem& sys, const PoleCluster& cluster, int s,
                       ResidueRoute route = ResidueRoute::kAuto,
                       const ContourOptions& opts = {});

double residue_closed_form_s2(const GalerkinSystem& sys, int q0);

// Residues for s = 2..m for every cluster, via the pole-channel
// reduction: on the small circle only the walks through the cluster
// contribute to the integral, and those are reachable through a rank-c
// update of the regularized resolvent power series.  Cost per node is a
// handful of sparse mat-vecs instead of full banded powers.
struct ResidueTable {
  int m = 0;
  std::vector<std::vector<double>> values;  // [cluster][s-2], s = 2..m
};
ResidueTable residues_bulk(const GalerkinSystem& sys,
                           const std::vector<PoleCluster>& clusters, int m,
                           const ContourOptions& opts = {});

// D_ps of the expansion, by trapezoidal quadrature over the given
// contour.  kResolvent integrates lambda^2 tr(R0 (Q R0)^s); kTheorem1
// integrates lambda tr((Q R0)^s) with the 2/(s) weight.
double contour_D_ps(const GalerkinSystem& sys, const ContourSpec& contour, int s,
                    DpsForm form, const ContourOptions& opts = {});

// -(1/2 pi i) Int lambda^2 tr(R - R0) dlambda; equals the partial sum of
// lambda_q^2 - mu_q^2 over the enclosed states.
double contour_second_moment(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                             const ContourSpec& contour);

// D_p^(m): quadrature of lambda^2 tr(R (Q R0)^{m+1}) with the perturbed
// resolvent factored per node (banded LDL^T + selected inversion).
double remainder_estimate(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                          const ContourSpec& contour, int m,
                          const ContourOptions& opts = {});

// Everything a trace-formula cut needs from contour quadrature, in one
// sweep.  The expansion terms and the remainder all come from one base
// grid so that the resolvent expansion telescopes node by node and the
// closure identity is limited only by the second-moment quadrature
// error.  The cheap integrands (second moment, s <= 2 terms) are also
// evaluated on a finer grid for the high-precision cross checks.
struct CutTraces {
  double second_moment = 0.0;         // fine grid
  std::vector<double> dps_theorem1;   // s = 1..m, base grid
  std::vector<double> dps_resolvent;  // s = 1..m, base grid
  double remainder = 0.0;             // base grid
  double d1_theorem1_fine = 0.0;
  double d1_resolvent_fine = 0.0;
  double d2_theorem1_fine = 0.0;
  double d2_resolvent_fine = 0.0;
  int nodes_fine = 0;
  int nodes_base = 0;
};
CutTraces cut_trace_suite(const GalerkinSystem& sys, const SpectrumResult& spectrum,
                          double b_p, double gap_p, int n_p, int m,
                          const ContourOptions& opts = {});

// Counts eigenvalues strictly inside the circle.
int count_inside(const Eigen::VectorXd& values, const ContourSpec& contour);

// Checks that the circle |lambda| = radius separates the spectrum as the
// cut demands: exactly n_p values of mu (and lambda when given) inside,
// and no value within gap/4 of the circle.  Throws NumericalError.
void validate_cut_contour(const Eigen::VectorXd& mu, const Eigen::VectorXd* lambda,
                          const ContourSpec& contour, double gap, int n_p);

}  // namespace regtrace
