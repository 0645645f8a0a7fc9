#pragma once

#include <Eigen/Dense>
#include <vector>

#include "regtrace/model.hpp"

namespace regtrace {

// One unperturbed eigenmode: cosine index k, A-eigenindex j, and the
// eigenvalue mu = (k + 1/2)^(2r) + gamma_j.  q is the 1-based rank in
// ascending mu order (ties broken lexicographically by (j, k)).
struct BasisIndex {
  int q = 0;
  int k = 0;
  int j = 0;
  double mu = 0.0;
};

// Sparse row storage of the perturbation matrix, kept alongside the
// dense copy for the resolvent-power kernels.
struct SparseRows {
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;
  int size() const { return static_cast<int>(row_ptr.size()) - 1; }
};

struct GalerkinSystem {
  SpectralModel model;
  std::vector<BasisIndex> basis;
  Eigen::VectorXd mu;      // unperturbed eigenvalues, ascending
  Eigen::MatrixXd qmat;    // (Q psi_p, psi_q) inner products
  SparseRows sparse;       // nonzero pattern of qmat
  int half_bandwidth = 0;  // max |p - q| over nonzeros

  int size() const { return static_cast<int>(basis.size()); }
  // Full system matrix diag(mu) + Q.
  Eigen::MatrixXd dense_matrix() const;
};

// All K*T modes sorted by eigenvalue with the documented tie-break.
std::vector<BasisIndex> enumerate_basis(const SpectralModel& model);

// I = Int_0^pi cos(n x) cos((k+1/2)x) cos((k'+1/2)x) dx in closed form:
// (pi/4) [n = k+k'+1] + (pi/4) [n = |k-k'|] for n >= 1, (pi/2) [k = k'] for n = 0.
double overlap_integral(int n, int k, int kp);

GalerkinSystem assemble_Q_matrix(const SpectralModel& model,
                                 const std::vector<BasisIndex>& basis);

}  // namespace regtrace
