#include "regtrace/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace regtrace {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXd GalerkinSystem::dense_matrix() const {
  Eigen::MatrixXd m = qmat;
  m.diagonal() += mu;
  return m;
}

std::vector<BasisIndex> enumerate_basis(const SpectralModel& model) {
  std::vector<BasisIndex> basis;
  basis.reserve(static_cast<std::size_t>(model.K) * model.T);
  for (int j = 1; j <= model.T; ++j) {
    const double gj = gamma_j(model, j);
    for (int k = 0; k < model.K; ++k) {
      BasisIndex b;
      b.k = k;
      b.j = j;
      b.mu = std::pow(k + 0.5, 2.0 * model.r) + gj;
      basis.push_back(b);
    }
  }
  std::sort(basis.begin(), basis.end(), [](const BasisIndex& x, const BasisIndex& y) {
    if (x.mu != y.mu) return x.mu < y.mu;
    if (x.j != y.j) return x.j < y.j;
    return x.k < y.k;
  });
  for (std::size_t i = 0; i < basis.size(); ++i) basis[i].q = static_cast<int>(i) + 1;
  return basis;
}

double overlap_integral(int n, int k, int kp) {
  if (n == 0) return (k == kp) ? kPi / 2.0 : 0.0;
  double v = 0.0;
  if (n == k + kp + 1) v += kPi / 4.0;
  if (n == std::abs(k - kp)) v += kPi / 4.0;
  return v;
}

GalerkinSystem assemble_Q_matrix(const SpectralModel& model,
                                 const std::vector<BasisIndex>& basis) {
  GalerkinSystem sys;
  sys.model = model;
  sys.basis = basis;
  const int n = static_cast<int>(basis.size());
  sys.mu.resize(n);
  for (int i = 0; i < n; ++i) sys.mu[i] = basis[i].mu;

  sys.qmat = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      double v = 0.0;
      for (const auto& term : model.potential.terms) {
        const double I = overlap_integral(term.n, basis[p].k, basis[q].k);
        if (I != 0.0) v += I * term.coeff(basis[p].j - 1, basis[q].j - 1);
      }
      v *= 2.0 / kPi;
      sys.qmat(p, q) = v;
      sys.qmat(q, p) = v;
    }
  }

  sys.sparse.row_ptr.assign(n + 1, 0);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (sys.qmat(p, q) != 0.0) {
        sys.sparse.col.push_back(q);
        sys.sparse.val.push_back(sys.qmat(p, q));
        sys.half_bandwidth = std::max(sys.half_bandwidth, std::abs(p - q));
      }
    }
    sys.sparse.row_ptr[p + 1] = static_cast<int>(sys.sparse.col.size());
  }
  return sys;
}

}  // namespace regtrace
