#include "regtrace/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace regtrace {

namespace {

constexpr int kMaxSweeps = 40;

// One Jacobi rotation annihilating a(p,q), applied to a (upper triangle
// is authoritative) and accumulated into v.
inline void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, int p, int q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t;
  if (std::abs(theta) > 1e153) {
    t = 0.5 / theta;  // avoid theta^2 overflow; same first-order limit
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  const double app = a(p, p), aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) {
    if (i == p || i == q) continue;
    const double aip = a(i, p), aiq = a(i, q);
    const double nip = aip - s * (aiq + tau * aip);
    const double niq = aiq + s * (aip - tau * aiq);
    a(i, p) = nip;
    a(p, i) = nip;
    a(i, q) = niq;
    a(q, i) = niq;
  }
  for (int i = 0; i < n; ++i) {
    const double vip = v(i, p), viq = v(i, q);
    v(i, p) = vip - s * (viq + tau * vip);
    v(i, q) = viq + s * (vip - tau * viq);
  }
}

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int p = 0; p < n - 1; ++p)
    for (int q = p + 1; q < n; ++q) sum += a(p, q) * a(p, q);
  return std::sqrt(2.0 * sum);
}

double worst_off_diagonal(const Eigen::MatrixXd& a) {
  double worst = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int p = 0; p < n - 1; ++p)
    for (int q = p + 1; q < n; ++q) worst = std::max(worst, std::abs(a(p, q)));
  return worst;
}

}  // namespace

SpectrumResult eigh(const Eigen::MatrixXd& M) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw ValidationError("eigh: matrix must be square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "eigh: input not symmetric (relative asymmetry " << asym / scale << ")";
    throw ValidationError(os.str());
  }

  Eigen::MatrixXd a = 0.5 * (M + M.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double fro = a.norm();
  const double target = 1e-13 * std::max(fro, 1e-300);

  if (n > 1) {
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a) <= target) {
        converged = true;
        break;
      }
      // Threshold sweep: rotate only pairs that matter at the current
      // off-diagonal level; keeps sparse inputs cheap.
      const double thresh =
          (sweep < 3) ? 0.2 * off_diagonal_norm(a) / (n * n) : 0.0;
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = std::abs(a(p, q));
          if (apq == 0.0) continue;
          // Numerically negligible relative to the diagonal: flush to zero.
          if (apq <= 1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)))) {
            a(p, q) = 0.0;
            a(q, p) = 0.0;
            continue;
          }
          if (apq > thresh) rotate(a, v, p, q);
        }
      }
    }
    if (!converged && off_diagonal_norm(a) > target) {
      std::ostringstream os;
      os << "eigh: no convergence after " << kMaxSweeps
         << " sweeps; worst off-diagonal magnitude " << worst_off_diagonal(a);
      throw NumericalError(os.str());
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int x, int y) { return a(x, x) < a(y, y); });

  SpectrumResult res;
  res.values.resize(n);
  res.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    res.values[i] = a(order[i], order[i]);
    res.vectors.col(i) = v.col(order[i]);
  }
  res.residual_bound =
      (0.5 * (M + M.transpose()) * res.vectors - res.vectors * res.values.asDiagonal())
          .colwise()
          .norm()
          .maxCoeff();
  return res;
}

}  // namespace regtrace
