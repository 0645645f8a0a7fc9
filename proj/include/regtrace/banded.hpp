#pragma once

#include <complex>
#include <map>
#include <vector>

#include "regtrace/errors.hpp"
#include "regtrace/galerkin.hpp"

namespace regtrace {

using Complex = std::complex<double>;

// Banded complex matrix stored diagonal-major with split real/imaginary
// parts: diagonal d (offset j - i in [-lo, hi]) occupies the contiguous
// slice [(d + lo) * n, (d + lo + 1) * n), indexed by the row.  The
// layout keeps the resolvent-power kernels on unit-stride loops.  The
// ACTIVE band (lo_act/hi_act) shrinks when outer diagonals fall below
// the drop tolerance; storage stays in place.
struct BandedComplex {
  int n = 0;
  int lo = 0;
  int hi = 0;
  int lo_act = 0;
  int hi_act = 0;
  std::vector<double> re, im;

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j - i + lo) * n + i;
  }
  void resize(int n_, int lo_, int hi_);
  Complex get(int i, int j) const;
  void set(int i, int j, Complex v) {
    const std::size_t t = idx(i, j);
    re[t] = v.real();
    im[t] = v.imag();
  }
};

// Sparse multiplier B = Q * diag(scale) stored by diagonals: offset K
// covers rows t with B(t, t+K) = value[K-slot][t].
struct DiagSparse {
  int n = 0;
  const SparseRows* pattern = nullptr;  // offsets cached per pattern
  std::vector<int> offsets;             // sorted distinct offsets
  std::map<int, int> slot_of;
  std::vector<double> re, im;           // [slot * n + t]
};

DiagSparse make_diag_scaled(const SparseRows& q, const std::vector<Complex>& col_scale);
void fill_diag_scaled(const SparseRows& q, const std::vector<Complex>& col_scale,
                      DiagSparse& b);

BandedComplex to_banded(const DiagSparse& b);
void to_banded_into(const DiagSparse& b, BandedComplex& out);

// out = x * b with band bookkeeping: the physical band grows by the
// extent of b's offsets; diagonals whose peak magnitude falls below
// drop_rel times the matrix peak leave the active band.
void multiply_trim(const BandedComplex& x, const DiagSparse& b, double drop_rel,
                   BandedComplex& out);

Complex trace(const BandedComplex& x);
Complex weighted_trace(const BandedComplex& x, const std::vector<Complex>& w);

// tr(Xa * Xb) over the overlapping bands, optionally with a diagonal
// weight on the left: sum_i w_i (Xa Xb)_{ii}.
Complex pair_trace(const BandedComplex& xa, const BandedComplex& xb,
                   const std::vector<Complex>* w = nullptr);

// LDL^T factorization of the complex symmetric banded matrix
// diag(shifted) + Q (half-bandwidth w), without pivoting.  Valid for the
// shifted spectral matrices used here (quadrature nodes keep a definite
// imaginary part or a safely regular real shift); a vanishing pivot is
// reported as a numerical failure.
class BandedLDLT {
public:
  BandedLDLT(const SparseRows& q, const std::vector<double>& q_diag_dense,
             int half_bandwidth, const std::vector<Complex>& shifted_diag);

  // Solves A x = rhs in place; rows above first_nonzero must be zero.
  void solve(std::vector<Complex>& rhs, int first_nonzero = 0) const;

  // tr(A^{-1} Xa Xb) via one banded solve per column:
  // sum_i row_i(Xb) . A^{-1} (Xa e_i).
  Complex trace_inverse_between(const BandedComplex& xa, const BandedComplex& xb) const;

private:
  int n_ = 0;
  int w_ = 0;
  std::vector<Complex> l_;     // unit lower factor, banded
  std::vector<Complex> d_;     // pivots
  std::vector<Complex> dinv_;  // reciprocal pivots
  Complex lfac(int i, int k) const {  // L(i,k), i > k, i-k <= w
    return l_[static_cast<std::size_t>(i) * w_ + (i - k - 1)];
  }
  Complex& lfac(int i, int k) {
    return l_[static_cast<std::size_t>(i) * w_ + (i - k - 1)];
  }
};

}  // namespace regtrace
