#include "regtrace/banded.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace regtrace {

void BandedComplex::resize(int n_, int lo_, int hi_) {
  n = n_;
  lo = lo_;
  hi = hi_;
  lo_act = lo_;
  hi_act = hi_;
  const std::size_t total = static_cast<std::size_t>(lo + hi + 1) * n;
  re.assign(total, 0.0);
  im.assign(total, 0.0);
}

Complex BandedComplex::get(int i, int j) const {
  const int off = j - i;
  if (off < -lo_act || off > hi_act) return Complex(0.0, 0.0);
  const std::size_t t = idx(i, j);
  return Complex(re[t], im[t]);
}

void fill_diag_scaled(const SparseRows& q, const std::vector<Complex>& col_scale,
                      DiagSparse& b) {
  const int n = q.size();
  // Rebuild the offset table only when the pattern changes.
  if (b.pattern != &q) {
    b.pattern = &q;
    b.n = n;
    b.offsets.clear();
    std::map<int, int> slot;  // offset -> slot index, ordered
    for (int i = 0; i < n; ++i)
      for (int t = q.row_ptr[i]; t < q.row_ptr[i + 1]; ++t) slot.emplace(q.col[t] - i, 0);
    int next = 0;
    b.slot_of.clear();
    for (auto& [off, s] : slot) {
      s = next++;
      b.offsets.push_back(off);
      b.slot_of[off] = s;
    }
  }
  const std::size_t total = b.offsets.size() * static_cast<std::size_t>(n);
  b.re.assign(total, 0.0);
  b.im.assign(total, 0.0);
  for (int i = 0; i < n; ++i)
    for (int t = q.row_ptr[i]; t < q.row_ptr[i + 1]; ++t) {
      const int j = q.col[t];
      const Complex v = q.val[t] * col_scale[j];
      const std::size_t at =
          static_cast<std::size_t>(b.slot_of.find(j - i)->second) * n + i;
      b.re[at] = v.real();
      b.im[at] = v.imag();
    }
}

DiagSparse make_diag_scaled(const SparseRows& q, const std::vector<Complex>& col_scale) {
  DiagSparse b;
  fill_diag_scaled(q, col_scale, b);
  return b;
}

void to_banded_into(const DiagSparse& b, BandedComplex& out) {
  const int n = b.n;
  int lo = 0, hi = 0;
  for (int off : b.offsets) {
    lo = std::max(lo, -off);
    hi = std::max(hi, off);
  }
  out.resize(n, lo, hi);
  for (std::size_t s = 0; s < b.offsets.size(); ++s) {
    const int off = b.offsets[s];
    const int ilo = std::max(0, -off), ihi = n - 1 - std::max(0, off);
    double* orr = &out.re[static_cast<std::size_t>(off + lo) * n];
    double* oii = &out.im[static_cast<std::size_t>(off + lo) * n];
    const double* br = &b.re[s * n];
    const double* bi = &b.im[s * n];
    for (int i = ilo; i <= ihi; ++i) {
      orr[i] = br[i];
      oii[i] = bi[i];
    }
  }
}

BandedComplex to_banded(const DiagSparse& b) {
  BandedComplex out;
  to_banded_into(b, out);
  return out;
}

void multiply_trim(const BandedComplex& x, const DiagSparse& b, double drop_rel,
                   BandedComplex& out) {
  const int n = x.n;
  int bmin = 0, bmax = 0;
  for (int off : b.offsets) {
    bmin = std::min(bmin, off);
    bmax = std::max(bmax, off);
  }
  const int lo = std::min(n - 1, x.lo_act - bmin);
  const int hi = std::min(n - 1, x.hi_act + bmax);
  out.resize(n, lo, hi);

  // out(i, i+d1+K) += x(i, i+d1) * b(i+d1, i+d1+K): unit-stride over i
  // for every (input diagonal, multiplier offset) pair.
  for (int d1 = -x.lo_act; d1 <= x.hi_act; ++d1) {
    const double* xr = &x.re[static_cast<std::size_t>(d1 + x.lo) * n];
    const double* xi = &x.im[static_cast<std::size_t>(d1 + x.lo) * n];
    for (std::size_t s = 0; s < b.offsets.size(); ++s) {
      const int k = b.offsets[s];
      const int d = d1 + k;
      if (d < -lo || d > hi) continue;
      const double* br = &b.re[s * n];
      const double* bi = &b.im[s * n];
      double* orr = &out.re[static_cast<std::size_t>(d + lo) * n];
      double* oii = &out.im[static_cast<std::size_t>(d + lo) * n];
      // rows with x-entry in range and b-entry in range: i + d1 in [0, n)
      // and i + d1 + k in [0, n)
      const int ilo = std::max({0, -d1, -d});
      const int ihi = std::min({n - 1, n - 1 - d1, n - 1 - d});
      const double* brs = br + d1;
      const double* bis = bi + d1;
      for (int i = ilo; i <= ihi; ++i) {
        const double ar = xr[i], ai = xi[i];
        const double cr = brs[i], ci = bis[i];
        orr[i] += ar * cr - ai * ci;
        oii[i] += ar * ci + ai * cr;
      }
    }
  }

  if (drop_rel <= 0.0) return;
  const int nd = lo + hi + 1;
  std::vector<double> diag_max(nd, 0.0);
  double global = 0.0;
  for (int dd = 0; dd < nd; ++dd) {
    const double* orr = &out.re[static_cast<std::size_t>(dd) * n];
    const double* oii = &out.im[static_cast<std::size_t>(dd) * n];
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
      const double m = orr[i] * orr[i] + oii[i] * oii[i];
      if (m > peak) peak = m;
    }
    diag_max[dd] = peak;
    if (peak > global) global = peak;
  }
  const double cut = drop_rel * drop_rel * global;
  int new_lo = lo, new_hi = hi;
  while (new_lo > 0 && diag_max[lo - new_lo] < cut) --new_lo;
  while (new_hi > 0 && diag_max[lo + new_hi] < cut) --new_hi;
  out.lo_act = new_lo;
  out.hi_act = new_hi;
}

Complex trace(const BandedComplex& x) {
  const double* r = &x.re[static_cast<std::size_t>(x.lo) * x.n];
  const double* i = &x.im[static_cast<std::size_t>(x.lo) * x.n];
  double sr = 0.0, si = 0.0;
  for (int t = 0; t < x.n; ++t) {
    sr += r[t];
    si += i[t];
  }
  return Complex(sr, si);
}

Complex weighted_trace(const BandedComplex& x, const std::vector<Complex>& w) {
  const double* r = &x.re[static_cast<std::size_t>(x.lo) * x.n];
  const double* i = &x.im[static_cast<std::size_t>(x.lo) * x.n];
  double sr = 0.0, si = 0.0;
  for (int t = 0; t < x.n; ++t) {
    const double wr = w[t].real(), wi = w[t].imag();
    sr += wr * r[t] - wi * i[t];
    si += wr * i[t] + wi * r[t];
  }
  return Complex(sr, si);
}

Complex pair_trace(const BandedComplex& xa, const BandedComplex& xb,
                   const std::vector<Complex>* w) {
  // (Xa Xb)_{ii} = sum_d Xa(i, i+d) Xb(i+d, i); accumulate per-row
  // products diagonal by diagonal, then apply the optional weight.
  const int n = xa.n;
  static thread_local std::vector<double> accr, acci;
  accr.assign(n, 0.0);
  acci.assign(n, 0.0);
  const int dlo = std::max(-xa.lo_act, -xb.hi_act);
  const int dhi = std::min(xa.hi_act, xb.lo_act);
  for (int d = dlo; d <= dhi; ++d) {
    const double* ar = &xa.re[static_cast<std::size_t>(d + xa.lo) * n];
    const double* ai = &xa.im[static_cast<std::size_t>(d + xa.lo) * n];
    // Xb(i+d, i): diagonal -d of Xb at row i+d
    const double* br = &xb.re[static_cast<std::size_t>(-d + xb.lo) * n] + d;
    const double* bi = &xb.im[static_cast<std::size_t>(-d + xb.lo) * n] + d;
    const int ilo = std::max(0, -d), ihi = std::min(n - 1, n - 1 - d);
    for (int i = ilo; i <= ihi; ++i) {
      accr[i] += ar[i] * br[i] - ai[i] * bi[i];
      acci[i] += ar[i] * bi[i] + ai[i] * br[i];
    }
  }
  double sr = 0.0, si = 0.0;
  if (w) {
    for (int i = 0; i < n; ++i) {
      const double wr = (*w)[i].real(), wi = (*w)[i].imag();
      sr += wr * accr[i] - wi * acci[i];
      si += wr * acci[i] + wi * accr[i];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      sr += accr[i];
      si += acci[i];
    }
  }
  return Complex(sr, si);
}

BandedLDLT::BandedLDLT(const SparseRows& q, const std::vector<double>& q_diag_dense,
                       int half_bandwidth, const std::vector<Complex>& shifted_diag) {
  n_ = q.size();
  w_ = std::max(1, half_bandwidth);
  l_.assign(static_cast<std::size_t>(n_) * w_, Complex(0.0, 0.0));
  d_.assign(n_, Complex(0.0, 0.0));
  dinv_.assign(n_, Complex(0.0, 0.0));

  // Dense-banded staging of A = diag(shifted) + Q, lower part only.
  // alow(i, i-k) holds A(i, k) for 0 < i-k <= w.
  std::vector<Complex> alow(static_cast<std::size_t>(n_) * w_, Complex(0.0, 0.0));
  std::vector<Complex> adiag(n_);
  for (int i = 0; i < n_; ++i) adiag[i] = shifted_diag[i] + q_diag_dense[i];
  for (int i = 0; i < n_; ++i)
    for (int t = q.row_ptr[i]; t < q.row_ptr[i + 1]; ++t) {
      const int j = q.col[t];
      if (j < i) alow[static_cast<std::size_t>(i) * w_ + (i - j - 1)] = q.val[t];
    }

  double scale = 0.0;
  for (int i = 0; i < n_; ++i) scale = std::max(scale, std::abs(adiag[i]));

  for (int j = 0; j < n_; ++j) {
    Complex dj = adiag[j];
    const int klo = std::max(0, j - w_);
    for (int k = klo; k < j; ++k) {
      const Complex ljk = lfac(j, k);
      dj -= ljk * ljk * d_[k];
    }
    if (std::abs(dj) < 1e-14 * scale) {
      std::ostringstream os;
      os << "banded factorization: pivot " << j << " vanished (|d| = " << std::abs(dj)
         << "); contour node too close to the spectrum";
      throw NumericalError(os.str());
    }
    d_[j] = dj;
    dinv_[j] = Complex(1.0, 0.0) / dj;
    const int imax = std::min(n_ - 1, j + w_);
    for (int i = j + 1; i <= imax; ++i) {
      Complex v = alow[static_cast<std::size_t>(i) * w_ + (i - j - 1)];
      const int kk = std::max({0, i - w_, j - w_});
      for (int k = kk; k < j; ++k) v -= lfac(i, k) * lfac(j, k) * d_[k];
      lfac(i, j) = v * dinv_[j];
    }
  }
}

void BandedLDLT::solve(std::vector<Complex>& rhs, int first_nonzero) const {
  // Rows above the first nonzero stay zero through the forward pass.
  for (int i = std::max(0, first_nonzero); i < n_; ++i) {
    Complex v = rhs[i];
    const int klo = std::max({0, i - w_, first_nonzero});
    for (int k = klo; k < i; ++k) v -= lfac(i, k) * rhs[k];
    rhs[i] = v;
  }
  for (int i = std::max(0, first_nonzero); i < n_; ++i) rhs[i] *= dinv_[i];
  for (int i = n_ - 2; i >= 0; --i) {
    Complex v = rhs[i];
    const int kmax = std::min(n_ - 1, i + w_);
    for (int k = i + 1; k <= kmax; ++k) v -= lfac(k, i) * rhs[k];
    rhs[i] = v;
  }
}

Complex BandedLDLT::trace_inverse_between(const BandedComplex& xa,
                                          const BandedComplex& xb) const {
  // tr(A^{-1} Xa Xb) = sum_i [Xb A^{-1} Xa]_{ii}; banded solves against
  // blocks of Xa columns (the block dimension keeps the substitution
  // loops on contiguous data), dotted with the matching rows of Xb.
  constexpr int kBlock = 8;
  Complex t(0.0, 0.0);
  static thread_local std::vector<double> rr, ri;
  rr.resize(static_cast<std::size_t>(n_) * kBlock);
  ri.resize(static_cast<std::size_t>(n_) * kBlock);
  for (int i0 = 0; i0 < n_; i0 += kBlock) {
    const int bs = std::min(kBlock, n_ - i0);
    std::fill(rr.begin(), rr.end(), 0.0);
    std::fill(ri.begin(), ri.end(), 0.0);
    int start = n_;
    for (int c = 0; c < bs; ++c) {
      const int i = i0 + c;
      const int rlo = std::max(0, i - xa.hi_act), rhi = std::min(n_ - 1, i + xa.lo_act);
      start = std::min(start, rlo);
      for (int r = rlo; r <= rhi; ++r) {
        const Complex v = xa.get(r, i);
        rr[static_cast<std::size_t>(r) * kBlock + c] = v.real();
        ri[static_cast<std::size_t>(r) * kBlock + c] = v.imag();
      }
    }
    // forward substitution
    for (int i = start; i < n_; ++i) {
      double* vr = &rr[static_cast<std::size_t>(i) * kBlock];
      double* vi = &ri[static_cast<std::size_t>(i) * kBlock];
      const int klo = std::max({0, i - w_, start});
      for (int k = klo; k < i; ++k) {
        const Complex l = lfac(i, k);
        const double lr = l.real(), li = l.imag();
        if (lr == 0.0 && li == 0.0) continue;
        const double* __restrict ur = &rr[static_cast<std::size_t>(k) * kBlock];
        const double* __restrict ui = &ri[static_cast<std::size_t>(k) * kBlock];
        for (int c = 0; c < kBlock; ++c) {
          vr[c] -= lr * ur[c] - li * ui[c];
          vi[c] -= lr * ui[c] + li * ur[c];
        }
      }
    }
    // pivot scaling
    for (int i = start; i < n_; ++i) {
      const double pr = dinv_[i].real(), pi = dinv_[i].imag();
      double* vr = &rr[static_cast<std::size_t>(i) * kBlock];
      double* vi = &ri[static_cast<std::size_t>(i) * kBlock];
      for (int c = 0; c < kBlock; ++c) {
        const double ar = vr[c], ai = vi[c];
        vr[c] = pr * ar - pi * ai;
        vi[c] = pr * ai + pi * ar;
      }
    }
    // backward substitution
    for (int i = n_ - 2; i >= 0; --i) {
      double* vr = &rr[static_cast<std::size_t>(i) * kBlock];
      double* vi = &ri[static_cast<std::size_t>(i) * kBlock];
      const int kmax = std::min(n_ - 1, i + w_);
      for (int k = i + 1; k <= kmax; ++k) {
        const Complex l = lfac(k, i);
        const double lr = l.real(), li = l.imag();
        if (lr == 0.0 && li == 0.0) continue;
        const double* __restrict ur = &rr[static_cast<std::size_t>(k) * kBlock];
        const double* __restrict ui = &ri[static_cast<std::size_t>(k) * kBlock];
        for (int c = 0; c < kBlock; ++c) {
          vr[c] -= lr * ur[c] - li * ui[c];
          vi[c] -= lr * ui[c] + li * ur[c];
        }
      }
    }
    // row_i(Xb) . solution column
    for (int c = 0; c < bs; ++c) {
      const int i = i0 + c;
      const int jlo = std::max(0, i - xb.lo_act), jhi = std::min(n_ - 1, i + xb.hi_act);
      double accr = 0.0, acci = 0.0;
      for (int j = jlo; j <= jhi; ++j) {
        const Complex bv = xb.get(i, j);
        const double sr = rr[static_cast<std::size_t>(j) * kBlock + c];
        const double si = ri[static_cast<std::size_t>(j) * kBlock + c];
        accr += bv.real() * sr - bv.imag() * si;
        acci += bv.real() * si + bv.imag() * sr;
      }
      t += Complex(accr, acci);
    }
  }
  return t;
}

}  // namespace regtrace
