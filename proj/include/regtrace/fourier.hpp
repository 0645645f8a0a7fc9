#pragma once

#include <functional>
#include <map>
#include <vector>

#include "regtrace/galerkin.hpp"
#include "regtrace/model.hpp"

namespace regtrace {

// Cosine series of the diagonal profile h_j(x) = (Q(x) phi_j, phi_j).
struct DiagonalProfile {
  int j = 0;
  std::map<int, double> coefficients;  // n -> (C_n)_{jj}

  double eval(double x) const;
  double eval_derivative(double x, int d) const;
};

DiagonalProfile diagonal_profile(const CosinePotential& potential, int j);

// Int_0^pi h_j(x) cos((2k+1)x) dx = (pi/2) (C_{2k+1})_{jj}.
double h_fourier_coeff(const DiagonalProfile& profile, int k);

// Both sides of the integration-by-parts identity
//   Int h cos((2k+1)x) dx
//     = (-1)^(r+1) (2k+1)^{-(2r+2)} Int h^{(2r+2)} cos((2k+1)x) dx.
// The closed-form route uses cosine orthogonality; the quadrature route
// evaluates both integrals with composite Gauss-Legendre (64 panels of
// order 8) and serves as the independent oracle.
enum class IbpRoute { kClosedForm, kQuadrature };
struct IbpPair {
  double lhs = 0.0;
  double rhs = 0.0;
};
IbpPair ibp_identity_check(const DiagonalProfile& profile, int k, int r,
                           IbpRoute route = IbpRoute::kClosedForm);

// Absolute partial sum of the weighted coefficient series through
// k < K_limit, with the integral bound it must stay below.  Throws if
// the bound is violated.
struct Theorem2Result {
  double absolute_sum = 0.0;
  double bound = 0.0;
  int stabilization_index = 0;  // first k after which the sum stops growing
  std::vector<double> partial_sums;
};
Theorem2Result theorem2_series(const SpectralModel& model, int K_limit);

// Closed-form limit of (2/pi) sum_k sum_j [(k+1/2)^{2r} + gamma_j] *
// Int h_j cos((2k+1)x) dx, i.e. sum over odd n of
// 2^{-2r} n^{2r} tr C_n + tr(A C_n).
double oscillatory_sum_limit(const SpectralModel& model);

// Same quantity assembled through the endpoint values of the cosine
// Fourier series of (-1/4)^r h_j^{(2r)} + gamma_j h_j, with the usual
// 1/pi, 2/pi weights; independent route used by the consistency check.
double oscillatory_sum_endpoint_route(const SpectralModel& model, int k_limit);

// Composite Gauss-Legendre quadrature on [0, pi] (64 panels, order 8);
// exposed for the test oracles.
double gauss_legendre_0_pi(const std::function<double(double)>& f);

}  // namespace regtrace
