#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "regtrace/errors.hpp"

namespace regtrace {

// One cosine mode of the operator potential: frequency n with a T x T
// symmetric coefficient matrix acting on the low A-eigenmodes.
struct CosineTerm {
  int n = 0;
  Eigen::MatrixXd coeff;
};

struct CosinePotential {
  int dim = 0;  // T: rank support in the A-eigenbasis
  std::vector<CosineTerm> terms;

  bool is_zero() const { return terms.empty(); }
  // Coefficient matrix for frequency n, or zero matrix when absent.
  Eigen::MatrixXd coefficient(int n) const;
  const CosineTerm* find(int n) const;
  int max_frequency() const;
};

// Derived constants of the eigenvalue growth law mu_n ~ d1 * n^beta,
// beta = 2 r alpha / (2r + alpha), and the series cutoff m used by the
// second-trace correction sum.  d1/d2 are estimates refined by fits.
struct AsymptoticConstants {
  double beta = 0.0;
  double delta = 0.0;
  int m_star = 2;
  double d1_estimate = 0.0;
  double d2_estimate = 0.0;
};

struct SpectralModel {
  int r = 1;         // half the differential order
  double a = 1.0;    // spectrum scale of A
  double alpha = 3;  // spectrum exponent of A
  int T = 1;         // potential rank support
  int K = 1;         // retained cosine modes (k = 0..K-1)
  CosinePotential potential;
  AsymptoticConstants constants;
};

// Unvalidated scenario contents as read from a scenario file (or built
// programmatically by tests).
struct RawModel {
  int r = 0;
  double a = 0.0;
  double alpha = 0.0;
  int T = 0;
  int K = 0;
  std::vector<CosineTerm> terms;
};

// Shared relative tolerance for symmetry checks on input matrices.
inline constexpr double kSymmetryTol = 1e-12;

// Largest allowed dense system, N = K*T.
inline constexpr int kMaxSystemSize = 16384;

// Validates every hypothesis (alpha > 2r/(2r-1), symmetry of the
// coefficients, positivity of a, ranks) and attaches the derived
// asymptotic constants.  Coefficient matrices are symmetrized as
// (C + C^T)/2 after passing the symmetry gate.  Throws ValidationError
// naming the violated hypothesis otherwise.
SpectralModel validate_scenario(const RawModel& raw);

// Eigenvalue of A: gamma_j = a * j^alpha (exact power law), j >= 1.
double gamma_j(const SpectralModel& model, int j);

// d-th derivative of Q at x, assembled from the cosine derivative cycle.
Eigen::MatrixXd potential_eval(const CosinePotential& potential, double x, int d);

// Exact endpoint values of the d-th derivative at x = 0 or x = pi.  The
// trigonometric factors at the endpoints are integers, so this avoids
// the roundoff of evaluating sin(n*pi) in floating point; used by the
// boundary-condition check and the closed-form right-hand sides.
enum class Endpoint { kZero, kPi };
Eigen::MatrixXd potential_endpoint(const CosinePotential& potential, Endpoint e, int d);

// Default series cutoff: floor(|(2 r alpha + 6 r + 3 alpha)/(2 r alpha - 2 r - alpha)|) + 1.
int default_m_star(int r, double alpha);

}  // namespace regtrace
