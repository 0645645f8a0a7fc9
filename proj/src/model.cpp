#include "regtrace/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace regtrace {

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Q1 safety net: every odd derivative up to order 2r+1 must vanish at
// both endpoints.  Exact for cosine series; checked on the assembled
// matrices anyway to catch malformed inputs.
void check_boundary_conditions(const CosinePotential& pot, int r) {
  for (int i = 0; i <= r; ++i) {
    const int d = 2 * i + 1;
    Eigen::MatrixXd sum = potential_endpoint(pot, Endpoint::kZero, d) +
                          potential_endpoint(pot, Endpoint::kPi, d);
    if (!pot.terms.empty() && max_abs(sum) > 1e-12) {
      std::ostringstream os;
      os << "boundary condition violated: odd derivative of order " << d
         << " does not cancel at the endpoints (|max| = " << max_abs(sum) << ")";
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

Eigen::MatrixXd CosinePotential::coefficient(int n) const {
  if (const CosineTerm* t = find(n)) return t->coeff;
  return Eigen::MatrixXd::Zero(dim, dim);
}

const CosineTerm* CosinePotential::find(int n) const {
  for (const auto& t : terms)
    if (t.n == n) return &t;
  return nullptr;
}

int CosinePotential::max_frequency() const {
  int m = 0;
  for (const auto& t : terms) m = std::max(m, t.n);
  return m;
}

int default_m_star(int r, double alpha) {
  const double num = 2.0 * r * alpha + 6.0 * r + 3.0 * alpha;
  const double den = 2.0 * r * alpha - 2.0 * r - alpha;
  return static_cast<int>(std::floor(std::abs(num / den))) + 1;
}

SpectralModel validate_scenario(const RawModel& raw) {
  if (raw.r < 1)
    throw ValidationError("operator order violated: r must be a positive integer (r >= 1)");
  if (!(raw.a > 0.0))
    throw ValidationError("spectrum hypothesis violated: a > 0 is required");
  const double alpha_min = 2.0 * raw.r / (2.0 * raw.r - 1.0);
  if (!(raw.alpha > alpha_min)) {
    std::ostringstream os;
    os << "spectrum hypothesis violated: alpha > 2r/(2r-1) = " << alpha_min
       << " is required, got alpha = " << raw.alpha;
    throw ValidationError(os.str());
  }
  if (raw.T < 1) throw ValidationError("rank support violated: T >= 1 is required");
  if (raw.K < 1) throw ValidationError("truncation violated: K >= 1 is required");
  if (static_cast<long>(raw.K) * raw.T > kMaxSystemSize) {
    std::ostringstream os;
    os << "truncation violated: K*T = " << static_cast<long>(raw.K) * raw.T
       << " exceeds the dense-storage limit " << kMaxSystemSize;
    throw ValidationError(os.str());
  }

  SpectralModel model;
  model.r = raw.r;
  model.a = raw.a;
  model.alpha = raw.alpha;
  model.T = raw.T;
  model.K = raw.K;
  model.potential.dim = raw.T;

  std::set<int> seen;
  for (const auto& term : raw.terms) {
    if (term.n < 0)
      throw ValidationError("potential violated: cosine frequency n must be nonnegative");
    if (!seen.insert(term.n).second) {
      std::ostringstream os;
      os << "potential violated: duplicate cosine frequency n = " << term.n;
      throw ValidationError(os.str());
    }
    if (term.coeff.rows() != raw.T || term.coeff.cols() != raw.T) {
      std::ostringstream os;
      os << "potential violated: coefficient matrix for n = " << term.n << " is "
         << term.coeff.rows() << "x" << term.coeff.cols() << ", expected " << raw.T
         << "x" << raw.T;
      throw ValidationError(os.str());
    }
    const double scale = std::max(1.0, max_abs(term.coeff));
    const double asym = max_abs(term.coeff - term.coeff.transpose());
    if (asym > kSymmetryTol * scale) {
      std::ostringstream os;
      os << "self-adjointness violated: coefficient matrix for n = " << term.n
         << " is not symmetric (relative asymmetry " << asym / scale << ")";
      throw ValidationError(os.str());
    }
    CosineTerm t;
    t.n = term.n;
    t.coeff = 0.5 * (term.coeff + term.coeff.transpose());
    model.potential.terms.push_back(std::move(t));
  }

  check_boundary_conditions(model.potential, model.r);

  AsymptoticConstants& c = model.constants;
  c.beta = 2.0 * model.r * model.alpha / (2.0 * model.r + model.alpha);
  c.delta = c.beta - 1.0;
  c.m_star = default_m_star(model.r, model.alpha);
  // Counting-function constant of the unperturbed spectrum: the number of
  // states below mu grows like c0 * mu^(1/beta) with
  // c0 = a^(-1/alpha) * B(1/alpha, 1 + 1/(2r)) / alpha, hence mu_n ~ c0^(-beta) n^beta.
  const double c0 = std::pow(model.a, -1.0 / model.alpha) *
                    std::beta(1.0 / model.alpha, 1.0 + 0.5 / model.r) / model.alpha;
  c.d1_estimate = std::pow(c0, -c.beta);
  c.d2_estimate = 0.5 * c.d1_estimate;  // placeholder until a spectrum is fitted
  return model;
}

double gamma_j(const SpectralModel& model, int j) {
  return model.a * std::pow(static_cast<double>(j), model.alpha);
}

Eigen::MatrixXd potential_eval(const CosinePotential& potential, double x, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(potential.dim, potential.dim);
  for (const auto& term : potential.terms) {
    // d-th derivative of cos(nx): n^d * {cos, -sin, -cos, sin}[d mod 4](nx).
    double factor = 0.0;
    const double nx = term.n * x;
    switch (d & 3) {
      case 0: factor = std::cos(nx); break;
      case 1: factor = -std::sin(nx); break;
      case 2: factor = -std::cos(nx); break;
      case 3: factor = std::sin(nx); break;
    }
    if (term.n == 0 && d > 0) factor = 0.0;
    out += std::pow(static_cast<double>(term.n), d) * factor * term.coeff;
  }
  return out;
}

Eigen::MatrixXd potential_endpoint(const CosinePotential& potential, Endpoint e, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(potential.dim, potential.dim);
  // cos(n x + d pi/2) at x = 0 is {1, 0, -1, 0}[d mod 4]; at x = pi it
  // picks up the parity sign (-1)^n.  Odd derivatives vanish identically.
  int base = 0;
  switch (d & 3) {
    case 0: base = 1; break;
    case 1: base = 0; break;
    case 2: base = -1; break;
    case 3: base = 0; break;
  }
  if (base == 0) return out;
  for (const auto& term : potential.terms) {
    if (term.n == 0 && d > 0) continue;
    const int parity = (e == Endpoint::kPi && (term.n & 1)) ? -1 : 1;
    out += std::pow(static_cast<double>(term.n), d) * (base * parity) * term.coeff;
  }
  return out;
}

}  // namespace regtrace
