#include "regtrace/fourier.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "regtrace/eigensolver.hpp"

namespace regtrace {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr double kGLx[4] = {0.1834346424956498, 0.5255324099163290,
                            0.7966664774136267, 0.9602898564975363};
constexpr double kGLw[4] = {0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

double cosine_derivative(int n, double x, int d) {
  if (n == 0) return d == 0 ? 1.0 : 0.0;
  double factor = 0.0;
  const double nx = n * x;
  switch (d & 3) {
    case 0: factor = std::cos(nx); break;
    case 1: factor = -std::sin(nx); break;
    case 2: factor = -std::cos(nx); break;
    case 3: factor = std::sin(nx); break;
  }
  return std::pow(static_cast<double>(n), d) * factor;
}

// Sum of singular values of a (not necessarily symmetric) small matrix,
// via the symmetric eigenproblem of M^T M.
double nuclear_norm(const Eigen::MatrixXd& m) {
  const SpectrumResult e = eigh(Eigen::MatrixXd(m.transpose() * m));
  double sum = 0.0;
  for (int i = 0; i < e.values.size(); ++i) sum += std::sqrt(std::max(0.0, e.values[i]));
  return sum;
}

}  // namespace

double gauss_legendre_0_pi(const std::function<double(double)>& f) {
  constexpr int kPanels = 64;
  const double h = kPi / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = (p + 0.5) * h;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
      acc += kGLw[i] * (f(mid + 0.5 * h * kGLx[i]) + f(mid - 0.5 * h * kGLx[i]));
    total += 0.5 * h * acc;
  }
  return total;
}

double DiagonalProfile::eval(double x) const { return eval_derivative(x, 0); }

double DiagonalProfile::eval_derivative(double x, int d) const {
  double v = 0.0;
  for (const auto& [n, c] : coefficients) v += c * cosine_derivative(n, x, d);
  return v;
}

DiagonalProfile diagonal_profile(const CosinePotential& potential, int j) {
  DiagonalProfile p;
  p.j = j;
  for (const auto& term : potential.terms) p.coefficients[term.n] = term.coeff(j - 1, j - 1);
  return p;
}

double h_fourier_coeff(const DiagonalProfile& profile, int k) {
  const auto it = profile.coefficients.find(2 * k + 1);
  if (it == profile.coefficients.end()) return 0.0;
  return 0.5 * kPi * it->second;
}

IbpPair ibp_identity_check(const DiagonalProfile& profile, int k, int r, IbpRoute route) {
  IbpPair pair;
  const int freq = 2 * k + 1;
  const int d = 2 * r + 2;
  const double sign = ((r + 1) % 2 == 0) ? 1.0 : -1.0;
  if (route == IbpRoute::kClosedForm) {
    pair.lhs = h_fourier_coeff(profile, k);
    // (2r+2)-derivative series: coefficient of cos(nx) is (-1)^{r+1} n^{2r+2} c_n;
    // orthogonality keeps only n = 2k+1.
    double proj = 0.0;
    const auto it = profile.coefficients.find(freq);
    if (it != profile.coefficients.end())
      proj = sign * std::pow(static_cast<double>(freq), d) * it->second * 0.5 * kPi;
    pair.rhs = sign / std::pow(static_cast<double>(freq), d) * proj;
  } else {
    pair.lhs = gauss_legendre_0_pi(
        [&](double x) { return profile.eval(x) * std::cos(freq * x); });
    const double proj = gauss_legendre_0_pi(
        [&](double x) { return profile.eval_derivative(x, d) * std::cos(freq * x); });
    pair.rhs = sign / std::pow(static_cast<double>(freq), d) * proj;
  }
  return pair;
}

Theorem2Result theorem2_series(const SpectralModel& model, int K_limit) {
  Theorem2Result res;
  res.partial_sums.reserve(K_limit);
  double sum = 0.0;
  int last_growth = -1;
  for (int k = 0; k < K_limit; ++k) {
    double term = 0.0;
    for (int j = 1; j <= model.T; ++j) {
      const double cjj = model.potential.coefficient(2 * k + 1)(j - 1, j - 1);
      const double weight = std::pow(k + 0.5, 2.0 * model.r) + gamma_j(model, j);
      term += std::abs(weight * 0.5 * kPi * cjj);
    }
    if (term > 0.0) last_growth = k;
    sum += term;
    res.partial_sums.push_back(sum);
  }
  res.absolute_sum = sum;
  res.stabilization_index = last_growth + 1;

  const Eigen::MatrixXd gammas =
      Eigen::VectorXd::NullaryExpr(model.T, [&](Eigen::Index j) {
        return gamma_j(model, static_cast<int>(j) + 1);
      }).asDiagonal();
  const double integral = gauss_legendre_0_pi([&](double x) {
    const Eigen::MatrixXd q_high = potential_eval(model.potential, x, 2 * model.r + 2);
    const Eigen::MatrixXd aq2 = gammas * potential_eval(model.potential, x, 2);
    return nuclear_norm(q_high) + nuclear_norm(aq2);
  });
  double weight_sum = 0.0;
  for (int k = 0; k < K_limit; ++k) weight_sum += 1.0 / ((2.0 * k + 1) * (2.0 * k + 1));
  res.bound = weight_sum * integral;

  for (std::size_t i = 0; i < res.partial_sums.size(); ++i) {
    if (res.partial_sums[i] > res.bound * (1.0 + 1e-12) + 1e-12) {
      std::ostringstream os;
      os << "absolute coefficient series exceeds its integral bound at k = " << i << " ("
         << res.partial_sums[i] << " > " << res.bound << ")";
      throw NumericalError(os.str());
    }
  }
  return res;
}

double oscillatory_sum_limit(const SpectralModel& model) {
  double sum = 0.0;
  for (const auto& term : model.potential.terms) {
    if (term.n % 2 == 0) continue;
    const double tr_c = term.coeff.trace();
    double tr_ac = 0.0;
    for (int j = 1; j <= model.T; ++j) tr_ac += gamma_j(model, j) * term.coeff(j - 1, j - 1);
    sum += std::pow(2.0, -2.0 * model.r) * std::pow(static_cast<double>(term.n), 2.0 * model.r) *
               tr_c +
           tr_ac;
  }
  return sum;
}

double oscillatory_sum_endpoint_route(const SpectralModel& model, int k_limit) {
  const int kmax = std::max(k_limit, model.potential.max_frequency() + 2);
  double total = 0.0;
  for (int j = 1; j <= model.T; ++j) {
    const DiagonalProfile h = diagonal_profile(model.potential, j);
    const double gj = gamma_j(model, j);
    const double quarter_sign = std::pow(-0.25, model.r);
    auto f = [&](double x) {
      return quarter_sign * h.eval_derivative(x, 2 * model.r) + gj * h.eval(x);
    };
    double at_zero = 0.0;
    double at_pi = 0.0;
    for (int k = 0; k < kmax; ++k) {
      const double mk = (k == 0) ? 1.0 / kPi : 2.0 / kPi;
      const double ck =
          mk * gauss_legendre_0_pi([&](double x) { return f(x) * std::cos(k * x); });
      at_zero += ck;
      at_pi += (k % 2 == 0) ? ck : -ck;
    }
    total += 0.5 * (at_zero - at_pi);
  }
  return total;
}

}  // namespace regtrace
