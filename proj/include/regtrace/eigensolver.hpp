#pragma once

#include <Eigen/Dense>

#include "regtrace/errors.hpp"

namespace regtrace {

struct SpectrumResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns, M v_q = values[q] v_q
  double residual_bound = 0.0;  // max_q ||M v_q - lambda_q v_q||_2
};

// Dense symmetric eigensolver: cyclic Jacobi with threshold skipping.
// Single-threaded and bitwise deterministic.  Throws NumericalError with
// the worst remaining off-diagonal magnitude if 40 sweeps do not
// converge, and ValidationError if M is not symmetric to 1e-12 relative.
SpectrumResult eigh(const Eigen::MatrixXd& M);

}  // namespace regtrace
