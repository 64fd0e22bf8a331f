#pragma once

#include <Eigen/QR>

#include "esqm/types.hpp"

namespace esqm::cs {

/// Least-norm solves of Ax = b for a full-row-rank A (q <= n) through a
/// Householder QR factorization of A^T. The factorization is done once at
/// construction so setup and solve can be timed separately.
class LeastNormSolver {
 public:
  explicit LeastNormSolver(const Matrix& A);

  /// Minimum-Euclidean-norm x with Ax = b.
  Vector solve(const Vector& b) const;

  Index rows() const { return q_; }
  Index cols() const { return n_; }

 private:
  Eigen::HouseholderQR<Matrix> qr_;
  Index q_ = 0;
  Index n_ = 0;
};

/// Convenience wrapper: factorize then solve.
Vector least_norm_solution(const Matrix& A, const Vector& b);

/// Largest eigenvalue of A A^T (the squared spectral norm of A) by power
/// iteration with a fixed seeded start vector. Stops when the relative change
/// of the Rayleigh quotient drops below tol.
double spectral_norm_sq(const Matrix& A, double tol = 1e-10);

}  // namespace esqm::cs
