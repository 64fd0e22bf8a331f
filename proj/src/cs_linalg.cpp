#include "esqm/cs_linalg.hpp"

#include <cmath>
#include <limits>

#include "esqm/rng.hpp"

namespace esqm::cs {

LeastNormSolver::LeastNormSolver(const Matrix& A)
    : qr_(A.transpose()), q_(A.rows()), n_(A.cols()) {
  if (q_ < 1 || n_ < q_) {
    throw ContractViolation("LeastNormSolver: need 1 <= rows <= cols");
  }
  const auto R = qr_.matrixQR().topLeftCorner(q_, q_);
  double dmax = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < q_; ++i) {
    const double d = std::abs(R(i, i));
    dmax = std::max(dmax, d);
    dmin = std::min(dmin, d);
  }
  if (!(dmin > dmax * 1e-13) || !std::isfinite(dmax)) {
    throw NumericFailure("LeastNormSolver: A^T is (numerically) rank deficient");
  }
}

Vector LeastNormSolver::solve(const Vector& b) const {
  if (b.size() != q_) {
    throw ContractViolation("LeastNormSolver::solve: dimension mismatch");
  }
  // A^T = QR, so A x = b becomes R^T (Q^T x) = b; the least-norm solution
  // lies in range(Q).
  const Vector w = qr_.matrixQR()
                       .topLeftCorner(q_, q_)
                       .triangularView<Eigen::Upper>()
                       .transpose()
                       .solve(b);
  Vector padded = Vector::Zero(n_);
  padded.head(q_) = w;
  return qr_.householderQ() * padded;
}

Vector least_norm_solution(const Matrix& A, const Vector& b) {
  return LeastNormSolver(A).solve(b);
}

double spectral_norm_sq(const Matrix& A, double tol) {
  if (tol <= 0.0) {
    throw ContractViolation("spectral_norm_sq: tol must be positive");
  }
  const Index q = A.rows();
  Rng rng(0x5eedull, 0);
  Vector v(q);
  for (Index i = 0; i < q; ++i) v[i] = rng.normal();
  v.normalize();

  double lambda = 0.0;
  const int max_iters = 100000;
  for (int it = 0; it < max_iters; ++it) {
    const Vector w = A * (A.transpose() * v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (it > 3 && std::abs(next - lambda) <= tol * std::abs(next)) {
      return next;
    }
    lambda = next;
  }
  throw AccuracyFailure("spectral_norm_sq: power iteration did not settle",
                        lambda);
}

}  // namespace esqm::cs
