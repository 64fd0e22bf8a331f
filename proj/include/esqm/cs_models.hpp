#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esqm/problem.hpp"
#include "esqm/types.hpp"

namespace esqm::cs {

enum class NoiseKind : std::uint8_t { gaussian = 0, cauchy = 1 };
enum class CsModelKind : std::uint8_t { quad = 0, lorentz = 1 };

// RNG substream ids used by the instance generators (master seed = instance
// seed): 0 -> entries of A, 1 -> support draw, 2 -> ground-truth entries,
// 3 -> measurement noise.
inline constexpr std::uint64_t kStreamMatrix = 0;
inline constexpr std::uint64_t kStreamSupport = 1;
inline constexpr std::uint64_t kStreamSignal = 2;
inline constexpr std::uint64_t kStreamNoise = 3;

/// A generated sparse-recovery instance: unit-column sensing matrix A,
/// measurements b = A x_orig + 0.01 * noise, constraint level sigma, and the
/// box radius M that makes the bounded model equivalent to the unbounded one.
struct CsInstance {
  Matrix A;                 // q x n, unit-norm columns
  Vector b;                 // length q
  Vector x_orig;            // length n, zero off the support
  std::vector<Index> support;
  double sigma = 0.0;
  std::optional<double> sigma1;  // gaussian/quadratic model only
  std::optional<double> gamma;   // cauchy/Lorentzian model only
  double mu = 0.0;
  double M = 0.0;
  NoiseKind noise_kind = NoiseKind::gaussian;
  std::uint64_t seed = 0;

  Index q() const { return A.rows(); }
  Index n() const { return A.cols(); }
  Index k() const { return static_cast<Index>(support.size()); }
};

/// Gaussian-noise instance: sigma_1 = 1.1 * ||0.01 * noise||,
/// sigma = 0.5 * sigma_1^2. Paper-scale dimensions are
/// (q, n, k) = (720 i, 2560 i, 160 i).
CsInstance gen_gaussian_instance(Index q, Index n, Index k, std::uint64_t seed,
                                 double mu = 0.95);

/// Cauchy-noise instance: noise_i = tan(pi * (u_i - 1/2)) with u uniform, and
/// sigma = 1.05 * ||0.01 * noise|| in the Lorentzian norm. Paper-scale
/// dimensions are (q, n, k) = (720 i, 2560 i, 80 i).
CsInstance gen_cauchy_instance(Index q, Index n, Index k, std::uint64_t seed,
                               double gamma = 0.08, double mu = 0.95);

/// Box radius (1 - mu)^{-1} * (||v||_1 - mu * ||v||) for v = least-norm
/// solution of Ax = b; always at least ||v||_inf.
double compute_M(const Vector& adagb, double mu);

/// sum_i log(1 + y_i^2 / gamma^2).
double lorentz_norm(const Vector& y, double gamma);

/// Constraint 0.5 * ||Ax - b||^2 - sigma <= 0 with moduli (||A||^2, 0).
/// The overload without norm_A_sq computes it via spectral_norm_sq.
SmoothConstraint quad_constraint(const Matrix& A, const Vector& b,
                                 double sigma);
SmoothConstraint quad_constraint(const Matrix& A, const Vector& b, double sigma,
                                 double norm_A_sq);

/// Constraint ||Ax - b||_{LL2,gamma} - sigma <= 0 with moduli
/// (2 ||A||^2 / gamma^2, ||A||^2 / (4 gamma^2)).
SmoothConstraint lorentz_constraint(const Matrix& A, const Vector& b,
                                    double sigma, double gamma);
SmoothConstraint lorentz_constraint(const Matrix& A, const Vector& b,
                                    double sigma, double gamma,
                                    double norm_A_sq);

/// Numerical check of the convex split of t -> log(1 + t^2) whose curvature
/// bounds back the Lorentzian moduli. Integrates the positive/negative parts
/// of the second derivative twice from 0 and verifies the reconstruction,
/// curvature ranges and initial conditions on the supplied grid (which must
/// cover [-10, 10]).
struct LorentzSplitReport {
  bool pass = false;
  double worst_identity_err = 0.0;   // |r1 - r2 - log(1+t^2)| over the grid
  double min_r1pp = 0.0, max_r1pp = 0.0;
  double min_r2pp = 0.0, max_r2pp = 0.0;
  double sup_r2pp = 0.0;             // grid supremum of r2'' (expected 1/4)
  double r1_at0 = 0.0, r2_at0 = 0.0, r1p_at0 = 0.0, r2p_at0 = 0.0;
  double scaled_sup_r1pp = 0.0;      // sup of d^2/dy^2 r1(y/gamma)
  double scaled_sup_r2pp = 0.0;
};
LorentzSplitReport verify_lorentz_dc_split(double gamma,
                                           const std::vector<double>& grid);

/// Componentwise clip to [-M, M] of the soft-threshold of z - v / rho: the
/// exact minimizer of ||x||_1 + <v, x> + (rho/2) ||x - z||^2 over the box.
Vector l1_box_sprox(const Vector& v, const Vector& z, double rho, double M);

/// Assembles the full problem: P1 = ||.||_1, P2 = mu * ||.||, one residual
/// constraint, C = box of radius M carried by the instance. The overload with
/// norm_A_sq skips the spectral-norm computation.
ProblemSpec make_cs_problem(const CsInstance& instance, CsModelKind kind);
ProblemSpec make_cs_problem(const CsInstance& instance, CsModelKind kind,
                            double norm_A_sq);

/// Recovery error and (signed) constraint residual of a solution.
struct CsMetrics {
  double rec_err = 0.0;
  double residual = 0.0;
};
CsMetrics metrics(const Vector& x_star, const CsInstance& instance);

/// Bitwise round-trip serialization (little-endian binary container).
void save_instance(const CsInstance& instance, const std::string& path);
CsInstance load_instance(const std::string& path);

}  // namespace esqm::cs
