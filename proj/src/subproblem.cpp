#include "esqm/subproblem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace esqm {

namespace {

Vector call_prox(const ProxFn& prox, const Vector& v, const Vector& y,
                 double rho) {
  Vector x = prox(v, y, rho);
  if (!x.allFinite()) {
    throw NumericFailure("subproblem: prox oracle returned non-finite values");
  }
  return x;
}

}  // namespace

SubproblemSolution solve_single(const AffineModel& model, const Vector& xi,
                                double theta, double L_g, const Vector& y,
                                const ProxFn& prox, double bisect_split) {
  if (theta <= 0.0 || L_g <= 0.0) {
    throw ContractViolation("solve_single: theta and L_g must be positive");
  }
  if (!(bisect_split > 0.0 && bisect_split < 1.0)) {
    throw ContractViolation("solve_single: bisect_split must lie in (0, 1)");
  }
  const double rho = theta * L_g;
  auto x_of = [&](double lambda) {
    return call_prox(prox, model.slope * lambda - xi, y, rho);
  };

  double lambda = 0.0;
  Vector x = x_of(0.0);
  double lin = lin_g(model, x);
  if (!std::isfinite(lin)) {
    throw NumericFailure("solve_single: non-finite model value");
  }

  if (model.slope.isZero(0.0)) {
    // Degenerate slope: x(lambda) is constant and the dual derivative equals
    // the offset everywhere.
    if (model.offset > 0.0) lambda = theta;
  } else if (lin > 0.0) {
    Vector x_hi = x_of(theta);
    const double lin_hi = lin_g(model, x_hi);
    if (!std::isfinite(lin_hi)) {
      throw NumericFailure("solve_single: non-finite model value");
    }
    if (lin_hi >= 0.0) {
      // Penalty saturated even at lambda = theta.
      lambda = theta;
      x = std::move(x_hi);
      lin = lin_hi;
    } else {
      // Bracket [lo, hi] with lin(x(lo)) > 0 > lin(x(hi)); x/lin track hi.
      double lo = 0.0;
      double hi = theta;
      double lin_lo = lin;
      x = std::move(x_hi);
      lin = lin_hi;
      const double width_tol = 1e-12 * std::max(1.0, theta);
      while (hi - lo > width_tol) {
        const double mid = lo + bisect_split * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        Vector x_mid = x_of(mid);
        const double lin_mid = lin_g(model, x_mid);
        if (!std::isfinite(lin_mid)) {
          throw NumericFailure("solve_single: non-finite model value");
        }
        const double slack = 1e-9 * (1.0 + std::abs(lin_lo) + std::abs(lin));
        if (lin_mid > lin_lo + slack || lin_mid < lin - slack) {
          throw ContractViolation(
              "solve_single: dual derivative is not nonincreasing; "
              "prox oracle violates its contract");
        }
        if (lin_mid > 0.0) {
          lo = mid;
          lin_lo = lin_mid;
        } else {
          hi = mid;
          x = std::move(x_mid);
          lin = lin_mid;
        }
      }
      // Return the high end: the model value at x_next stays <= 0 there.
      lambda = hi;
    }
  }

  SubproblemSolution sol;
  sol.x_next = std::move(x);
  sol.s_next = std::max(lin, 0.0);
  sol.multipliers = Vector::Constant(1, lambda);
  sol.gap = theta * std::max(lin, 0.0) - lambda * lin;
  return sol;
}

Vector projection_simplex_slack(const Vector& lambda, double theta) {
  if (theta <= 0.0) {
    throw ContractViolation("projection_simplex_slack: theta must be positive");
  }
  Vector clipped = lambda.cwiseMax(0.0);
  if (clipped.sum() <= theta) return clipped;
  // The slack constraint is active: project onto {x >= 0, sum x = theta}.
  std::vector<double> u(lambda.data(), lambda.data() + lambda.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    running += u[i];
    const double t = (running - theta) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      tau = t;
    } else {
      break;
    }
  }
  return (lambda.array() - tau).max(0.0).matrix();
}

SubproblemSolution solve_multi(const std::vector<AffineModel>& models,
                               const Vector& xi, double theta, double L_g,
                               const Vector& y, const ProxFn& prox, double tol,
                               const Vector* lambda0, int max_iters) {
  const auto m = static_cast<Index>(models.size());
  if (m < 1) throw ContractViolation("solve_multi: need at least one model");
  if (theta <= 0.0 || L_g <= 0.0) {
    throw ContractViolation("solve_multi: theta and L_g must be positive");
  }
  if (tol <= 0.0) throw ContractViolation("solve_multi: tol must be positive");
  const double rho = theta * L_g;
  const Index n = y.size();

  Matrix S(m, n);
  Vector offsets(m);
  for (Index i = 0; i < m; ++i) {
    if (models[i].slope.size() != n) {
      throw ContractViolation("solve_multi: model dimension mismatch");
    }
    S.row(i) = models[i].slope;
    offsets[i] = models[i].offset;
  }

  auto primal_at = [&](const Vector& lam) {
    return call_prox(prox, S.transpose() * lam - xi, y, rho);
  };
  auto assemble = [&](Vector x, Vector lam, const Vector& lvals, double gap) {
    SubproblemSolution sol;
    sol.x_next = std::move(x);
    sol.s_next = std::max(lvals.maxCoeff(), 0.0);
    sol.multipliers = std::move(lam);
    sol.gap = gap;
    return sol;
  };

  const double S_norm_sq =
      Eigen::SelfAdjointEigenSolver<Matrix>(S * S.transpose())
          .eigenvalues()
          .maxCoeff();
  if (S_norm_sq <= 0.0) {
    // All slopes vanish: the dual is linear with constant gradient `offsets`.
    Index imax = 0;
    const double cmax = offsets.maxCoeff(&imax);
    Vector lam = Vector::Zero(m);
    if (cmax > 0.0) lam[imax] = theta;
    Vector x = primal_at(lam);
    Vector lvals = S * x + offsets;
    const double gap = theta * std::max(lvals.maxCoeff(), 0.0) - lam.dot(lvals);
    return assemble(std::move(x), std::move(lam), lvals, gap);
  }
  const double step = rho / S_norm_sq;

  Vector lam = lambda0 ? projection_simplex_slack(*lambda0, theta)
                       : Vector::Zero(m);
  Vector mu = lam;
  double t = 1.0;
  int since_restart = 0;
  double best_gap = std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iters; ++it) {
    const Vector x_mu = primal_at(mu);
    const Vector grad = S * x_mu + offsets;
    Vector lam_next = projection_simplex_slack(mu + step * grad, theta);

    Vector x = primal_at(lam_next);
    Vector lvals = S * x + offsets;
    const double gap =
        theta * std::max(lvals.maxCoeff(), 0.0) - lam_next.dot(lvals);
    best_gap = std::min(best_gap, gap);
    if (gap <= tol) {
      return assemble(std::move(x), std::move(lam_next), lvals, gap);
    }

    ++since_restart;
    const bool restart =
        since_restart >= 100 || (lam_next - lam).dot(grad) < 0.0;
    if (restart) {
      since_restart = 0;
      t = 1.0;
      mu = lam_next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      mu = lam_next + ((t - 1.0) / t_next) * (lam_next - lam);
      t = t_next;
    }
    lam = std::move(lam_next);
  }
  throw AccuracyFailure("solve_multi: iteration cap reached before gap <= tol",
                        best_gap);
}

double subproblem_objective(const SubproblemData& data, const Vector& x) {
  double hinge = 0.0;
  for (const auto& mdl : data.models) {
    hinge = std::max(hinge, lin_g(mdl, x));
  }
  return data.p1(x) - data.xi.dot(x) + data.theta * hinge +
         0.5 * data.theta * data.L_g * (x - data.y).squaredNorm();
}

namespace {

// All nonzero sign-pattern directions in {-1, 0, 1}^n.
std::vector<Vector> pattern_directions(Index n) {
  std::vector<Vector> dirs;
  int total = 1;
  for (Index j = 0; j < n; ++j) total *= 3;
  for (int code = 0; code < total; ++code) {
    Vector d = Vector::Zero(n);
    int rem = code;
    bool nonzero = false;
    for (Index j = 0; j < n; ++j) {
      const int trit = rem % 3;
      rem /= 3;
      d[j] = static_cast<double>(trit - 1);
      nonzero = nonzero || trit != 1;
    }
    if (nonzero) dirs.push_back(std::move(d));
  }
  return dirs;
}

}  // namespace

Vector brute_force_subproblem(const SubproblemData& data, double resolution) {
  const Index n = data.y.size();
  if (n > 3) {
    throw Unsupported("brute_force_subproblem: only n <= 3 is supported");
  }
  if (resolution <= 0.0) {
    throw ContractViolation("brute_force_subproblem: resolution must be positive");
  }
  const double M = data.box_radius;
  if (M <= 0.0) {
    throw ContractViolation("brute_force_subproblem: box_radius must be positive");
  }
  auto F = [&](const Vector& x) { return subproblem_objective(data, x); };
  auto clip = [&](const Vector& x) {
    return x.cwiseMax(-M).cwiseMin(M).eval();
  };

  // Dense grid over the box.
  const long steps = std::lround(std::ceil(2.0 * M / resolution));
  Vector best = Vector::Constant(n, -M);
  double fbest = F(best);
  {
    std::vector<long> counter(static_cast<std::size_t>(n), 0);
    Vector x(n);
    while (true) {
      for (Index j = 0; j < n; ++j) {
        x[j] = std::min(-M + static_cast<double>(counter[j]) * resolution, M);
      }
      const double fx = F(x);
      if (fx < fbest) {
        fbest = fx;
        best = x;
      }
      Index j = 0;
      while (j < n) {
        if (++counter[j] <= steps) break;
        counter[j] = 0;
        ++j;
      }
      if (j == n) break;
    }
  }

  const std::vector<Vector> dirs = pattern_directions(n);
  auto consider = [&](const Vector& cand) {
    const double fc = F(cand);
    if (fc < fbest) {
      fbest = fc;
      best = cand;
    }
  };
  auto walk = [&](double step) {
    bool moved = true;
    int guard = 0;
    while (moved && guard < 100000) {
      moved = false;
      for (const auto& d : dirs) {
        const Vector cand = clip(best + step * d);
        const double fc = F(cand);
        if (fc < fbest) {
          fbest = fc;
          best = cand;
          moved = true;
          ++guard;
        }
      }
    }
  };

  // Candidates on the nonsmooth seams: model hyperplanes, axes, and (for
  // n = 2) their pairwise intersections.
  consider(Vector::Zero(n));
  for (const auto& mdl : data.models) {
    const double ss = mdl.slope.squaredNorm();
    if (ss <= 0.0) continue;
    consider(clip(data.y - (lin_g(mdl, data.y) / ss) * mdl.slope));
    consider(clip(-(mdl.offset / ss) * mdl.slope));
    if (n == 2) {
      for (Index j = 0; j < 2; ++j) {
        const Index o = 1 - j;
        if (mdl.slope[o] != 0.0) {
          Vector cand = Vector::Zero(2);
          cand[o] = -mdl.offset / mdl.slope[o];
          consider(clip(cand));
        }
      }
    }
  }
  if (n == 2) {
    for (std::size_t i = 0; i + 1 < data.models.size(); ++i) {
      for (std::size_t j = i + 1; j < data.models.size(); ++j) {
        Eigen::Matrix2d A2;
        A2.row(0) = data.models[i].slope.transpose();
        A2.row(1) = data.models[j].slope.transpose();
        if (std::abs(A2.determinant()) > 1e-14) {
          Eigen::Vector2d rhs(-data.models[i].offset, -data.models[j].offset);
          consider(clip(A2.inverse() * rhs));
        }
      }
    }
  }

  // Pattern-search descent with shrinking steps; snap near-seam coordinates
  // at every scale so walks can continue along the kinks.
  for (double step = resolution; step > 0.5e-11; step /= 4.0) {
    walk(step);
    Vector snapped = best;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(snapped[j]) <= step) snapped[j] = 0.0;
      if (M - std::abs(snapped[j]) <= step) {
        snapped[j] = snapped[j] > 0.0 ? M : -M;
      }
    }
    consider(snapped);
    for (const auto& mdl : data.models) {
      const double ss = mdl.slope.squaredNorm();
      if (ss > 0.0) {
        consider(clip(best - (lin_g(mdl, best) / ss) * mdl.slope));
      }
    }
  }
  walk(1e-11);
  return best;
}

}  // namespace esqm
