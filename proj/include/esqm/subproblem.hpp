#pragma once

#include <vector>

#include "esqm/problem.hpp"
#include "esqm/types.hpp"

namespace esqm {

/// Solution of the per-iteration strongly convex subproblem
///   min_{x in C} P1(x) - <xi, x> + theta * max_i [l_i(x)]_+
///                + (theta * L_g / 2) * ||x - y||^2
/// where l_i are affine models of the constraints.
struct SubproblemSolution {
  Vector x_next;
  double s_next = 0.0;  // max_i [l_i(x_next)]_+
  Vector multipliers;   // hinge duals, >= 0 with sum <= theta
  double gap = 0.0;     // primal minus dual objective, >= 0
};

/// Single-constraint solver. Writes the hinge as
/// theta * [u]_+ = max_{lambda in [0, theta]} lambda * u, so for fixed lambda
/// the inner minimizer is prox(-xi + lambda * slope, y, theta * L_g); the dual
/// derivative lambda -> l(x(lambda)) is nonincreasing and its root on
/// [0, theta] is located by bisection to interval width 1e-12 * max(1, theta).
/// The returned lambda is the high end of the final bracket, so the model
/// value at x_next is <= 0 whenever the dual is interior.
///
/// bisect_split in (0, 1) picks where each bracket is cut (0.5 = midpoint);
/// any value yields the same solution up to the bracket width.
SubproblemSolution solve_single(const AffineModel& model, const Vector& xi,
                                double theta, double L_g, const Vector& y,
                                const ProxFn& prox, double bisect_split = 0.5);

/// Multi-constraint solver. Uses
/// theta * max_i [l_i(x)]_+ = max { sum_i lambda_i l_i(x) :
///                                  lambda >= 0, sum lambda_i <= theta }
/// and maximizes the concave dual by accelerated projected gradient ascent on
/// the scaled simplex-with-slack, restarting the acceleration every 100 steps
/// and whenever it turns against the gradient. Stops once the primal-dual gap
/// is at most tol; throws AccuracyFailure (carrying the best gap) if the
/// iteration cap is hit first. lambda0, when given, seeds the dual iterate.
SubproblemSolution solve_multi(const std::vector<AffineModel>& models,
                               const Vector& xi, double theta, double L_g,
                               const Vector& y, const ProxFn& prox, double tol,
                               const Vector* lambda0 = nullptr,
                               int max_iters = 100000);

/// Euclidean projection onto { lambda >= 0, sum lambda_i <= theta }.
Vector projection_simplex_slack(const Vector& lambda, double theta);

/// Inputs for the grid-search oracle; C is the l-infinity ball of radius
/// box_radius and P1 is evaluated pointwise.
struct SubproblemData {
  std::vector<AffineModel> models;
  Vector xi;
  double theta = 0.0;
  double L_g = 0.0;
  Vector y;
  ScalarFn p1;
  double box_radius = 0.0;
};

/// Subproblem objective at x (the quantity both solvers minimize).
double subproblem_objective(const SubproblemData& data, const Vector& x);

/// Independent minimizer estimate for n <= 3: dense grid over C at the given
/// resolution, then pattern-search descent with shrinking steps plus
/// kink-aligned candidate points. Test oracle; never calls the prox.
Vector brute_force_subproblem(const SubproblemData& data, double resolution);

}  // namespace esqm
