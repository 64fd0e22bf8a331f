#pragma once

#include <utility>
#include <vector>

#include "esqm/types.hpp"

namespace esqm {

/// Smooth inequality constraint g(x) <= 0 together with the Lipschitz moduli
/// of the gradients of its convex/concave split g = g1 - g2. Only the moduli
/// of the split are needed by the solver, never g1/g2 themselves.
/// Requires modulus_L >= modulus_ell >= 0.
struct SmoothConstraint {
  ScalarFn eval;    // g(x)
  VectorFn grad;    // gradient of g at x
  double modulus_L = 0.0;
  double modulus_ell = 0.0;
};

/// Problem data for  min P1(x) - P2(x)  s.t.  g_i(x) <= 0, x in C,
/// with P1, P2 convex and C a compact convex set. P1 and C enter only through
/// the joint prox oracle p1_composite_prox; oracles must be pure.
struct ProblemSpec {
  Index dimension = 0;
  ScalarFn p1_eval;
  ProxFn p1_composite_prox;  // argmin_{x in C} P1(x) + <v,x> + (rho/2)|x-z|^2
  ScalarFn p2_eval;
  VectorFn p2_subgrad;       // any element of the subdifferential of P2
  std::vector<SmoothConstraint> constraints;
  VectorFn c_project;        // metric projection onto C
  ContainsFn c_contains;
  double p_lower_bound = 0.0;   // any lower bound on inf_C (P1 - P2)
  double p1_lower_bound = 0.0;  // any lower bound on inf_C P1
  // Declared by the caller when P2 == 0 and every g_i is convex; enables the
  // convex-mode potential audit. Cannot be verified against the oracles.
  bool convex_mode = false;
};

/// Affine minorant/model  u -> slope . u + offset  of a constraint anchored
/// at some point w, i.e. g(w) + <grad g(w), u - w>.
struct AffineModel {
  Vector slope;
  double offset = 0.0;
};

/// Evaluates the affine model at u.
double lin_g(const AffineModel& model, const Vector& u);

/// Builds one affine model per constraint, anchored at y.
std::vector<AffineModel> build_models(const ProblemSpec& problem,
                                      const Vector& y);

/// (L_g, ell_g): componentwise maxima of the constraint moduli.
std::pair<double, double> aggregate_moduli(const ProblemSpec& problem);

/// Upper limit sqrt(L_g / (L_g + ell_g)) for the extrapolation parameters.
double beta_cap(double L_g, double ell_g);

/// max_i [g_i(x)]_+ ; zero exactly when x satisfies every constraint.
double max_violation(const ProblemSpec& problem, const Vector& x);

}  // namespace esqm
