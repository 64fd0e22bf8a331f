#include "esqm/problem.hpp"

#include <algorithm>
#include <cmath>

namespace esqm {

double lin_g(const AffineModel& model, const Vector& u) {
  if (u.size() != model.slope.size()) {
    throw ContractViolation("lin_g: dimension mismatch");
  }
  return model.slope.dot(u) + model.offset;
}

std::vector<AffineModel> build_models(const ProblemSpec& problem,
                                      const Vector& y) {
  if (y.size() != problem.dimension) {
    throw ContractViolation("build_models: anchor dimension mismatch");
  }
  std::vector<AffineModel> models;
  models.reserve(problem.constraints.size());
  for (const auto& c : problem.constraints) {
    AffineModel m;
    m.slope = c.grad(y);
    m.offset = c.eval(y) - m.slope.dot(y);
    models.push_back(std::move(m));
  }
  return models;
}

std::pair<double, double> aggregate_moduli(const ProblemSpec& problem) {
  if (problem.constraints.empty()) {
    throw ContractViolation("aggregate_moduli: no constraints");
  }
  double L = 0.0;
  double ell = 0.0;
  for (const auto& c : problem.constraints) {
    L = std::max(L, c.modulus_L);
    ell = std::max(ell, c.modulus_ell);
  }
  return {L, ell};
}

double beta_cap(double L_g, double ell_g) {
  if (L_g <= 0.0) {
    throw ContractViolation("beta_cap: L_g must be positive");
  }
  return std::sqrt(L_g / (L_g + ell_g));
}

double max_violation(const ProblemSpec& problem, const Vector& x) {
  if (x.size() != problem.dimension) {
    throw ContractViolation("max_violation: dimension mismatch");
  }
  double worst = 0.0;
  for (const auto& c : problem.constraints) {
    worst = std::max(worst, c.eval(x));
  }
  return worst;
}

}  // namespace esqm
