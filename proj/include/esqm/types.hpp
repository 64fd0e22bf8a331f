#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>

namespace esqm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

// Joint prox oracle: argmin_{x in C} P1(x) + <v, x> + (rho/2) * ||x - z||^2.
using ProxFn =
    std::function<Vector(const Vector& v, const Vector& z, double rho)>;
using ContainsFn = std::function<bool(const Vector&)>;

// A caller broke a documented precondition.
struct ContractViolation : std::invalid_argument {
  explicit ContractViolation(const std::string& what)
      : std::invalid_argument(what) {}
};

// An oracle or numeric routine produced unusable values.
struct NumericFailure : std::runtime_error {
  explicit NumericFailure(const std::string& what)
      : std::runtime_error(what) {}
};

// An iterative routine hit its cap before the requested accuracy; carries the
// best value reached (e.g. the duality gap).
struct AccuracyFailure : std::runtime_error {
  AccuracyFailure(const std::string& what, double best)
      : std::runtime_error(what), best_value(best) {}
  double best_value;
};

// The requested operation is outside the supported envelope.
struct Unsupported : std::logic_error {
  explicit Unsupported(const std::string& what) : std::logic_error(what) {}
};

}  // namespace esqm
