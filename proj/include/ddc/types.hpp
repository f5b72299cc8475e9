// ============================================================================
// ddc/types.hpp - shared scalar, point and function types
// ============================================================================
#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>

namespace ddc {

using Index = int;
using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Coefficient vector of a discrete field. Vector-valued velocity fields are
/// stored component-blocked: all x-dofs, then all y-dofs.
using FieldVector = Eigen::VectorXd;

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Vec2(const Point&)>;
using TensorFunction = std::function<Mat2(const Point&)>;
using TimeVectorFunction = std::function<Vec2(const Point&, double)>;
using TimeTensorFunction = std::function<Mat2(const Point&, double)>;

/// A linear solve failed or could not reach its residual target.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A time-stepping scheme could not complete a step (Picard divergence etc.).
class SchemeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ddc
