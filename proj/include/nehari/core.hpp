#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace nehari {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Reference rectangle (0,1) x (-a,a).
struct Rectangle {
  double a = 1.0;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateTrajectoryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FoldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config-file parse failure with location diagnostics.
struct ConfigError : std::runtime_error {
  int line;
  std::string field;
  ConfigError(int line_, std::string field_, const std::string& msg)
      : std::runtime_error("config error at line " + std::to_string(line_) +
                           (field_.empty() ? "" : " (" + field_ + ")") + ": " + msg),
        line(line_),
        field(std::move(field_)) {}
};

/// Fixed-tree pairwise reduction. The split points depend only on the length,
/// so the result is bit-identical no matter how the values were produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline bool nearly_equal(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace nehari
