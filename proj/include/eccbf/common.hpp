#ifndef ECCBF_COMMON_HPP
#define ECCBF_COMMON_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace eccbf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

/// Caller broke a documented precondition (dimension mismatch, bad sizes).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested operation is not available for this kind (e.g. a custom
/// extent without a gradient callback, or a non-polynomial on the SOS path).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Boundary tracing failed (the extent is degenerate along some ray).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state or input encountered.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario or program configuration is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing an output file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

/// Wraps an angle to [-pi, pi).
double wrap_angle(double angle);

}  // namespace eccbf

#endif  // ECCBF_COMMON_HPP
