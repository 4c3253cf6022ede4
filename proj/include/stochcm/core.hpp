#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochcm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::size_t;

/// Raised when an input violates a documented precondition. The CLI maps it
/// to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation fails numerically (blow-up, non-convergence,
/// insufficient data for a fit). The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          std::vector<double> diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  /// Optional numeric history attached by the failing routine (for example the
  /// contraction-ratio history of a Picard iteration).
  const std::vector<double>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<double> diagnostics_;
};

}  // namespace stochcm
