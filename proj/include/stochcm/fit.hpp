#pragma once

#include "stochcm/core.hpp"

#include <vector>

namespace stochcm {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs at least two
/// distinct x values. r_squared is 1 when y is constant and fitted exactly.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Median of a non-empty sample.
double median(std::vector<double> values);

}  // namespace stochcm
