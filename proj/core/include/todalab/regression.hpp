#pragma once

#include <span>

namespace todalab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y ~ slope * x + intercept; needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace todalab
