#pragma once

#include <span>

namespace arwmass {

struct Extrapolated {
  double value = 0.0;
  /// Magnitude of the last correction; 0 when no correction was applied.
  double error = 0.0;
};

/// Aitken delta-squared on the last three entries. A numerically zero second
/// difference (below 4 ulp of the largest entry) leaves the last entry as is.
/// Throws InvalidArgument for fewer than three entries.
Extrapolated aitken(std::span<const double> seq);

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace arwmass
