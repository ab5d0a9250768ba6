#include "arwmass/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arwmass/error.hpp"

namespace arwmass {

Extrapolated aitken(std::span<const double> seq) {
  if (seq.size() < 3) throw InvalidArgument("extrapolation needs at least three samples");
  const double s0 = seq[seq.size() - 3];
  const double s1 = seq[seq.size() - 2];
  const double s2 = seq[seq.size() - 1];
  const double denom = (s2 - s1) - (s1 - s0);
  const double scale = std::max({std::fabs(s0), std::fabs(s1), std::fabs(s2)});
  if (std::fabs(denom) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return {s2, 0.0};
  const double correction = (s2 - s1) * (s2 - s1) / denom;
  return {s2 - correction, std::fabs(correction)};
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs two or more points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("slope fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace arwmass
