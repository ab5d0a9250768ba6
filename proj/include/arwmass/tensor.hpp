#pragma once

// Fixed-capacity tensor storage for spacetimes of dimension <= 4. The active
// dimension travels separately; unused slots stay zero.

#include <array>
#include <cmath>
#include <cstddef>

namespace arwmass {

inline constexpr int kMaxDim = 4;

using Vec = std::array<double, kMaxDim>;
using Mat = std::array<Vec, kMaxDim>;
using Rank3 = std::array<Mat, kMaxDim>;
using Rank4 = std::array<Rank3, kMaxDim>;

inline Mat identity(int dim) {
  Mat m{};
  for (int i = 0; i < dim; ++i) m[i][i] = 1.0;
  return m;
}

/// Determinant by Gaussian elimination with partial pivoting.
double determinant(const Mat& m, int dim);

/// Inverse by Gauss-Jordan with partial pivoting. Returns false when singular.
bool invert(const Mat& m, int dim, Mat& out);

inline double max_abs(const Mat& m, int dim) {
  double out = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out = std::fmax(out, std::fabs(m[i][j]));
  return out;
}

}  // namespace arwmass
