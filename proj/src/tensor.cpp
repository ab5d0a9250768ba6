#include "arwmass/tensor.hpp"

#include <utility>

namespace arwmass {

double determinant(const Mat& m, int dim) {
  Mat a = m;
  double det = 1.0;
  for (int c = 0; c < dim; ++c) {
    int p = c;
    for (int r = c + 1; r < dim; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (a[p][c] == 0.0) return 0.0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < dim; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < dim; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

bool invert(const Mat& m, int dim, Mat& out) {
  Mat a = m;
  out = identity(dim);
  for (int c = 0; c < dim; ++c) {
    int p = c;
    for (int r = c + 1; r < dim; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (a[p][c] == 0.0) return false;
    std::swap(a[p], a[c]);
    std::swap(out[p], out[c]);
    const double inv = 1.0 / a[c][c];
    for (int k = 0; k < dim; ++k) {
      a[c][k] *= inv;
      out[c][k] *= inv;
    }
    for (int r = 0; r < dim; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (int k = 0; k < dim; ++k) {
        a[r][k] -= f * a[c][k];
        out[r][k] -= f * out[c][k];
      }
    }
  }
  return true;
}

}  // namespace arwmass
