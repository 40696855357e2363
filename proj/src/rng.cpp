#include "psdprobe/rng.hpp"

namespace psdprobe {

Vector Rng::gaussian_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gaussian();
  return v;
}

Matrix Rng::gaussian_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian();
  return m;
}

Vector Rng::sphere(Index n) {
  Vector v = gaussian_vector(n);
  double nv = v.norm();
  while (nv == 0.0) {
    v = gaussian_vector(n);
    nv = v.norm();
  }
  return v / nv;
}

}  // namespace psdprobe
