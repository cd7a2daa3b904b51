#pragma once

// Pointwise tensor algebra in chart components. `gi` is always the plain matrix inverse of
// g_{i jbar}; the inverse metric g^{i jbar} is its transpose.

#include "lyhlab/geom.hpp"
#include "lyhlab/types.hpp"

namespace lyhlab::tensor {

/// g^{k lbar} A_{i lbar} B_{k jbar}.
inline SmallMatrix product(const SmallMatrix& a, const SmallMatrix& gi, const SmallMatrix& b) {
  return a * gi * b;
}

/// g^{i jbar} M_{i jbar}.
inline Complex trace(const SmallMatrix& gi, const SmallMatrix& m) { return (gi * m).trace(); }

/// T^{k lbar} with both indices raised.
inline SmallMatrix raise(const SmallMatrix& gi, const SmallMatrix& t) {
  return (gi * t * gi).transpose();
}

/// R_{i jbar k lbar} T^{k lbar}; equals R_{i jbar l kbar} T_{k lbar} in unitary frames.
inline SmallMatrix contract(const geom::CurvatureData& r, const SmallMatrix& gi,
                            const SmallMatrix& t) {
  const int n = r.n;
  const SmallMatrix up = raise(gi, t);
  SmallMatrix out = SmallMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out(i, j) += r(i, j, k, l) * up(k, l);
  return out;
}

/// g^{k lbar} d_k db_l.
inline Complex pairing(const SmallMatrix& gi, const SmallVector& d, const SmallVector& db) {
  return (db.transpose() * gi * d)(0, 0);
}

/// g^{k lbar} S_{i k} conj(S_{j l}).
inline SmallMatrix holo_square(const SmallMatrix& s, const SmallMatrix& gi) {
  return s * gi.transpose() * s.adjoint();
}

/// Smallest eigenvalue of a Hermitian matrix (n <= 2, closed form).
double hermitian_min_eigenvalue(const SmallMatrix& m);

/// Smallest eigenvalue of the pencil (m, g): min over v of v* m v / v* g v.
double pencil_min_eigenvalue(const SmallMatrix& m, const SmallMatrix& g);

}  // namespace lyhlab::tensor
