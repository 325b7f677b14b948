#ifndef CURVLAB_TESTS_SUPPORT_HPP
#define CURVLAB_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>

#include "curvlab/manifold.hpp"

namespace testing_support {

using curvlab::Mat;
using curvlab::Vec;

inline Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

inline Vec random_point(std::mt19937_64& rng, int n, double radius) {
  std::uniform_real_distribution<double> ud(-radius, radius);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = ud(rng);
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, const Mat& g) {
  Vec v = gaussian(rng, static_cast<int>(g.rows()));
  return v / std::sqrt(v.dot(g * v));
}

/// g-orthonormal k-frame inside the g-orthogonal complement of v.
inline Mat random_frame_perp(std::mt19937_64& rng, const Mat& g, const Vec& v, int k) {
  const int n = static_cast<int>(g.rows());
  Mat cand(n, k + 1);
  cand.col(0) = v;
  for (int j = 1; j <= k; ++j) cand.col(j) = gaussian(rng, n);
  return curvlab::gram_schmidt(g, cand, k + 1).rightCols(k);
}

}  // namespace testing_support

#endif
