#ifndef CURVLAB_LINALG_HPP
#define CURVLAB_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/errors.hpp"

namespace curvlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // columns match values
};

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
inline SymEig sym_eig(const Mat& m) {
  if (m.rows() == 0) return {Vec(0), Mat(0, 0)};
  const Mat s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Sum of the k smallest eigenvalues: the minimum of Tr(P_W m P_W) over k-dim W.
inline double ky_fan_min(const Mat& m, int k) {
  const Vec ev = sym_eig(m).values;
  require(k >= 0 && k <= ev.size(), ErrorKind::parameter, "ky_fan_min: k out of range");
  return ev.head(k).sum();
}

/// Sum of the k largest eigenvalues.
inline double ky_fan_max(const Mat& m, int k) {
  const Vec ev = sym_eig(m).values;
  require(k >= 0 && k <= ev.size(), ErrorKind::parameter, "ky_fan_max: k out of range");
  return ev.tail(k).sum();
}

inline double asymmetry(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Modified Gram-Schmidt in the inner product `g`. Candidates are processed in
/// column order; those whose residual norm falls below `drop_tol` (relative to
/// their own length) are skipped. Stops after `count` vectors.
inline Mat gram_schmidt(const Mat& g, const Mat& candidates, int count, double drop_tol = 1e-8) {
  const Eigen::Index n = candidates.rows();
  Mat out(n, count);
  int found = 0;
  for (Eigen::Index c = 0; c < candidates.cols() && found < count; ++c) {
    Vec w = candidates.col(c);
    const double len0 = std::sqrt(std::max(0.0, w.dot(g * w)));
    if (len0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < found; ++j) w -= out.col(j).dot(g * w) * out.col(j);
    }
    const double len = std::sqrt(std::max(0.0, w.dot(g * w)));
    if (len < drop_tol * len0) continue;
    out.col(found++) = w / len;
  }
  require(found == count, ErrorKind::degeneracy, "gram_schmidt: candidates do not span");
  return out;
}

struct RankInfo {
  int rank = 0;
  double gap = 0.0;  // ratio sigma_{rank} / sigma_max of the first discarded value (0 if none)
};

/// Numerical rank with a relative singular-value threshold.
inline RankInfo numerical_rank(const Mat& a, double rel_thr) {
  RankInfo info;
  if (a.size() == 0) return info;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  if (smax == 0.0) return info;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_thr * smax) {
      ++info.rank;
    } else {
      info.gap = s(i) / smax;
      break;
    }
  }
  return info;
}

/// Orthonormal basis (Euclidean) of ker(a) using a relative threshold.
/// `scale` overrides the reference singular value when positive.
inline Mat null_space(const Mat& a, double rel_thr, double scale = -1.0) {
  const Eigen::Index cols = a.cols();
  if (a.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  const double ref = scale > 0.0 ? scale : (s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_thr * ref && ref > 0.0) ++r;
  return svd.matrixV().rightCols(cols - r);
}

/// Orthonormal basis of the column span of a.
inline Mat column_span(const Mat& a, double rel_thr) {
  if (a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const Vec s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(0) > 0.0 && s(i) > rel_thr * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal complement in R^m of the span of the columns of q.
inline Mat orthogonal_complement(const Mat& q, Eigen::Index m, double rel_thr = 1e-9) {
  if (q.cols() == 0) return Mat::Identity(m, m);
  return null_space(q.transpose(), rel_thr);
}

}  // namespace curvlab

#endif  // CURVLAB_LINALG_HPP
