#ifndef CURVLAB_PATCH_HPP
#define CURVLAB_PATCH_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "curvlab/autodiff.hpp"
#include "curvlab/manifold.hpp"

namespace curvlab {

/// Parametrized embedded submanifold of a chart. The embedding is a generic
/// callable `f(const T* u, T* x)` so tangent vectors and second derivatives come
/// from exact differentiation.
struct SubmanifoldPatch {
  std::string name;
  ChartPtr ambient;
  int dim_sub = 0;
  std::vector<double> param_lo, param_hi;  // sampling box for the parameters
  std::vector<bool> periodic;              // periodic parameters are sampled without the right endpoint
  std::function<void(const double*, double*)> embed_d;
  std::function<void(const HyperDual*, HyperDual*)> embed_h;

  Vec point(const Vec& u) const {
    Vec x(ambient->dim);
    embed_d(u.data(), x.data());
    return x;
  }
};

using PatchPtr = std::shared_ptr<const SubmanifoldPatch>;

template <class F>
SubmanifoldPatch make_patch(std::string name, ChartPtr ambient, int dim_sub, std::vector<double> lo,
                            std::vector<double> hi, std::vector<bool> periodic, F f) {
  SubmanifoldPatch p;
  p.name = std::move(name);
  p.ambient = std::move(ambient);
  p.dim_sub = dim_sub;
  p.param_lo = std::move(lo);
  p.param_hi = std::move(hi);
  p.periodic = std::move(periodic);
  p.embed_d = [f](const double* u, double* x) { f(u, x); };
  p.embed_h = [f](const HyperDual* u, HyperDual* x) { f(u, x); };
  return p;
}

/// Zero-dimensional patch at a fixed point.
inline SubmanifoldPatch make_point_patch(std::string name, ChartPtr ambient, Vec where) {
  return make_patch(std::move(name), std::move(ambient), 0, {}, {}, {},
                    [where](const auto*, auto* x) {
                      for (Eigen::Index i = 0; i < where.size(); ++i) x[i] = where(i);
                    });
}

/// First and second order data of a patch at a parameter point.
struct PatchFrame {
  Vec u;
  Vec x;
  Mat g;
  Mat tangents;                 // n x l, coordinate partials d_i f
  std::vector<Vec> second;      // l*l entries, d_i d_j f
  Mat tangent_frame;            // n x l, g-orthonormal
  Mat normal_frame;             // n x (n-l), g-orthonormal, g-orthogonal to tangent_frame
  Mat to_frame;                 // l x l: tangent_frame = tangents * to_frame
};

inline PatchFrame patch_frame(const SubmanifoldPatch& N, const Vec& u) {
  const int n = N.ambient->dim;
  const int l = N.dim_sub;
  require(u.size() == l, ErrorKind::parameter, "patch_frame: parameter dimension mismatch for " + N.name);
  PatchFrame pf;
  pf.u = u;
  pf.x = N.point(u);
  pf.g = metric_at(*N.ambient, pf.x);
  pf.tangents = Mat::Zero(n, l);
  pf.second.assign(static_cast<size_t>(l) * l, Vec::Zero(n));
  std::vector<HyperDual> uh(l), xh(n);
  for (int i = 0; i < l; ++i)
    for (int j = i; j < l; ++j) {
      for (int a = 0; a < l; ++a) uh[a] = HyperDual(u(a));
      uh[i].d1 = 1.0;
      uh[j].d2 = 1.0;
      N.embed_h(uh.data(), xh.data());
      for (int r = 0; r < n; ++r) {
        pf.tangents(r, i) = xh[r].d1;
        pf.tangents(r, j) = xh[r].d2;
        pf.second[i * l + j](r) = xh[r].d12;
        pf.second[j * l + i](r) = xh[r].d12;
      }
    }
  pf.tangent_frame = l > 0 ? gram_schmidt(pf.g, pf.tangents, l) : Mat(n, 0);
  require(l == 0 || (pf.tangent_frame.size() > 0), ErrorKind::degeneracy, "patch is not immersed");
  // tangent_frame = tangents * to_frame  =>  to_frame = (tangents^T g tangents)^{-1} tangents^T g frame
  if (l > 0) {
    const Mat gram = pf.tangents.transpose() * pf.g * pf.tangents;
    pf.to_frame = gram.ldlt().solve(pf.tangents.transpose() * pf.g * pf.tangent_frame);
  } else {
    pf.to_frame = Mat(0, 0);
  }
  Mat cand(n, l + n);
  cand.leftCols(l) = pf.tangent_frame;
  cand.rightCols(n) = Mat::Identity(n, n);
  const Mat full = gram_schmidt(pf.g, cand, n);
  pf.normal_frame = full.rightCols(n - l);
  return pf;
}

/// Symmetric operator S_v on T_pN in the orthonormal tangent frame, with the
/// convention S_v X = (nabla_X v)^T, so <S_v X, Y> = -<II(X, Y), v>. With this
/// convention the Riccati operator of the family of normal geodesics leaving N
/// starts at S_v.
struct ShapeOperator {
  Vec u;
  Vec normal;
  Mat matrix;
};

/// Component of `v` along the tangent space (coefficients in the tangent frame).
inline Vec tangent_components(const PatchFrame& pf, const Vec& v) {
  return pf.tangent_frame.transpose() * pf.g * v;
}

inline ShapeOperator shape_operator(const SubmanifoldPatch& N, const PatchFrame& pf, const Vec& v) {
  const int l = N.dim_sub;
  const double vn = norm(pf.g, v);
  require(std::abs(vn - 1.0) <= 1e-8, ErrorKind::precondition, "shape_operator: normal is not unit length");
  require(l == 0 || tangent_components(pf, v).cwiseAbs().maxCoeff() <= 1e-8, ErrorKind::precondition,
          "shape_operator: vector is not normal to " + N.name);
  ShapeOperator s;
  s.u = pf.u;
  s.normal = v;
  if (l == 0) {
    s.matrix = Mat(0, 0);
    return s;
  }
  const Christoffel G = christoffel(*N.ambient, pf.x);
  Mat b(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      const Vec acc = pf.second[i * l + j] + G.contract(pf.tangents.col(i), pf.tangents.col(j));
      b(i, j) = inner(pf.g, v, acc);
    }
  Mat m = -pf.to_frame.transpose() * b * pf.to_frame;
  s.matrix = 0.5 * (m + m.transpose());
  return s;
}

inline ShapeOperator shape_operator(const SubmanifoldPatch& N, const Vec& u, const Vec& v) {
  return shape_operator(N, patch_frame(N, u), v);
}

/// Extremes of Tr(S|_W) over k-dimensional subspaces W: sums of the k smallest
/// and k largest eigenvalues.
struct TraceExtremes {
  double min = 0.0;
  double max = 0.0;
};

inline TraceExtremes trace_extremes(const Mat& s, int k) {
  require(k >= 1 && k <= s.rows(), ErrorKind::parameter, "trace_extremes: k must lie in [1, dim]");
  const Vec ev = sym_eig(s).values;
  return {ev.head(k).sum(), ev.tail(k).sum()};
}

}  // namespace curvlab

#endif  // CURVLAB_PATCH_HPP
