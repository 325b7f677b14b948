#ifndef CURVLAB_MANIFOLD_HPP
#define CURVLAB_MANIFOLD_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/autodiff.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/linalg.hpp"

namespace curvlab {

enum class ChristoffelMode { analytic, finite_difference };

/// A single coordinate chart of a Riemannian manifold.
///
/// The metric is supplied as a generic callable `f(const T* x, T* g)` writing the
/// row-major n x n metric at x; it is instantiated for double and HyperDual so
/// that Christoffel symbols and curvature can be obtained by exact
/// differentiation ("analytic" mode) or by central differences.
struct MetricChart {
  std::string name;
  int dim = 0;
  std::vector<std::string> coords;
  std::vector<double> lo, hi;  // open box domain
  ChristoffelMode mode = ChristoffelMode::analytic;
  double fd_step = 1e-4;
  std::function<void(const double*, double*)> metric_d;
  std::function<void(const HyperDual*, HyperDual*)> metric_h;
  /// Optional identification (e.g. periodic coordinates); maps x to a canonical representative.
  std::function<void(double*)> wrap;
  std::string description;

  bool contains(const Vec& x) const {
    for (int i = 0; i < dim; ++i)
      if (!(x(i) > lo[i] && x(i) < hi[i])) return false;
    return true;
  }

  Vec canonical(const Vec& x) const {
    Vec y = x;
    if (wrap) wrap(y.data());
    return y;
  }
};

using ChartPtr = std::shared_ptr<const MetricChart>;

template <class F>
MetricChart make_chart(std::string name, int dim, std::vector<std::string> coords,
                       std::vector<double> lo, std::vector<double> hi, F f) {
  MetricChart c;
  c.name = std::move(name);
  c.dim = dim;
  c.coords = std::move(coords);
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  c.metric_d = [f](const double* x, double* g) { f(x, g); };
  c.metric_h = [f](const HyperDual* x, HyperDual* g) { f(x, g); };
  return c;
}

inline MetricChart with_mode(MetricChart c, ChristoffelMode mode, double h = 1e-4) {
  c.mode = mode;
  c.fd_step = h;
  return c;
}

namespace detail {

inline void check_domain(const MetricChart& c, const Vec& x) {
  require(x.size() == c.dim, ErrorKind::parameter, "point dimension does not match chart " + c.name);
  if (!c.contains(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") outside domain of chart " << c.name;
    fail(ErrorKind::domain, os.str());
  }
}

inline Mat raw_metric(const MetricChart& c, const Vec& x) {
  Mat g(c.dim, c.dim);
  std::vector<double> buf(c.dim * c.dim);
  c.metric_d(x.data(), buf.data());
  for (int i = 0; i < c.dim; ++i)
    for (int j = 0; j < c.dim; ++j) g(i, j) = buf[i * c.dim + j];
  return g;
}

inline double fd_h(const MetricChart& c, const Vec& x, int k) {
  return c.fd_step * std::max(1.0, std::abs(x(k)));
}

}  // namespace detail

/// Metric matrix at x; throws on domain exit or loss of definiteness.
inline Mat metric_at(const MetricChart& c, const Vec& x) {
  detail::check_domain(c, x);
  Mat g = detail::raw_metric(c, x);
  Eigen::LLT<Mat> llt(0.5 * (g + g.transpose()));
  require(llt.info() == Eigen::Success, ErrorKind::definiteness,
          "metric of chart " + c.name + " is not positive definite");
  return g;
}

inline double inner(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }
inline double norm(const Mat& g, const Vec& a) { return std::sqrt(std::max(0.0, inner(g, a, a))); }

/// Christoffel symbols of the second kind, Gamma^k_ij, stored as [k][i][j].
class Christoffel {
 public:
  explicit Christoffel(int n = 0) : n_(n), data_(static_cast<size_t>(n) * n * n, 0.0) {}
  int dim() const { return n_; }
  double& operator()(int k, int i, int j) { return data_[(k * n_ + i) * n_ + j]; }
  double operator()(int k, int i, int j) const { return data_[(k * n_ + i) * n_ + j]; }

  /// Gamma^k_ij a^i b^j
  Vec contract(const Vec& a, const Vec& b) const {
    Vec out = Vec::Zero(n_);
    for (int k = 0; k < n_; ++k) {
      double s = 0.0;
      for (int i = 0; i < n_; ++i) {
        if (a(i) == 0.0) continue;
        for (int j = 0; j < n_; ++j) s += (*this)(k, i, j) * a(i) * b(j);
      }
      out(k) = s;
    }
    return out;
  }

 private:
  int n_;
  std::vector<double> data_;
};

/// Metric, inverse metric, Christoffels and (optionally) the Riemann tensor at a point.
/// Riemann is stored as R^l_{ijk} with R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
/// so that (R(X,Y)Z)^l = R^l_{ijk} X^i Y^j Z^k.
struct LocalGeometry {
  int n = 0;
  Mat g, ginv;
  Christoffel gamma;
  std::vector<double> riemann;  // empty unless requested

  double R(int l, int i, int j, int k) const { return riemann[((l * n + i) * n + j) * n + k]; }

  /// R(w, v)v, the Jacobi operator of direction v applied to w.
  Vec jacobi_operator(const Vec& w, const Vec& v) const {
    Vec out = Vec::Zero(n);
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) s += R(l, i, j, k) * w(i) * v(j) * v(k);
      out(l) = s;
    }
    return out;
  }
};

namespace detail {

// Metric derivatives: dg[k](i,j) = d_k g_ij, ddg[k*n+l](i,j) = d_k d_l g_ij.
struct MetricJet {
  Mat g;
  std::vector<Mat> dg;
  std::vector<Mat> ddg;
};

inline MetricJet analytic_jet(const MetricChart& c, const Vec& x, bool second) {
  const int n = c.dim;
  MetricJet jet;
  jet.g = raw_metric(c, x);
  jet.dg.assign(n, Mat::Zero(n, n));
  if (second) jet.ddg.assign(n * n, Mat::Zero(n, n));
  std::vector<HyperDual> xh(n), gh(n * n);
  for (int k = 0; k < n; ++k) {
    const int lmax = second ? n : k + 1;
    for (int l = k; l < lmax; ++l) {
      for (int i = 0; i < n; ++i) xh[i] = HyperDual(x(i));
      xh[k].d1 = 1.0;
      if (second) xh[l].d2 = 1.0;
      c.metric_h(xh.data(), gh.data());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const HyperDual& e = gh[i * n + j];
          jet.dg[k](i, j) = e.d1;
          if (second) {
            jet.dg[l](i, j) = e.d2;
            jet.ddg[k * n + l](i, j) = e.d12;
            jet.ddg[l * n + k](i, j) = e.d12;
          }
        }
    }
  }
  return jet;
}

inline Christoffel christoffel_from(const Mat& ginv, const std::vector<Mat>& dg, int n) {
  Christoffel gam(n);
  std::vector<double> first(static_cast<size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        first[(k * n + i) * n + j] = 0.5 * (dg[i](j, k) + dg[j](i, k) - dg[k](i, j));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += ginv(l, k) * first[(k * n + i) * n + j];
        gam(l, i, j) = s;
      }
  return gam;
}

inline Christoffel fd_christoffel(const MetricChart& c, const Vec& x) {
  const int n = c.dim;
  const Mat g = raw_metric(c, x);
  std::vector<Mat> dg(n);
  for (int k = 0; k < n; ++k) {
    const double h = fd_h(c, x, k);
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[k] = (raw_metric(c, xp) - raw_metric(c, xm)) / (2.0 * h);
  }
  return christoffel_from(g.inverse(), dg, n);
}

}  // namespace detail

/// Levi-Civita connection coefficients at x (analytic or finite-difference per chart mode).
inline Christoffel christoffel(const MetricChart& c, const Vec& x) {
  const Mat g = metric_at(c, x);
  if (c.mode == ChristoffelMode::finite_difference) return detail::fd_christoffel(c, x);
  const auto jet = detail::analytic_jet(c, x, false);
  return detail::christoffel_from(g.inverse(), jet.dg, c.dim);
}

/// Full local geometry. `with_curvature` also fills the Riemann tensor.
inline LocalGeometry local_geometry(const MetricChart& c, const Vec& x, bool with_curvature) {
  const int n = c.dim;
  LocalGeometry lg;
  lg.n = n;
  lg.g = metric_at(c, x);
  lg.ginv = lg.g.inverse();

  // dGamma[m] holds d_m Gamma^l_ij
  std::vector<Christoffel> dgam;
  if (c.mode == ChristoffelMode::finite_difference) {
    lg.gamma = detail::fd_christoffel(c, x);
    if (with_curvature) {
      dgam.reserve(n);
      for (int m = 0; m < n; ++m) {
        const double h = detail::fd_h(c, x, m);
        Vec xp = x, xm = x;
        xp(m) += h;
        xm(m) -= h;
        const Christoffel gp = detail::fd_christoffel(c, xp);
        const Christoffel gm = detail::fd_christoffel(c, xm);
        Christoffel d(n);
        for (int l = 0; l < n; ++l)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d(l, i, j) = (gp(l, i, j) - gm(l, i, j)) / (2.0 * h);
        dgam.push_back(std::move(d));
      }
    }
  } else {
    const auto jet = detail::analytic_jet(c, x, with_curvature);
    lg.gamma = detail::christoffel_from(lg.ginv, jet.dg, n);
    if (with_curvature) {
      std::vector<double> first(static_cast<size_t>(n) * n * n);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            first[(k * n + i) * n + j] = 0.5 * (jet.dg[i](j, k) + jet.dg[j](i, k) - jet.dg[k](i, j));
      dgam.assign(n, Christoffel(n));
      for (int m = 0; m < n; ++m) {
        const Mat dginv = -lg.ginv * jet.dg[m] * lg.ginv;
        for (int l = 0; l < n; ++l)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              double s = 0.0;
              for (int k = 0; k < n; ++k) {
                const double dfirst = 0.5 * (jet.ddg[m * n + i](j, k) + jet.ddg[m * n + j](i, k) -
                                             jet.ddg[m * n + k](i, j));
                s += dginv(l, k) * first[(k * n + i) * n + j] + lg.ginv(l, k) * dfirst;
              }
              dgam[m](l, i, j) = s;
            }
      }
    }
  }

  if (with_curvature) {
    lg.riemann.assign(static_cast<size_t>(n) * n * n * n, 0.0);
    const Christoffel& G = lg.gamma;
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double s = dgam[i](l, j, k) - dgam[j](l, i, k);
            for (int m = 0; m < n; ++m) s += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
            lg.riemann[((l * n + i) * n + j) * n + k] = s;
          }
  }
  return lg;
}

/// Matrix of R(., v)v on v-perp in an orthonormal basis of v-perp.
struct CurvatureOperator {
  Vec basepoint;
  Vec direction;
  Mat basis;   // n x (n-1), g-orthonormal, g-orthogonal to direction
  Mat matrix;  // (n-1) x (n-1)
};

/// Deterministic g-orthonormal basis of v-perp: Gram-Schmidt of the coordinate
/// basis against v.
inline Mat perp_frame(const Mat& g, const Vec& v) {
  const int n = static_cast<int>(v.size());
  Mat cand(n, n + 1);
  cand.col(0) = v;
  cand.rightCols(n) = Mat::Identity(n, n);
  const Mat full = gram_schmidt(g, cand, n);
  return full.rightCols(n - 1);
}

/// Jacobi operator matrix K_ab = <R(E_b, v)v, E_a> in the given frame.
inline Mat jacobi_matrix(const LocalGeometry& lg, const Vec& v, const Mat& frame) {
  const Eigen::Index m = frame.cols();
  Mat gE = lg.g * frame;
  Mat K(m, m);
  for (Eigen::Index b = 0; b < m; ++b) {
    const Vec rb = lg.jacobi_operator(frame.col(b), v);
    for (Eigen::Index a = 0; a < m; ++a) K(a, b) = gE.col(a).dot(rb);
  }
  return K;
}

inline CurvatureOperator curvature_operator(const MetricChart& c, const Vec& x, const Vec& v) {
  const LocalGeometry lg = local_geometry(c, x, true);
  const double len = norm(lg.g, v);
  require(std::abs(len - 1.0) <= 1e-8, ErrorKind::parameter,
          "curvature_operator: direction is not unit length (|v| = " + std::to_string(len) + ")");
  CurvatureOperator op;
  op.basepoint = x;
  op.direction = v;
  op.basis = perp_frame(lg.g, v);
  op.matrix = jacobi_matrix(lg, v, op.basis);
  return op;
}

/// Sectional curvature of span{v, w}.
inline double sectional(const MetricChart& c, const Vec& x, const Vec& v, const Vec& w) {
  const LocalGeometry lg = local_geometry(c, x, true);
  const double vv = inner(lg.g, v, v), ww = inner(lg.g, w, w), vw = inner(lg.g, v, w);
  const double area2 = vv * ww - vw * vw;
  require(area2 > 1e-12 * vv * ww && area2 > 0.0, ErrorKind::degeneracy,
          "sectional: v and w are (nearly) linearly dependent");
  return inner(lg.g, lg.jacobi_operator(w, v), w) / area2;
}

/// Intermediate Ricci curvature: minimum over orthonormal k-frames in v-perp of
/// the sectional curvature sum, i.e. the sum of the k smallest eigenvalues of
/// the curvature operator.
inline double ric_k(const Mat& curvature_matrix, int k) {
  require(k >= 1 && k <= curvature_matrix.rows(), ErrorKind::parameter,
          "ric_k: k must lie in [1, n-1]");
  return ky_fan_min(curvature_matrix, k);
}

inline double ric_k(const MetricChart& c, const Vec& x, const Vec& v, int k) {
  require(k >= 1 && k <= c.dim - 1, ErrorKind::parameter, "ric_k: k must lie in [1, n-1]");
  return ric_k(curvature_operator(c, x, v).matrix, k);
}

}  // namespace curvlab

#endif  // CURVLAB_MANIFOLD_HPP
