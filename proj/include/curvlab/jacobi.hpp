#ifndef CURVLAB_JACOBI_HPP
#define CURVLAB_JACOBI_HPP

#include <cmath>
#include <complex>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "curvlab/geodesic.hpp"
#include "curvlab/patch.hpp"

namespace curvlab {

using PathPtr = std::shared_ptr<const GeodesicPath>;

inline PathPtr share(GeodesicPath p) { return std::make_shared<const GeodesicPath>(std::move(p)); }

/// A normal Jacobi field in parallel-frame components, sampled on the path grid.
struct JacobiField {
  PathPtr path;
  Vec J0, Jp0;
  std::vector<Vec> J, Jp;
};

inline JacobiField integrate_jacobi(PathPtr path, const Vec& J0, const Vec& Jp0) {
  require(path->options.jacobi, ErrorKind::precondition, "integrate_jacobi: path carries no Jacobi flow");
  const int m = path->codim();
  require(J0.size() == m && Jp0.size() == m, ErrorKind::parameter, "integrate_jacobi: expected n-1 components");
  JacobiField f;
  f.path = path;
  f.J0 = J0;
  f.Jp0 = Jp0;
  Vec init(2 * m);
  init << J0, Jp0;
  for (const auto& s : path->samples) {
    const Vec y = s.phi * init;
    f.J.push_back(y.head(m));
    f.Jp.push_back(y.tail(m));
  }
  return f;
}

/// omega(J1, J2) = <J1', J2> - <J1, J2'>; frame components are orthonormal.
inline double symplectic_form(const Vec& J1, const Vec& J1p, const Vec& J2, const Vec& J2p) {
  return J1p.dot(J2) - J1.dot(J2p);
}

inline double symplectic_form(const JacobiField& a, const JacobiField& b, size_t sample) {
  return symplectic_form(a.J[sample], a.Jp[sample], b.J[sample], b.Jp[sample]);
}

/// A Lagrangian family of n-1 normal Jacobi fields, stored through its initial
/// data B0 = (J(0); J'(0)) (2(n-1) x (n-1)); values at t are Phi(t) B0.
struct LagrangianFamily {
  PathPtr path;
  Mat initial;
  std::string mode;  // "point" or "submanifold"
  std::string source;
  int tangent_dim = 0;  // dim N for submanifold families
  Mat shape;            // shape operator used (tangent_dim x tangent_dim), in the patch tangent frame
  Mat tangent_components;  // (n-1) x tangent_dim: frame components of the patch tangent frame at t = 0

  int dim() const { return static_cast<int>(initial.cols()); }

  /// (J(t), J'(t)) as (n-1) x (n-1) matrices whose columns are the basis fields.
  std::pair<Mat, Mat> values(const PathSample& s) const {
    const int m = dim();
    const Mat y = s.phi * initial;
    return {y.topRows(m), y.bottomRows(m)};
  }
  std::pair<Mat, Mat> values_at(double t) const { return values(path->state_at(t)); }

  JacobiField field(const Vec& c) const {
    const int m = dim();
    return integrate_jacobi(path, initial.topRows(m) * c, initial.bottomRows(m) * c);
  }
};

inline LagrangianFamily lagrangian_from_point(PathPtr path) {
  require(path->options.jacobi, ErrorKind::precondition, "lagrangian_from_point: path carries no Jacobi flow");
  const int m = path->codim();
  LagrangianFamily L;
  L.path = std::move(path);
  L.initial = Mat::Zero(2 * m, m);
  L.initial.bottomRows(m) = Mat::Identity(m, m);
  L.mode = "point";
  L.tangent_components = Mat(m, 0);
  L.shape = Mat(0, 0);
  return L;
}

/// Lambda_N: fields with J(0) tangent to N and tangential part of J'(0) equal to
/// S_{gamma'(0)} J(0). Basis: one field per tangent frame vector, plus fields with
/// J(0) = 0 and J'(0) running through the normals of N orthogonal to gamma'(0).
inline LagrangianFamily lagrangian_from_submanifold(PathPtr path, const SubmanifoldPatch& N, const Vec& u) {
  require(path->options.jacobi, ErrorKind::precondition, "lagrangian_from_submanifold: path carries no Jacobi flow");
  const PatchFrame pf = patch_frame(N, u);
  const PathSample& s0 = path->front();
  require((pf.x - s0.x).norm() <= 1e-8 * std::max(1.0, pf.x.norm()), ErrorKind::precondition,
          "lagrangian_from_submanifold: path does not start on " + N.name);
  if (N.dim_sub > 0)
    require(tangent_components(pf, s0.v).cwiseAbs().maxCoeff() <= 1e-8, ErrorKind::precondition,
            "lagrangian_from_submanifold: initial velocity is not normal to " + N.name);
  if (N.dim_sub == 0) {
    LagrangianFamily L = lagrangian_from_point(std::move(path));
    L.source = N.name;
    return L;
  }
  const int m = path->codim();
  const int l = N.dim_sub;
  const ShapeOperator S = shape_operator(N, pf, s0.v);
  const Mat Tc = s0.frame.transpose() * pf.g * pf.tangent_frame;  // m x l, orthonormal columns
  const Mat U = orthogonal_complement(Tc, m);                      // m x (m - l)
  LagrangianFamily L;
  L.path = std::move(path);
  L.initial = Mat::Zero(2 * m, m);
  L.initial.topLeftCorner(m, l) = Tc;
  L.initial.bottomLeftCorner(m, l) = Tc * S.matrix;
  L.initial.bottomRightCorner(m, m - l) = U;
  L.mode = "submanifold";
  L.source = N.name;
  L.tangent_dim = l;
  L.shape = S.matrix;
  L.tangent_components = Tc;
  return L;
}

/// Largest |omega(J_a, J_b)| over basis pairs and path samples.
inline double omega_defect(const LagrangianFamily& L) {
  double worst = 0.0;
  for (const auto& s : L.path->samples) {
    const auto [J, Jp] = L.values(s);
    const Mat w = Jp.transpose() * J - J.transpose() * Jp;
    worst = std::max(worst, w.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Singular times
// ---------------------------------------------------------------------------

/// A time t > 0 where some field of the family vanishes.
struct SingularTimeRecord {
  double t = 0.0;
  int multiplicity = 0;      // eigenvalue-crossing count
  int svd_multiplicity = 0;  // singular values of J(t) below threshold * largest
  bool confident = true;     // the two multiplicities agree
  bool at_endpoint = false;  // within the endpoint slack of the scanned interval end
  Mat kernel;                // (n-1) x multiplicity, coefficient vectors of the vanishing fields
  double gap = 0.0;          // smallest singular value ratio kept above threshold
};

struct SingularOptions {
  double rel_threshold = 1e-6;
  double bisect_tol = 1e-8;
  double end_slack = 1e-6;
};

namespace detail {

// Eigenphases of W = (J - iJ')(J + iJ')^{-1}. W is unitary; its eigenvalue -1
// occurs exactly on ker J with the same multiplicity, and eigenphases always
// cross pi counterclockwise, so crossings count singular times with multiplicity.
struct PhaseState {
  double t = 0.0;
  double sum = 0.0;
  double arg_d = 0.0;  // arg det(J + iJ')
};

inline PhaseState phase_state(double t, const Mat& J, const Mat& Jp) {
  using C = std::complex<double>;
  const Eigen::MatrixXcd Z = J.cast<C>() + C(0.0, 1.0) * Jp.cast<C>();
  const Eigen::MatrixXcd Zc = J.cast<C>() - C(0.0, 1.0) * Jp.cast<C>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Z);
  const Eigen::MatrixXcd W = lu.solve(Zc);  // Z^{-1} Zc, similar to Zc Z^{-1}
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(W, false);
  PhaseState ps;
  ps.t = t;
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    double ph = std::arg(es.eigenvalues()(i));
    if (std::abs(std::abs(ph) - kPi) < 1e-9) ph = -kPi;  // exactly singular: count as already crossed
    ps.sum += ph;
  }
  ps.arg_d = std::arg(lu.determinant());
  return ps;
}

inline double wrap_pi(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

inline int crossings(const PhaseState& a, const PhaseState& b) {
  const double delta = wrap_pi(-2.0 * (b.arg_d - a.arg_d));
  return static_cast<int>(std::lround((delta - (b.sum - a.sum)) / (2.0 * kPi)));
}

}  // namespace detail

inline detail::PhaseState phase_at(const LagrangianFamily& L, double t) {
  const auto [J, Jp] = L.values_at(t);
  return detail::phase_state(t, J, Jp);
}

/// Singular times of the family in (a, b], refined by bisection, with multiplicity
/// and kernels. Times up to b + end_slack are included and flagged as endpoint hits.
inline std::vector<SingularTimeRecord> singular_times(const LagrangianFamily& L, double a, double b,
                                                      const SingularOptions& opt = {}) {
  const GeodesicPath& P = *L.path;
  require(a >= 0.0 && b > a, ErrorKind::parameter, "singular_times: need 0 <= a < b");
  const double reach = P.truncated ? P.t_max : P.t_max + 2.0 * P.step;
  require(b <= reach + 1e-12, ErrorKind::parameter, "singular_times: interval exceeds the integrated path");
  const double end = std::min(b + opt.end_slack, reach);

  std::vector<SingularTimeRecord> out;
  auto record = [&](double lo, double hi, int mult) {
    const double t = 0.5 * (lo + hi);
    const auto [J, Jp] = L.values_at(t);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    // Reference size: the largest singular value of the stacked data (J; J'), so that
    // a family vanishing entirely at t is still measured against its own scale.
    Mat stacked(2 * J.rows(), J.cols());
    stacked << J, Jp;
    const double ref = Eigen::JacobiSVD<Mat>(stacked).singularValues()(0);
    int small = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) < opt.rel_threshold * ref) ++small;
    SingularTimeRecord r;
    r.t = t;
    r.multiplicity = mult;
    r.svd_multiplicity = small;
    r.confident = (small == mult);
    r.at_endpoint = std::abs(t - b) <= opt.end_slack;
    r.kernel = svd.matrixV().rightCols(mult);
    const Eigen::Index keep = sv.size() - mult;
    r.gap = keep > 0 ? sv(keep - 1) / ref : 0.0;
    out.push_back(std::move(r));
  };

  auto scan_step = [&](const detail::PhaseState& pa, const detail::PhaseState& pb) {
    const int total = detail::crossings(pa, pb);
    int found = 0;
    while (found < total) {
      double lo = pa.t, hi = pb.t;
      while (hi - lo > opt.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (detail::crossings(pa, phase_at(L, mid)) > found)
          hi = mid;
        else
          lo = mid;
      }
      const int before = lo == pa.t ? 0 : detail::crossings(pa, phase_at(L, lo));
      const int after = hi == pb.t ? total : detail::crossings(pa, phase_at(L, hi));
      const int mult = std::max(1, after - std::max(before, found));
      record(lo, hi, mult);
      found += mult;
    }
  };

  detail::PhaseState prev = phase_at(L, a);
  for (const auto& s : P.samples) {
    if (s.t <= a) continue;
    if (s.t >= end) break;
    const auto [J, Jp] = L.values(s);
    const detail::PhaseState cur = detail::phase_state(s.t, J, Jp);
    scan_step(prev, cur);
    prev = cur;
  }
  scan_step(prev, phase_at(L, end));
  return out;
}

/// Orthonormal basis (in coefficient space) of the span of all kernels: the
/// minimal full-index subspace K on the scanned interval.
inline Mat full_index_space(const std::vector<SingularTimeRecord>& records, int m, double rel_thr = 1e-6) {
  int cols = 0;
  for (const auto& r : records) cols += static_cast<int>(r.kernel.cols());
  if (cols == 0) return Mat(m, 0);
  Mat all(m, cols);
  int c = 0;
  for (const auto& r : records) {
    all.middleCols(c, r.kernel.cols()) = r.kernel;
    c += static_cast<int>(r.kernel.cols());
  }
  return column_span(all, rel_thr);
}

inline Mat full_index_space(const LagrangianFamily& L, double a, double b, const SingularOptions& opt = {}) {
  return full_index_space(singular_times(L, a, b, opt), L.dim(), opt.rel_threshold);
}

/// First singular time in (0, horizon], or nullopt.
inline std::optional<SingularTimeRecord> first_singular_time(const LagrangianFamily& L, double horizon,
                                                             const SingularOptions& opt = {}) {
  const auto recs = singular_times(L, 0.0, horizon, opt);
  if (recs.empty()) return std::nullopt;
  return recs.front();
}

// ---------------------------------------------------------------------------
// Evaluation rule and Riccati operator
// ---------------------------------------------------------------------------

/// V(t) = {J(t) : J in V} + {J'(t) : J in V, J(t) = 0} for the subfamily spanned by
/// the coefficient columns of C. Returns an orthonormal basis in frame components.
inline Mat evaluation_space(const Mat& J, const Mat& Jp, const Mat& C, double rel_thr = 1e-6) {
  const Eigen::Index m = J.rows();
  if (C.cols() == 0) return Mat(m, 0);
  const Mat A = J * C;
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  // Scale the threshold by the size of the fields (their initial data), not by A,
  // so that a fully vanishing subfamily is recognised.
  const double scale = std::max((J * C).norm(), (Jp * C).norm()) / std::sqrt(static_cast<double>(C.cols()));
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_thr * scale) ++r;
  const Mat ker = svd.matrixV().rightCols(C.cols() - r);
  Mat gen(m, r + ker.cols());
  gen.leftCols(r) = A * svd.matrixV().leftCols(r);
  gen.rightCols(ker.cols()) = Jp * C * ker;
  return column_span(gen, 1e-9);
}

struct RiccatiOperator {
  double t = 0.0;
  Mat basis;   // (n-1) x d: orthonormal frame components spanning K(t)-perp
  Mat matrix;  // d x d, symmetric part
  double asymmetry = 0.0;
  bool singular = false;  // some field of the family vanishes at t
};

/// Riccati operator on K(t)-perp, where K is given by coefficient columns (the
/// full-index space). With an empty K the kernel of J(t) is used, which gives the
/// whole normal space at nonsingular times.
inline RiccatiOperator riccati(const LagrangianFamily& L, double t, const Mat* K = nullptr, double rel_thr = 1e-6) {
  const auto [J, Jp] = L.values_at(t);
  const int m = L.dim();
  Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_thr * std::max(sv(0), Jp.norm() / std::sqrt(static_cast<double>(m)))) ++rank;
  RiccatiOperator R;
  R.t = t;
  R.singular = rank < m;
  Mat Kt;
  if (K && K->cols() > 0) {
    Kt = evaluation_space(J, Jp, *K, rel_thr);
  } else {
    const Mat ker = svd.matrixV().rightCols(m - rank);
    Kt = column_span(Jp * ker, 1e-9);
  }
  R.basis = orthogonal_complement(Kt, m);
  // S v = J'(t) c for any c with J(t) c = v; use the minimum-norm solution.
  Mat pinv = Mat::Zero(m, m);
  for (int i = 0; i < rank; ++i) pinv += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() / sv(i);
  const Mat S = R.basis.transpose() * Jp * pinv * R.basis;
  R.asymmetry = curvlab::asymmetry(S);
  R.matrix = 0.5 * (S + S.transpose());
  return R;
}

/// S_t v for v in K(t)-perp; throws ill_defined when v has a component along
/// K(t) beyond the angle threshold.
inline Vec riccati_apply(const LagrangianFamily& L, double t, const Vec& v, const Mat* K = nullptr,
                         double angle_thr = 1e-6) {
  const RiccatiOperator R = riccati(L, t, K);
  const Vec inside = R.basis * (R.basis.transpose() * v);
  const double vn = v.norm();
  if (vn > 0.0 && (v - inside).norm() > angle_thr * vn) {
    std::ostringstream os;
    os << "Riccati operator is not defined on this vector at t = " << t << " (it meets K(t))";
    fail(ErrorKind::ill_defined, os.str());
  }
  return R.basis * (R.matrix * (R.basis.transpose() * v));
}

/// Full matrix J' J^{-1} at a nonsingular time.
inline Mat riccati_full(const LagrangianFamily& L, double t) {
  const auto [J, Jp] = L.values_at(t);
  const Eigen::FullPivLU<Mat> lu(J);
  require(lu.rank() == J.rows(), ErrorKind::ill_defined, "riccati_full: family is singular at t");
  const Mat S = lu.solve(Jp.transpose()).transpose();  // Jp J^{-1}
  return S;
}

/// Curvature matrix R(., gamma')gamma' in the parallel frame at t.
inline Mat curvature_along(const GeodesicPath& P, double t) {
  const PathSample s = P.state_at(t);
  const LocalGeometry lg = local_geometry(*P.chart, s.x, true);
  const Mat K = jacobi_matrix(lg, s.v, s.frame);
  return 0.5 * (K + K.transpose());
}

/// CSV rows "t,trace,eig_1,...,eig_m" of the Riccati operator at the path samples
/// (nonsingular samples only).
inline std::string riccati_csv(const LagrangianFamily& L, double t0, double t1, double dt) {
  std::ostringstream os;
  os.precision(12);
  os << "t,trace";
  for (int i = 0; i < L.dim(); ++i) os << ",eig" << i + 1;
  os << "\n";
  for (double t = t0; t <= t1 + 1e-12; t += dt) {
    const RiccatiOperator R = riccati(L, t);
    if (R.singular) continue;
    const Vec ev = sym_eig(R.matrix).values;
    os << t << "," << R.matrix.trace();
    for (Eigen::Index i = 0; i < ev.size(); ++i) os << "," << ev(i);
    os << "\n";
  }
  return os.str();
}

}  // namespace curvlab

#endif  // CURVLAB_JACOBI_HPP
