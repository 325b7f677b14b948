#ifndef CURVLAB_INDEX_HPP
#define CURVLAB_INDEX_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <string>
#include <vector>

#include "curvlab/geodesic.hpp"
#include "curvlab/jacobi.hpp"
#include "curvlab/patch.hpp"

namespace curvlab {

struct IndexOptions {
  double rel_threshold = 1e-6;   // kernels and intersections: relative singular-value threshold
  double zero_band = 1e-6;       // eigenvalues within this fraction of the spectral scale count as zero
  int oracle_subdivisions = 8;   // starting subdivision count for the broken-Jacobi oracle
  bool with_oracle = true;
  SingularOptions singular;
};

// ---------------------------------------------------------------------------
// Endpoint index
// ---------------------------------------------------------------------------

struct EndpointIndex {
  int index = 0;             // conjugate points in (0, b) with multiplicity
  bool degenerate = false;   // b itself is conjugate
  int endpoint_kernel = 0;   // multiplicity of b when degenerate
  std::vector<SingularTimeRecord> conjugate;
};

inline EndpointIndex index_endpoint(PathPtr path, const IndexOptions& opt = {}) {
  require(!path->truncated, ErrorKind::precondition, "index_endpoint: path left the chart");
  const double b = path->t_max;
  const LagrangianFamily L = lagrangian_from_point(path);
  EndpointIndex out;
  out.conjugate = singular_times(L, 0.0, b, opt.singular);
  for (const auto& r : out.conjugate) {
    if (r.at_endpoint) {
      out.degenerate = true;
      out.endpoint_kernel += r.multiplicity;
    } else {
      out.index += r.multiplicity;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Endmanifold data shared by the A-form, the formula and the oracle
// ---------------------------------------------------------------------------

struct EndGeometry {
  Mat J, Jp;       // Lambda_N at b (frame components, columns = basis fields)
  Mat Q0;          // m x l: T_pN in frame components at 0
  Mat Qb;          // m x l~: T Ntilde in frame components at b
  Mat S0;          // l x l: shape operator of N for gamma'(0), tangent frame
  Mat Sb;          // l~ x l~: shape operator of Ntilde for gamma'(b), tangent frame
  double scale = 1.0;  // largest singular value of (J; J')
};

namespace detail {

inline EndGeometry end_geometry(const LagrangianFamily& L, const SubmanifoldPatch& N, const Vec& u,
                                const SubmanifoldPatch& Nt, const Vec& ut) {
  const GeodesicPath& P = *L.path;
  const PathSample& s0 = P.front();
  const PathSample& sb = P.back();
  EndGeometry e;
  std::tie(e.J, e.Jp) = L.values(sb);
  Mat stacked(2 * e.J.rows(), e.J.cols());
  stacked << e.J, e.Jp;
  e.scale = Eigen::JacobiSVD<Mat>(stacked).singularValues()(0);

  const PatchFrame p0 = patch_frame(N, u);
  e.Q0 = s0.frame.transpose() * p0.g * p0.tangent_frame;
  e.S0 = N.dim_sub > 0 ? shape_operator(N, p0, s0.v).matrix : Mat(0, 0);

  const PatchFrame pb = patch_frame(Nt, ut);
  require((pb.x - sb.x).norm() <= 1e-6 * std::max(1.0, pb.x.norm()), ErrorKind::precondition,
          "index: path does not end on " + Nt.name);
  if (Nt.dim_sub > 0) {
    require(tangent_components(pb, sb.v).cwiseAbs().maxCoeff() <= 1e-6, ErrorKind::precondition,
            "index: path does not meet " + Nt.name + " orthogonally");
    // Ntilde's shape operator needs an exactly normal unit vector; drop the tangential residue.
    Vec nb = sb.v - pb.tangent_frame * tangent_components(pb, sb.v);
    nb /= norm(pb.g, nb);
    e.Sb = shape_operator(Nt, pb, nb).matrix;
  } else {
    e.Sb = Mat(0, 0);
  }
  e.Qb = sb.frame.transpose() * pb.g * pb.tangent_frame;
  return e;
}

/// Counts of eigenvalues below -band, within the band, and above it.
struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
  double band = 0.0;
  double smallest_abs = 0.0;  // smallest |eigenvalue|
  double gap = 0.0;           // smallest |eigenvalue| outside the band, relative to the scale
};

inline Inertia inertia(const Mat& h, double rel_band) {
  Inertia in;
  if (h.rows() == 0) return in;
  const Vec ev = sym_eig(h).values;
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  in.band = rel_band * scale;
  in.smallest_abs = ev.cwiseAbs().minCoeff();
  double outside = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -in.band)
      ++in.negative;
    else if (ev(i) > in.band)
      ++in.positive;
    else
      ++in.zero;
    if (std::abs(ev(i)) > in.band) outside = std::min(outside, std::abs(ev(i)));
  }
  in.gap = std::isfinite(outside) ? outside / scale : 0.0;
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// A-form
// ---------------------------------------------------------------------------

struct AForm {
  Mat basis;   // coefficient columns spanning Lambda_{N,Ntilde}
  Mat matrix;  // A(J_i, J_j), symmetrized
  double asymmetry = 0.0;
  int basis_dim = 0;
  double threshold = 0.0;  // singular-value threshold used to extract the basis
  double gap = 0.0;        // first retained singular value of the constraint, relative
};

inline AForm a_form(const EndGeometry& e, double rel_thr = 1e-6) {
  const Eigen::Index m = e.J.rows();
  AForm A;
  // J(b) c tangent to Ntilde  <=>  (I - Qb Qb^T) J(b) c = 0.
  const Mat perp = Mat::Identity(m, m) - e.Qb * e.Qb.transpose();
  const Mat C = perp * e.J;
  A.threshold = rel_thr * e.scale;
  A.basis = null_space(C, rel_thr, e.scale);
  A.basis_dim = static_cast<int>(A.basis.cols());
  {
    const Vec sv = Eigen::JacobiSVD<Mat>(C).singularValues();
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > A.threshold) g = std::min(g, sv(i));
    A.gap = std::isfinite(g) ? g / e.scale : 0.0;
  }
  const Mat Jb = e.J * A.basis, Jpb = e.Jp * A.basis;
  // S_{gamma'(b)} acts on the tangential part of J(b).
  const Mat SJ = e.Qb * e.Sb * e.Qb.transpose() * Jb;
  const Mat M = (Jpb - SJ).transpose() * Jb;  // M(i, j) = A(J_i, J_j)
  A.asymmetry = asymmetry(M);
  A.matrix = 0.5 * (M + M.transpose());
  return A;
}

inline AForm a_form(PathPtr path, const SubmanifoldPatch& N, const Vec& u, const SubmanifoldPatch& Nt,
                    const Vec& ut, double rel_thr = 1e-6) {
  const LagrangianFamily L = lagrangian_from_submanifold(path, N, u);
  return a_form(detail::end_geometry(L, N, u, Nt, ut), rel_thr);
}

// ---------------------------------------------------------------------------
// Broken-Jacobi second-variation oracle
// ---------------------------------------------------------------------------

struct OracleResult {
  int index = 0;
  int nullity = 0;
  bool degenerate = false;
  int subdivisions = 0;
  int index_refined = 0;  // the same count with twice the subdivisions
  bool stable = true;
  double band = 0.0;
  double smallest_abs = 0.0;
  double gap = 0.0;
};

namespace detail {

/// Matrix of the second variation on broken Jacobi fields with `pieces` equal
/// subintervals; unknowns are (V(0) in T_pN, interior break values, V(b) in T Ntilde).
/// Returns an empty matrix when a subinterval is too long for the two-point problem.
inline Mat broken_jacobi_form(const GeodesicPath& P, const EndGeometry& e, int pieces) {
  const int m = P.codim();
  const int l = static_cast<int>(e.Q0.cols()), lt = static_cast<int>(e.Qb.cols());
  const int D = l + (pieces - 1) * m + lt;
  const double b = P.t_max, dt = b / pieces;
  auto node = [&](int i) {  // m x D: value at break i in terms of the unknowns
    Mat Pm = Mat::Zero(m, D);
    if (i == 0)
      Pm.leftCols(l) = e.Q0;
    else if (i == pieces)
      Pm.rightCols(lt) = e.Qb;
    else
      Pm.middleCols(l + (i - 1) * m, m) = Mat::Identity(m, m);
    return Pm;
  };
  Mat H = Mat::Zero(D, D);
  Mat phi_prev = P.front().phi;
  for (int i = 1; i <= pieces; ++i) {
    const Mat phi = (i == pieces) ? P.back().phi : P.state_at(i * dt).phi;
    const Mat psi = phi * phi_prev.partialPivLu().inverse();
    phi_prev = phi;
    const Mat A11 = psi.topLeftCorner(m, m), A12 = psi.topRightCorner(m, m);
    const Mat A21 = psi.bottomLeftCorner(m, m), A22 = psi.bottomRightCorner(m, m);
    const Vec sv = Eigen::JacobiSVD<Mat>(A12).singularValues();
    if (sv(m - 1) < 0.25 * dt) return Mat();
    const Mat M = A12.partialPivLu().inverse();
    // energy = <y'(c), y(c)> - <y'(a), y(a)> for the Jacobi field with values y(a), y(c)
    Mat h(2 * m, 2 * m);
    h.topLeftCorner(m, m) = M * A11;
    h.topRightCorner(m, m) = -M;
    h.bottomLeftCorner(m, m) = A21 - A22 * M * A11;
    h.bottomRightCorner(m, m) = A22 * M;
    Mat sel(2 * m, D);
    sel << node(i - 1), node(i);
    H += sel.transpose() * (0.5 * (h + h.transpose())) * sel;
  }
  // Boundary terms +<S_0 V, V>(0) - <S_b V, V>(b).
  if (l > 0) H.topLeftCorner(l, l) += e.S0;
  if (lt > 0) H.bottomRightCorner(lt, lt) -= e.Sb;
  return 0.5 * (H + H.transpose());
}

}  // namespace detail

inline OracleResult index_form_oracle(const LagrangianFamily& L, const EndGeometry& e, const IndexOptions& opt = {}) {
  const GeodesicPath& P = *L.path;
  int pieces = std::max({2, opt.oracle_subdivisions, static_cast<int>(std::ceil(P.t_max / 0.5))});
  Mat H = detail::broken_jacobi_form(P, e, pieces);
  for (int tries = 0; tries < 6 && H.size() == 0; ++tries) H = detail::broken_jacobi_form(P, e, pieces *= 2);
  require(H.size() > 0, ErrorKind::degeneracy,
          "index_form_oracle: could not subdivide the path into conjugate-free pieces");
  OracleResult out;
  out.subdivisions = pieces;
  const auto in = detail::inertia(H, opt.zero_band);
  out.index = in.negative;
  out.nullity = in.zero;
  out.degenerate = in.zero > 0;
  out.band = in.band;
  out.smallest_abs = in.smallest_abs;
  out.gap = in.gap;
  const Mat H2 = detail::broken_jacobi_form(P, e, 2 * pieces);
  out.index_refined = detail::inertia(H2, opt.zero_band).negative;
  out.stable = out.index_refined == out.index;
  return out;
}

inline OracleResult index_form_oracle(PathPtr path, const SubmanifoldPatch& N, const Vec& u,
                                      const SubmanifoldPatch& Nt, const Vec& ut, const IndexOptions& opt = {}) {
  require(!path->truncated, ErrorKind::precondition, "index_form_oracle: path left the chart");
  const LagrangianFamily L = lagrangian_from_submanifold(path, N, u);
  return index_form_oracle(L, detail::end_geometry(L, N, u, Nt, ut), opt);
}

// ---------------------------------------------------------------------------
// Hingston-Kalish formula
// ---------------------------------------------------------------------------

struct IndexReport {
  double b = 0.0;
  int index_A = 0;
  int a_nullity = 0;
  int a_basis_dim = 0;
  int focal_count = 0;       // (0, b], with multiplicity
  int focal_open = 0;        // (0, b)
  int endpoint_kernel = 0;   // dim K_b, from the singular values of J(b)
  int endpoint_crossings = 0;  // multiplicity of b from the phase count
  int correction = 0;        // dim(K_b(b) cap T Ntilde^perp)
  int m_T = 0;               // dim Proj_Ntilde K_b(b)
  int total_hk = 0;
  int total_origin = 0;      // Index A + focal (0, b) + m_T
  bool b_is_focal = false;
  bool identity_holds = true;
  bool has_oracle = false;
  OracleResult oracle;
  int total_oracle = 0;
  // thresholds and gaps
  double rel_threshold = 0.0;
  double zero_band = 0.0;
  double kernel_gap = 0.0;   // first retained singular value of J(b), relative
  double a_gap = 0.0;
  double a_asymmetry = 0.0;
  std::vector<double> focal_times;
};

inline IndexReport index_endmanifold_hk(PathPtr path, const SubmanifoldPatch& N, const Vec& u,
                                        const SubmanifoldPatch& Nt, const Vec& ut, const IndexOptions& opt = {}) {
  require(!path->truncated, ErrorKind::precondition, "index_endmanifold_hk: path left the chart");
  const LagrangianFamily L = lagrangian_from_submanifold(path, N, u);
  const EndGeometry e = detail::end_geometry(L, N, u, Nt, ut);
  IndexReport r;
  r.b = path->t_max;
  r.rel_threshold = opt.rel_threshold;
  r.zero_band = opt.zero_band;

  const AForm A = a_form(e, opt.rel_threshold);
  const auto ai = detail::inertia(A.matrix, opt.zero_band);
  r.index_A = ai.negative;
  r.a_nullity = ai.zero;
  r.a_basis_dim = A.basis_dim;
  r.a_gap = A.gap;
  r.a_asymmetry = A.asymmetry;

  for (const auto& rec : singular_times(L, 0.0, r.b, opt.singular)) {
    r.focal_times.push_back(rec.t);
    r.focal_count += rec.multiplicity;
    if (rec.at_endpoint)
      r.endpoint_crossings += rec.multiplicity;
    else
      r.focal_open += rec.multiplicity;
  }

  // K_b and K_b(b) = {J'(b) : J(b) = 0}.
  const Mat ker = null_space(e.J, opt.rel_threshold, e.scale);
  r.endpoint_kernel = static_cast<int>(ker.cols());
  {
    const Vec sv = Eigen::JacobiSVD<Mat>(e.J).singularValues();
    const Eigen::Index keep = sv.size() - ker.cols();
    r.kernel_gap = keep > 0 ? sv(keep - 1) / e.scale : 0.0;
  }
  r.b_is_focal = r.endpoint_kernel > 0 || r.endpoint_crossings > 0;
  if (r.endpoint_kernel > 0) {
    const Mat Kbb = column_span(e.Jp * ker, 1e-9);
    // Kbb and Qb have orthonormal columns, so singular values of the projection lie in [0, 1].
    if (e.Qb.cols() > 0) {
      const Vec sv = Eigen::JacobiSVD<Mat>(e.Qb.transpose() * Kbb).singularValues();
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > opt.rel_threshold) ++r.m_T;
    }
    r.correction = static_cast<int>(Kbb.cols()) - r.m_T;
  }
  r.total_hk = r.index_A + r.focal_count - r.correction;
  r.total_origin = r.index_A + r.focal_open + r.m_T;
  r.identity_holds = r.total_hk == r.total_origin;
  if (opt.with_oracle) {
    r.oracle = index_form_oracle(L, e, opt);
    r.has_oracle = true;
    r.total_oracle = r.oracle.index;
  }
  return r;
}

}  // namespace curvlab

#endif  // CURVLAB_INDEX_HPP
