#ifndef CURVLAB_LIFTING_HPP
#define CURVLAB_LIFTING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/parallel.hpp"
#include "curvlab/submanifold.hpp"

namespace curvlab {

/// A normal vector of N: base parameter u and components w in the normal frame at u.
struct NormalBundlePoint {
  Vec u;
  Vec w;
  double norm = 0.0;

  bool on_zero_section(double thr = 1e-8) const { return norm <= thr; }
};

struct LiftOptions {
  double tol = 1e-11;        // Newton residual, chart coordinates
  int max_iterations = 40;
  int max_halvings = 10;     // recursive step halving before declaring an obstruction
  double exp_step = 0.01;    // RK4 step of the normal exponential map
  double zero_section = 1e-8;
  double match_tol = 1e-6;   // pasting defect allowed at the half-length split
  double continuity_factor = 5.0;
  int jobs = 1;
};

namespace detail {

inline NormalBundlePoint bundle_point(Vec u, Vec w) {
  NormalBundlePoint p{std::move(u), std::move(w), 0.0};
  p.norm = p.w.norm();
  return p;
}

inline void wrap_params(const SubmanifoldPatch& N, Vec& u) {
  for (int i = 0; i < N.dim_sub; ++i)
    if (N.periodic.size() > static_cast<size_t>(i) && N.periodic[i]) {
      const double lo = N.param_lo[i], per = N.param_hi[i] - N.param_lo[i];
      u(i) = lo + std::fmod(std::fmod(u(i) - lo, per) + per, per);
    }
}

inline Vec param_difference(const SubmanifoldPatch& N, const Vec& a, const Vec& b) {
  Vec d = a - b;
  for (int i = 0; i < N.dim_sub; ++i)
    if (N.periodic.size() > static_cast<size_t>(i) && N.periodic[i]) {
      const double per = N.param_hi[i] - N.param_lo[i];
      d(i) -= per * std::round(d(i) / per);
    }
  return d;
}

/// Normal vector of a bundle point in chart components.
inline Vec normal_vector(const SubmanifoldPatch& N, const NormalBundlePoint& p) {
  return patch_frame(N, p.u).normal_frame * p.w;
}

/// Change of the normal vector between two nearby bundle points, measured in the
/// metric at the first base point. The normal frame of a patch may flip sign
/// between parameters, so frame components are not compared directly.
inline double normal_change(const SubmanifoldPatch& N, const NormalBundlePoint& a, const NormalBundlePoint& b) {
  const Mat g = metric_at(*N.ambient, N.point(a.u));
  return norm(g, normal_vector(N, a) - normal_vector(N, b));
}

/// Distance between two bundle points: base displacement measured in the ambient
/// metric plus the change of the normal vector.
inline double bundle_distance(const SubmanifoldPatch& N, const NormalBundlePoint& a, const NormalBundlePoint& b) {
  double base = 0.0;
  if (N.dim_sub > 0) {
    const Vec xa = N.point(a.u);
    base = norm(metric_at(*N.ambient, xa), chart_difference(*N.ambient, N.point(b.u), xa));
  }
  return base + normal_change(N, a, b);
}

inline double chart_step_length(const MetricChart& c, const Vec& a, const Vec& b) {
  return segment_length(c, a, chart_difference(c, b, a), 1);
}

inline double curve_length(const MetricChart& c, const std::vector<Vec>& pts, std::vector<double>* cumulative = nullptr) {
  double L = 0.0;
  if (cumulative) cumulative->assign(1, 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    L += chart_step_length(c, pts[i - 1], pts[i]);
    if (cumulative) cumulative->push_back(L);
  }
  return L;
}

inline int exp_steps(double len, const LiftOptions& opt) {
  return std::max(16, static_cast<int>(std::ceil((len + 0.1) / opt.exp_step)));
}

inline Vec exp_perp(const SubmanifoldPatch& N, const Vec& u, const Vec& w, int steps) {
  const PatchFrame pf = patch_frame(N, u);
  return exp_map(*N.ambient, pf.x, pf.normal_frame * w, steps);
}

/// Orthonormal normal frame at pf.u obtained from `ref` by projecting onto the
/// normal space and symmetric orthonormalization. Smooth in u, and equal to
/// `ref` where `ref` is already an orthonormal normal frame.
inline Mat carried_frame(const PatchFrame& pf, const Mat& ref) {
  Mat q = ref;
  if (pf.tangents.cols() > 0) {
    const Mat gt = pf.g * pf.tangents;
    q -= pf.tangents * (pf.tangents.transpose() * gt).ldlt().solve(gt.transpose() * ref);
  }
  const SymEig e = sym_eig(Mat(q.transpose() * pf.g * q));
  if (e.values.minCoeff() <= 1e-12) fail(ErrorKind::degeneracy, "carried_frame: reference frame degenerates");
  return q * e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

/// Local inverse of the normal exponential map near `guess` by a chord-Newton
/// iteration with backtracking. Returns false when it fails to converge.
inline bool invert_exp(const SubmanifoldPatch& N, const Vec& target, const NormalBundlePoint& guess,
                       const LiftOptions& opt, NormalBundlePoint& out, bool* left_chart = nullptr) {
  const MetricChart& c = *N.ambient;
  const int l = N.dim_sub, n = c.dim;
  const int steps = exp_steps(guess.norm, opt);
  // Normal components are taken in a frame carried from the guess, so the map
  // (u, a) -> exp(frame(u) a) is smooth across sign flips of the patch frame.
  const Mat ref = patch_frame(N, guess.u).normal_frame;
  Vec z(n);
  z << guess.u, guess.w;
  auto residual = [&](const Vec& zz, Vec& r) {
    try {
      const PatchFrame pf = patch_frame(N, zz.head(l));
      r = chart_difference(c, exp_map(c, pf.x, carried_frame(pf, ref) * zz.tail(n - l), steps), target);
      return true;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::domain) {
        if (left_chart) *left_chart = true;
        return false;
      }
      throw;
    }
  };
  // Residuals are measured in the metric at the target, so the tolerance does not
  // depend on where the chart places the point.
  const Mat gt = metric_at(c, target);
  auto size = [&](const Vec& r) { return norm(gt, r); };
  Vec r;
  if (!residual(z, r)) return false;
  Mat Jac(n, n);
  Eigen::PartialPivLU<Mat> lu;
  bool stale = true;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (size(r) <= opt.tol) {
      Vec u = z.head(l);
      const PatchFrame pf = patch_frame(N, u);
      const Vec nu = carried_frame(pf, ref) * z.tail(n - l);
      wrap_params(N, u);
      out = bundle_point(u, pf.normal_frame.transpose() * pf.g * nu);
      return true;
    }
    const bool refreshed = stale;
    if (stale) {
      const double h = 1e-7;
      for (int j = 0; j < n; ++j) {
        Vec zp = z, zm = z, rp, rm;
        zp(j) += h;
        zm(j) -= h;
        if (!residual(zp, rp) || !residual(zm, rm)) return false;
        Jac.col(j) = (rp - rm) / (2 * h);
      }
      const Vec sv = Eigen::JacobiSVD<Mat>(Jac).singularValues();
      if (sv(n - 1) < 1e-9 * std::max(1.0, sv(0))) return false;
      lu.compute(Jac);
      stale = false;
    }
    const Vec dz = -lu.solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 12 && !improved; ++ls, lambda *= 0.5) {
      Vec rz;
      const Vec zn = z + lambda * dz;
      if (residual(zn, rz) && size(rz) < size(r)) {
        z = zn;
        r = rz;
        improved = true;
      }
    }
    if (!improved && refreshed) return false;
    // A chord step that fails, and every fourth step, triggers a fresh Jacobian.
    if (!improved || it % 4 == 3) stale = true;
  }
  return false;
}

/// Lifts source[0..] starting at `start`, halving steps where Newton fails. On
/// failure returns the index of the first sample that could not be lifted.
inline size_t lift_samples(const SubmanifoldPatch& N, const std::vector<Vec>& src, const NormalBundlePoint& start,
                           const LiftOptions& opt, std::vector<NormalBundlePoint>& out, bool* left_chart = nullptr) {
  const MetricChart& c = *N.ambient;
  out.assign(1, start);
  bool exited = false;
  // Halving does not help once the iteration leaves the chart.
  std::function<bool(const NormalBundlePoint&, const Vec&, const Vec&, int, NormalBundlePoint&)> step =
      [&](const NormalBundlePoint& from, const Vec& a, const Vec& d, int depth, NormalBundlePoint& to) {
        if (invert_exp(N, a + d, from, opt, to, &exited)) return true;
        if (exited || depth >= opt.max_halvings) return false;
        NormalBundlePoint mid;
        return step(from, a, 0.5 * d, depth + 1, mid) && step(mid, a + 0.5 * d, 0.5 * d, depth + 1, to);
      };
  if (left_chart) *left_chart = false;
  for (size_t i = 1; i < src.size(); ++i) {
    NormalBundlePoint next;
    if (!step(out.back(), src[i - 1], chart_difference(c, src[i], src[i - 1]), 0, next)) {
      if (left_chart) *left_chart = exited;
      return i;
    }
    out.push_back(next);
  }
  return src.size();
}

/// Parameter u with N(u) = x, by Gauss-Newton from `guess` (or the nearest grid
/// point when no guess is given). Returns the residual distance in `res`.
inline Vec locate_on(const SubmanifoldPatch& N, const Vec& x, const Vec* guess, double& res) {
  const MetricChart& c = *N.ambient;
  const int l = N.dim_sub;
  if (l == 0) {
    res = chart_difference(c, N.point(Vec(0)), x).norm();
    return Vec(0);
  }
  Vec u;
  if (guess) {
    u = *guess;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& w : parameter_grid(N, 24)) {
      const double d = chart_difference(c, N.point(w), x).norm();
      if (d < best) best = d, u = w;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const Vec r = chart_difference(c, N.point(u), x);
    const PatchFrame pf = patch_frame(N, u);
    const Vec du = pf.tangents.colPivHouseholderQr().solve(-r);
    u += du;
    if (du.norm() < 1e-14) break;
  }
  wrap_params(N, u);
  res = chart_difference(c, N.point(u), x).norm();
  return u;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lifting curves
// ---------------------------------------------------------------------------

struct LiftedCurve {
  std::vector<NormalBundlePoint> samples;
  std::vector<Vec> source;
  double source_length = 0.0;
  double max_norm = 0.0;
  double pushforward_defect = 0.0;  // max chart distance between exp(lift) and the source
  double max_jump = 0.0;            // largest bundle distance between consecutive lifted samples
  double jump_bound = 0.0;          // largest per-step bound: factor x step x local amplification
  bool continuous = true;
};

namespace detail {

/// 1 / smallest singular value of the differential of the normal exponential map
/// at p, from the bundle metric (ambient metric on base displacements, Euclidean
/// on normal components) to the ambient metric at the image.
inline double amplification(const SubmanifoldPatch& N, const NormalBundlePoint& p, const LiftOptions& opt) {
  const MetricChart& c = *N.ambient;
  const int l = N.dim_sub, n = c.dim;
  const int steps = exp_steps(p.norm, opt);
  const PatchFrame pf = patch_frame(N, p.u);
  auto image = [&](const Vec& u, const Vec& w) {
    const PatchFrame q = patch_frame(N, u);
    return exp_map(c, q.x, carried_frame(q, pf.normal_frame) * w, steps);
  };
  const Vec x = image(p.u, p.w);
  const double h = 1e-6;
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec up = p.u, um = p.u, wp = p.w, wm = p.w;
    if (j < l) {
      up(j) += h;
      um(j) -= h;
    } else {
      wp(j - l) += h;
      wm(j - l) -= h;
    }
    J.col(j) = chart_difference(c, image(up, wp), image(um, wm)) / (2 * h);
  }
  Mat B = Mat::Identity(n, n);
  if (l > 0) B.topLeftCorner(l, l) = pf.tangents.transpose() * pf.g * pf.tangents;
  const Mat lg = Eigen::LLT<Mat>(metric_at(c, x)).matrixU();
  const Mat lb = Eigen::LLT<Mat>(B).matrixU();
  const Mat M = lg * J * lb.inverse();
  const double smin = Eigen::JacobiSVD<Mat>(M).singularValues()(n - 1);
  return smin > 0.0 ? std::max(1.0, 1.0 / smin) : std::numeric_limits<double>::infinity();
}

inline void finish_lift(const SubmanifoldPatch& N, LiftedCurve& lc, const LiftOptions& opt) {
  const MetricChart& c = *N.ambient;
  lc.continuous = true;
  double amp_prev = 0.0;
  for (size_t i = 0; i < lc.samples.size(); ++i) {
    const auto& p = lc.samples[i];
    lc.max_norm = std::max(lc.max_norm, p.norm);
    const Vec x = exp_perp(N, p.u, p.w, exp_steps(p.norm, opt));
    lc.pushforward_defect = std::max(lc.pushforward_defect, chart_difference(c, x, lc.source[i]).norm());
    const double amp = amplification(N, p, opt);
    if (i > 0) {
      // A jump may exceed the source step by the local amplification of the inverse.
      const double step = chart_step_length(c, lc.source[i - 1], lc.source[i]);
      const double bound = opt.continuity_factor * step * std::max(amp_prev, amp);
      const double jump = bundle_distance(N, lc.samples[i - 1], p);
      lc.max_jump = std::max(lc.max_jump, jump);
      lc.jump_bound = std::max(lc.jump_bound, bound);
      if (jump > bound + 1e-12) lc.continuous = false;
    }
    amp_prev = amp;
  }
}

}  // namespace detail

/// Unique lift of a curve starting on N through the normal exponential map,
/// starting on the zero section over N(u0). `foc` is the focal radius of N; the
/// curve must be shorter.
inline LiftedCurve lift_curve(const SubmanifoldPatch& N, const std::vector<Vec>& alpha, const Vec& u0, double foc,
                              const LiftOptions& opt = {}) {
  require(!alpha.empty(), ErrorKind::parameter, "lift_curve: empty curve");
  const MetricChart& c = *N.ambient;
  require(detail::chart_difference(c, N.point(u0), alpha.front()).norm() <= 1e-7, ErrorKind::precondition,
          "lift_curve: the curve does not start at N(u0)");
  LiftedCurve lc;
  lc.source = alpha;
  lc.source_length = detail::curve_length(c, alpha);
  require(lc.source_length < foc, ErrorKind::precondition, "lift_curve: curve length must be below the focal radius");
  bool left_chart = false;
  const size_t got = detail::lift_samples(N, alpha, detail::bundle_point(u0, Vec::Zero(c.dim - N.dim_sub)), opt,
                                          lc.samples, &left_chart);
  if (got < alpha.size() && left_chart) {
    std::ostringstream os;
    os << "lift_curve: the lift leaves the chart at sample " << got;
    fail(ErrorKind::domain, os.str());
  }
  if (got < alpha.size()) {
    std::ostringstream os;
    os << "lift_curve: inversion of the normal exponential map failed at sample " << got
       << " (the lift left the tube)";
    fail(ErrorKind::obstruction, os.str());
  }
  detail::finish_lift(N, lc, opt);
  return lc;
}

// ---------------------------------------------------------------------------
// Lifting homotopies
// ---------------------------------------------------------------------------

/// Grid H[s][t]: rows are the curves H_s.
using HomotopyGrid = std::vector<std::vector<Vec>>;

struct LiftedHomotopy {
  std::vector<std::vector<NormalBundlePoint>> grid;
  std::vector<double> row_length;
  std::vector<double> half_length;  // h(s)
  std::vector<size_t> split;        // first sample index with arclength >= h(s)
  std::vector<double> match_defect;
  int first_mismatch = -1;          // row index of the first pasting failure, -1 if none
  double boundary_defect = 0.0;     // largest norm over the three sides mapped into N
  double max_norm = 0.0;
  double max_jump = 0.0;
  double jump_bound = 0.0;
  bool continuous = true;
  bool matched = true;
};

namespace detail {

inline void check_rectangular(const HomotopyGrid& H) {
  require(H.size() >= 2 && H.front().size() >= 2, ErrorKind::parameter, "homotopy grid needs at least 2 x 2 samples");
  for (const auto& row : H)
    require(row.size() == H.front().size(), ErrorKind::parameter, "homotopy grid rows differ in length");
}

/// Parameters of the three sides in N: row 0 and both ends of every row.
struct SideParams {
  std::vector<Vec> bottom, left, right;
  double residual = 0.0;
};

inline SideParams locate_sides(const SubmanifoldPatch& N, const HomotopyGrid& H) {
  SideParams sp;
  double r = 0.0;
  Vec u = locate_on(N, H[0][0], nullptr, r);
  sp.residual = r;
  for (const Vec& x : H[0]) {
    u = locate_on(N, x, &u, r);
    sp.residual = std::max(sp.residual, r);
    sp.bottom.push_back(u);
  }
  Vec ul = sp.bottom.front(), ur = sp.bottom.back();
  for (const auto& row : H) {
    ul = locate_on(N, row.front(), &ul, r);
    sp.residual = std::max(sp.residual, r);
    ur = locate_on(N, row.back(), &ur, r);
    sp.residual = std::max(sp.residual, r);
    sp.left.push_back(ul);
    sp.right.push_back(ur);
  }
  return sp;
}

}  // namespace detail

/// Lifts H with the three sides on the zero section by pasting the lifts of the
/// two halves of every row at the half-length point.
inline LiftedHomotopy lift_homotopy(const SubmanifoldPatch& N, const HomotopyGrid& H, double foc,
                                    const LiftOptions& opt = {}) {
  detail::check_rectangular(H);
  const MetricChart& c = *N.ambient;
  const int codim = c.dim - N.dim_sub;
  const size_t ms = H.size(), mt = H.front().size();
  LiftedHomotopy out;
  std::vector<std::vector<double>> cum(ms);
  out.row_length.resize(ms);
  for (size_t s = 0; s < ms; ++s) out.row_length[s] = detail::curve_length(c, H[s], &cum[s]);
  const double longest = *std::max_element(out.row_length.begin(), out.row_length.end());
  require(longest < 2 * foc, ErrorKind::precondition, "lift_homotopy: some row is not shorter than 2 foc_N");
  const detail::SideParams sp = detail::locate_sides(N, H);
  require(sp.residual <= 1e-6, ErrorKind::precondition, "lift_homotopy: the three sides are not mapped into N");

  out.grid.assign(ms, {});
  out.half_length.resize(ms);
  out.split.resize(ms);
  out.match_defect.assign(ms, 0.0);
  std::vector<std::string> errors(ms);
  parallel_for(ms, opt.jobs, [&](size_t s) {
    const double h = 0.5 * out.row_length[s];
    size_t k = 0;
    while (k + 1 < mt && cum[s][k] < h) ++k;
    out.half_length[s] = h;
    out.split[s] = k;
    const std::vector<Vec> left(H[s].begin(), H[s].begin() + static_cast<long>(k) + 1);
    std::vector<Vec> right(H[s].begin() + static_cast<long>(k), H[s].end());
    std::reverse(right.begin(), right.end());
    std::vector<NormalBundlePoint> L, R;
    const size_t gl = detail::lift_samples(N, left, detail::bundle_point(sp.left[s], Vec::Zero(codim)), opt, L);
    const size_t gr = detail::lift_samples(N, right, detail::bundle_point(sp.right[s], Vec::Zero(codim)), opt, R);
    if (gl < left.size() || gr < right.size()) {
      errors[s] = "lift_homotopy: inversion failed on row " + std::to_string(s);
      return;
    }
    std::reverse(R.begin(), R.end());
    const auto& a = L.back();
    const auto& b = R.front();
    out.match_defect[s] = detail::param_difference(N, a.u, b.u).norm() + detail::normal_change(N, a, b);
    std::vector<NormalBundlePoint> row(L.begin(), L.end());
    row.insert(row.end(), R.begin() + 1, R.end());
    out.grid[s] = std::move(row);
  });
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::obstruction, e);

  double max_src = 0.0;
  for (size_t s = 0; s < ms; ++s) {
    if (out.first_mismatch < 0 && out.match_defect[s] > opt.match_tol) out.first_mismatch = static_cast<int>(s);
    for (size_t t = 0; t < mt; ++t) {
      const auto& p = out.grid[s][t];
      out.max_norm = std::max(out.max_norm, p.norm);
      if (s == 0 || t == 0 || t + 1 == mt) out.boundary_defect = std::max(out.boundary_defect, p.norm);
      if (t > 0) {
        max_src = std::max(max_src, detail::chart_step_length(c, H[s][t - 1], H[s][t]));
        out.max_jump = std::max(out.max_jump, detail::bundle_distance(N, out.grid[s][t - 1], p));
      }
      if (s > 0) {
        max_src = std::max(max_src, detail::chart_step_length(c, H[s - 1][t], H[s][t]));
        out.max_jump = std::max(out.max_jump, detail::bundle_distance(N, out.grid[s - 1][t], p));
      }
    }
  }
  out.matched = out.first_mismatch < 0;
  out.jump_bound = opt.continuity_factor * max_src;
  out.continuous = out.max_jump <= out.jump_bound + 1e-12;
  return out;
}

/// CSV rows "s,t,u...,w...,norm" of a lifted grid.
inline std::string lifted_csv(const LiftedHomotopy& L) {
  std::ostringstream os;
  os.precision(12);
  if (L.grid.empty() || L.grid.front().empty()) return "s,t,norm\n";
  const auto& p0 = L.grid.front().front();
  os << "s,t";
  for (Eigen::Index i = 0; i < p0.u.size(); ++i) os << ",u" << i + 1;
  for (Eigen::Index i = 0; i < p0.w.size(); ++i) os << ",w" << i + 1;
  os << ",norm\n";
  for (size_t s = 0; s < L.grid.size(); ++s)
    for (size_t t = 0; t < L.grid[s].size(); ++t) {
      const auto& p = L.grid[s][t];
      os << s << "," << t;
      for (Eigen::Index i = 0; i < p.u.size(); ++i) os << "," << p.u(i);
      for (Eigen::Index i = 0; i < p.w.size(); ++i) os << "," << p.w(i);
      os << "," << p.norm << "\n";
    }
  return os.str();
}

// ---------------------------------------------------------------------------
// Normal chords admit no lift with both ends on the zero section
// ---------------------------------------------------------------------------

struct NoLiftReport {
  double b = 0.0;
  double foc = 0.0;
  bool hypothesis = false;  // b < 2 foc
  bool diagnostic = false;  // hypothesis fails; numbers are shown, nothing is asserted
  double c = 0.0;           // b/2 < c < foc, c <= b
  double norm_at_c = 0.0;
  double lower_bound = 0.0;  // c - (b - c)
  double initial_segment_defect = 0.0;  // max |lift(t) - t nu| on [0, c]
  bool obstructed = false;              // the lift left the tube before b
  double lifted_until = 0.0;
  double end_norm = 0.0;
  bool certified = false;
};

/// Lifts the normal geodesic t -> exp(t nu) from N(u) on [0, b] and checks that
/// its endpoint is off the zero section. `foc` may be infinite.
inline NoLiftReport no_lift_certificate(const SubmanifoldPatch& N, const Vec& u, const Vec& nu, double b, double foc,
                                        const LiftOptions& opt = {}) {
  require(b > 0.0, ErrorKind::parameter, "no_lift_certificate: b must be positive");
  const MetricChart& c = *N.ambient;
  PathOptions po;
  po.frame = false;
  po.jacobi = false;
  const GeodesicPath P = normal_geodesic(N, u, nu, b, 1e-10, po);
  require(!P.truncated, ErrorKind::domain, "no_lift_certificate: the geodesic leaves the chart");
  const PathSample end = P.back();
  double res = 0.0;
  const Vec ub = detail::locate_on(N, end.x, nullptr, res);
  require(res <= 1e-6, ErrorKind::precondition, "no_lift_certificate: the geodesic does not end on N");
  require(detail::orthogonality_defect(N, ub, end.v) <= 1e-6, ErrorKind::precondition,
          "no_lift_certificate: the geodesic is not orthogonal to N at its end");

  NoLiftReport rep;
  rep.b = b;
  rep.foc = foc;
  rep.hypothesis = b < 2 * foc;
  rep.diagnostic = !rep.hypothesis;
  const int count = std::max(64, static_cast<int>(std::ceil(b / 0.02)));
  std::vector<Vec> src;
  std::vector<double> times;
  for (int i = 0; i <= count; ++i) {
    times.push_back(b * i / count);
    src.push_back(P.state_at(times.back()).x);
  }
  std::vector<NormalBundlePoint> lift;
  const size_t got = detail::lift_samples(N, src, detail::bundle_point(u, Vec::Zero(c.dim - N.dim_sub)), opt, lift);
  rep.obstructed = got < src.size();
  rep.lifted_until = times[got - 1];
  rep.end_norm = lift.back().norm;

  const PatchFrame pf = patch_frame(N, u);
  rep.c = rep.hypothesis ? 0.5 * (0.5 * b + std::min(foc, b)) : 0.5 * b;
  for (size_t i = 0; i < lift.size() && times[i] <= rep.c + 1e-12; ++i) {
    rep.initial_segment_defect = std::max(rep.initial_segment_defect, norm(pf.g, detail::normal_vector(N, lift[i]) - times[i] * nu));
    rep.norm_at_c = lift[i].norm;
  }
  rep.lower_bound = 2 * rep.c - b;
  rep.certified = rep.hypothesis && (rep.obstructed || rep.end_norm > opt.zero_section);
  return rep;
}

// ---------------------------------------------------------------------------
// Long homotopy scan
// ---------------------------------------------------------------------------

struct LongHomotopyReport {
  bool applicable = true;
  std::string reason;
  std::vector<double> row_length;
  double max_length = 0.0;
  double two_foc = 0.0;
  double slack = 0.0;  // grid resolution
  bool pass = false;
};

/// Scans a homotopy from a curve in N (row 0) to a normal geodesic chord (last
/// row), with row ends on N, for a row of length >= 2 foc_N.
inline LongHomotopyReport long_homotopy_scan(const SubmanifoldPatch& N, const HomotopyGrid& H, double foc) {
  detail::check_rectangular(H);
  const MetricChart& c = *N.ambient;
  const detail::SideParams sp = detail::locate_sides(N, H);
  require(sp.residual <= 1e-6, ErrorKind::precondition,
          "long_homotopy_scan: row 0 and the row ends must lie in N");
  LongHomotopyReport rep;
  rep.two_foc = 2 * foc;
  const auto& top = H.back();
  const size_t mt = top.size();
  for (const auto& row : H) rep.row_length.push_back(detail::curve_length(c, row));
  rep.max_length = *std::max_element(rep.row_length.begin(), rep.row_length.end());
  for (size_t s = 0; s < H.size(); ++s)
    for (size_t t = 0; t < mt; ++t) {
      if (t > 0) rep.slack = std::max(rep.slack, detail::chart_step_length(c, H[s][t - 1], H[s][t]));
      if (s > 0) rep.slack = std::max(rep.slack, detail::chart_step_length(c, H[s - 1][t], H[s][t]));
    }
  // The last row must leave and reach N orthogonally.
  if (rep.row_length.back() < 1e-8 || mt < 3) {
    rep.applicable = false;
    rep.reason = "the last row is not a normal geodesic chord";
    return rep;
  }
  const Vec d0 = 4.0 * detail::chart_difference(c, top[1], top[0]) - detail::chart_difference(c, top[2], top[0]);
  const Vec d1 = 3.0 * detail::chart_difference(c, top[mt - 1], top[mt - 3]) -
                 4.0 * detail::chart_difference(c, top[mt - 2], top[mt - 3]);
  const double angle_tol = std::max(1e-3, 10 * rep.slack * rep.slack);
  if (detail::orthogonality_defect(N, sp.left.back(), d0) > angle_tol ||
      detail::orthogonality_defect(N, sp.right.back(), d1) > angle_tol) {
    rep.applicable = false;
    rep.reason = "the last row is not orthogonal to N at its ends";
    return rep;
  }
  rep.pass = rep.max_length >= rep.two_foc - rep.slack;
  return rep;
}

}  // namespace curvlab

#endif  // CURVLAB_LIFTING_HPP
