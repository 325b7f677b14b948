#ifndef CURVLAB_GEODESIC_HPP
#define CURVLAB_GEODESIC_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/manifold.hpp"
#include "curvlab/patch.hpp"

namespace curvlab {

/// One sample of a geodesic: position, unit velocity, parallel orthonormal frame
/// of v-perp, and (optionally) the fundamental matrix of the Jacobi equation in
/// that frame, Phi(t) mapping (J(0), J'(0)) to (J(t), J'(t)).
struct PathSample {
  double t = 0.0;
  Vec x, v;
  Mat frame;  // n x (n-1)
  Mat phi;    // 2(n-1) x 2(n-1), empty unless requested
};

struct PathOptions {
  bool frame = true;
  bool jacobi = true;
  std::optional<Mat> initial_frame;  // overrides the Gram-Schmidt frame when set
};

struct GeodesicPath {
  ChartPtr chart;
  double tol = 1e-9;
  double step = 0.0;
  double requested = 0.0;  // requested length
  double t_max = 0.0;      // length actually integrated
  bool truncated = false;  // trajectory left the chart domain
  double left_domain_at = 0.0;
  double richardson_error = 0.0;  // endpoint difference against a run with twice the step
  PathOptions options;
  std::vector<PathSample> samples;

  int dim() const { return chart->dim; }
  int codim() const { return chart->dim - 1; }
  const PathSample& front() const { return samples.front(); }
  const PathSample& back() const { return samples.back(); }

  /// Interpolation-free evaluation: one RK4 substep from the preceding sample.
  PathSample state_at(double t) const;
};

namespace detail {

struct FlowState {
  Vec x, v;
  Mat frame;
  Mat phi;
};

inline FlowState flow_rhs(const MetricChart& c, const FlowState& s, bool want_frame, bool want_phi) {
  FlowState d;
  if (want_phi) {
    const LocalGeometry lg = local_geometry(c, s.x, true);
    d.x = s.v;
    d.v = -lg.gamma.contract(s.v, s.v);
    d.frame = Mat(s.frame.rows(), s.frame.cols());
    for (Eigen::Index j = 0; j < s.frame.cols(); ++j) d.frame.col(j) = -lg.gamma.contract(s.v, s.frame.col(j));
    Mat K = jacobi_matrix(lg, s.v, s.frame);
    K = 0.5 * (K + K.transpose());
    const Eigen::Index m = K.rows();
    d.phi = Mat(2 * m, 2 * m);
    d.phi.topRows(m) = s.phi.bottomRows(m);
    d.phi.bottomRows(m) = -K * s.phi.topRows(m);
    return d;
  }
  const Christoffel G = christoffel(c, s.x);
  d.x = s.v;
  d.v = -G.contract(s.v, s.v);
  if (want_frame) {
    d.frame = Mat(s.frame.rows(), s.frame.cols());
    for (Eigen::Index j = 0; j < s.frame.cols(); ++j) d.frame.col(j) = -G.contract(s.v, s.frame.col(j));
  }
  return d;
}

inline FlowState axpy(const FlowState& s, double h, const FlowState& d, bool want_frame, bool want_phi) {
  FlowState r;
  r.x = s.x + h * d.x;
  r.v = s.v + h * d.v;
  if (want_frame) r.frame = s.frame + h * d.frame;
  if (want_phi) r.phi = s.phi + h * d.phi;
  return r;
}

inline FlowState rk4_step(const MetricChart& c, const FlowState& s, double h, bool want_frame, bool want_phi) {
  const FlowState k1 = flow_rhs(c, s, want_frame, want_phi);
  const FlowState k2 = flow_rhs(c, axpy(s, 0.5 * h, k1, want_frame, want_phi), want_frame, want_phi);
  const FlowState k3 = flow_rhs(c, axpy(s, 0.5 * h, k2, want_frame, want_phi), want_frame, want_phi);
  const FlowState k4 = flow_rhs(c, axpy(s, h, k3, want_frame, want_phi), want_frame, want_phi);
  FlowState r;
  r.x = s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  r.v = s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  if (want_frame) r.frame = s.frame + (h / 6.0) * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame);
  if (want_phi) r.phi = s.phi + (h / 6.0) * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  return r;
}

inline double target_step(double tol) { return 0.5 * std::min(0.01, std::pow(tol, 0.25)); }

inline FlowState to_flow(const PathSample& s) { return {s.x, s.v, s.frame, s.phi}; }

}  // namespace detail

inline PathSample GeodesicPath::state_at(double t) const {
  // Non-truncated paths may be evaluated slightly past their end (two steps), which
  // lets singular-time scans include the endpoint itself.
  const double reach = truncated ? t_max : t_max + 2.0 * step;
  require(t >= -1e-12 && t <= reach + 1e-12, ErrorKind::parameter, "state_at: t outside the integrated range");
  t = std::clamp(t, 0.0, reach);
  auto idx = static_cast<size_t>(std::floor(t / step));
  idx = std::min(idx, samples.size() - 1);
  const PathSample& s = samples[idx];
  const double dt = t - s.t;
  if (std::abs(dt) < 1e-15) return s;
  const bool want_phi = options.jacobi && options.frame;
  const detail::FlowState r = detail::rk4_step(*chart, detail::to_flow(s), dt, options.frame, want_phi);
  return {t, r.x, r.v, r.frame, r.phi};
}

/// Integrates the unit-speed geodesic from (x0, v0) for length T with RK4 at a
/// fixed step no larger than min(0.01, tol^(1/4)) / 2. Leaving the chart
/// truncates the path rather than throwing.
inline GeodesicPath integrate_geodesic(ChartPtr chart, const Vec& x0, const Vec& v0, double T, double tol = 1e-9,
                                       PathOptions opts = {}) {
  const MetricChart& c = *chart;
  require(T >= 0.0, ErrorKind::parameter, "integrate_geodesic: negative length");
  require(tol > 0.0, ErrorKind::parameter, "integrate_geodesic: tolerance must be positive");
  const Mat g0 = metric_at(c, x0);
  const double speed = norm(g0, v0);
  require(std::abs(speed - 1.0) <= 1e-8, ErrorKind::parameter,
          "integrate_geodesic: initial velocity is not unit length");
  if (opts.jacobi) opts.frame = true;

  GeodesicPath path;
  path.chart = chart;
  path.tol = tol;
  path.requested = T;
  path.options = opts;
  const int steps = std::max(2, 2 * static_cast<int>(std::ceil(T / detail::target_step(tol) / 2.0)));
  path.step = T > 0.0 ? T / steps : detail::target_step(tol);

  const int n = c.dim, m = n - 1;
  detail::FlowState s;
  s.x = x0;
  s.v = v0;
  if (opts.frame) {
    s.frame = opts.initial_frame ? *opts.initial_frame : perp_frame(g0, v0);
    require(s.frame.rows() == n && s.frame.cols() == m, ErrorKind::parameter, "initial frame has wrong shape");
  }
  if (opts.jacobi) s.phi = Mat::Identity(2 * m, 2 * m);
  path.samples.push_back({0.0, s.x, s.v, s.frame, s.phi});
  if (T == 0.0) return path;

  for (int i = 0; i < steps; ++i) {
    try {
      s = detail::rk4_step(c, s, path.step, opts.frame, opts.jacobi);
      if (!c.contains(s.x)) fail(ErrorKind::domain, "left domain");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::domain && e.kind() != ErrorKind::definiteness) throw;
      path.truncated = true;
      path.left_domain_at = path.samples.back().t;
      break;
    }
    path.samples.push_back({(i + 1) * path.step, s.x, s.v, s.frame, s.phi});
  }
  if (!path.truncated) path.samples.back().t = T;
  path.t_max = path.samples.back().t;

  // Richardson check on the position/velocity endpoint with step 2h.
  if (!path.truncated) {
    detail::FlowState r{x0, v0, Mat(), Mat()};
    try {
      for (int i = 0; i < steps / 2; ++i) r = detail::rk4_step(c, r, 2.0 * path.step, false, false);
      path.richardson_error = (r.x - path.back().x).norm() / 15.0;
    } catch (const Error&) {
      path.richardson_error = -1.0;
    }
  }
  return path;
}

/// Parallel transport of w0 along the path, sampled at the path's grid. Uses the
/// parallel frame {v, E_1, ..., E_{n-1}}.
inline std::vector<Vec> parallel_transport(const GeodesicPath& path, const Vec& w0) {
  require(path.options.frame, ErrorKind::precondition, "parallel_transport: path carries no frame");
  const PathSample& s0 = path.front();
  const Mat g0 = metric_at(*path.chart, s0.x);
  const double c0 = inner(g0, w0, s0.v);
  const Vec cf = s0.frame.transpose() * g0 * w0;
  std::vector<Vec> out;
  out.reserve(path.samples.size());
  for (const auto& s : path.samples) out.push_back(c0 * s.v + s.frame * cf);
  return out;
}

/// exp_x(w) by RK4 over s in [0, 1] with velocity w, using a fixed number of steps
/// so that the result is a smooth function of w (needed by Newton solvers).
inline Vec exp_map(const MetricChart& c, const Vec& x0, const Vec& w, int steps = 0) {
  metric_at(c, x0);
  if (steps <= 0) {
    const double len = norm(metric_at(c, x0), w);
    steps = std::max(16, static_cast<int>(std::ceil(len / detail::target_step(1e-9))));
  }
  detail::FlowState s{x0, w, Mat(), Mat()};
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    s = detail::rk4_step(c, s, h, false, false);
    detail::check_domain(c, s.x);
  }
  return s.x;
}

/// Endpoint and end velocity of s -> exp_x(s w).
inline std::pair<Vec, Vec> exp_map_with_velocity(const MetricChart& c, const Vec& x0, const Vec& w, int steps) {
  detail::FlowState s{x0, w, Mat(), Mat()};
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    s = detail::rk4_step(c, s, h, false, false);
    detail::check_domain(c, s.x);
  }
  return {s.x, s.v};
}

/// Checks that nu is a unit normal of N at u and returns the patch frame there.
inline PatchFrame checked_normal(const SubmanifoldPatch& N, const Vec& u, const Vec& nu) {
  PatchFrame pf = patch_frame(N, u);
  require(std::abs(norm(pf.g, nu) - 1.0) <= 1e-8, ErrorKind::parameter, "normal vector is not unit length");
  if (N.dim_sub > 0)
    require(tangent_components(pf, nu).cwiseAbs().maxCoeff() <= 1e-8, ErrorKind::precondition,
            "vector is not normal to " + N.name);
  return pf;
}

/// The normal geodesic t -> exp(t nu) leaving N at N(u).
inline GeodesicPath normal_geodesic(const SubmanifoldPatch& N, const Vec& u, const Vec& nu, double T,
                                    double tol = 1e-9, PathOptions opts = {}) {
  const PatchFrame pf = checked_normal(N, u, nu);
  return integrate_geodesic(N.ambient, pf.x, nu, T, tol, opts);
}

inline Vec exp_normal(const SubmanifoldPatch& N, const Vec& u, const Vec& nu, double t, double tol = 1e-9) {
  PathOptions o;
  o.frame = false;
  o.jacobi = false;
  const GeodesicPath p = normal_geodesic(N, u, nu, t, tol, o);
  if (p.truncated) {
    std::ostringstream os;
    os << "normal geodesic from " << N.name << " left the chart at t = " << p.left_domain_at;
    fail(ErrorKind::domain, os.str());
  }
  return p.back().x;
}

/// Length of the discretized curve with the midpoint metric on each segment.
inline double curve_length(const MetricChart& c, const std::vector<Vec>& pts) {
  double L = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    const Vec d = pts[i] - pts[i - 1];
    const Mat g = metric_at(c, 0.5 * (pts[i] + pts[i - 1]));
    L += norm(g, d);
  }
  return L;
}

/// Energy-based length sqrt(2 E T) of a curve sampled uniformly on [0, T].
inline double energy_length(const MetricChart& c, const std::vector<Vec>& pts, double T) {
  double E = 0.0;
  const double dt = T / static_cast<double>(pts.size() - 1);
  for (size_t i = 1; i < pts.size(); ++i) {
    const Vec d = (pts[i] - pts[i - 1]) / dt;
    const Mat g = metric_at(c, 0.5 * (pts[i] + pts[i - 1]));
    E += 0.5 * inner(g, d, d) * dt;
  }
  return std::sqrt(2.0 * E * T);
}

inline std::string path_csv(const GeodesicPath& p) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (int i = 0; i < p.dim(); ++i) os << ",x" << i + 1;
  for (int i = 0; i < p.dim(); ++i) os << ",v" << i + 1;
  os << "\n";
  for (const auto& s : p.samples) {
    os << s.t;
    for (int i = 0; i < p.dim(); ++i) os << "," << s.x(i);
    for (int i = 0; i < p.dim(); ++i) os << "," << s.v(i);
    os << "\n";
  }
  return os.str();
}

}  // namespace curvlab

#endif  // CURVLAB_GEODESIC_HPP
