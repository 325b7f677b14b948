#ifndef CURVLAB_SUBMANIFOLD_HPP
#define CURVLAB_SUBMANIFOLD_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/geodesic.hpp"
#include "curvlab/jacobi.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/patch.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// Sampling of the unit normal bundle
// ---------------------------------------------------------------------------

struct Sampling {
  int param_density = 8;   // grid points per parameter axis
  int normal_density = 8;  // directions per normal circle / extra directions for higher codimension
  int jobs = 1;

  Sampling refined() const { return {2 * param_density, 2 * normal_density, jobs}; }
  Sampling coarsened() const { return {std::max(1, param_density / 2), std::max(1, normal_density / 2), jobs}; }
};

/// Regular grid over the parameter box: lo + j (hi - lo) / m, with the right end
/// included for non-periodic axes. Doubling m refines the grid (nested).
inline std::vector<Vec> parameter_grid(const SubmanifoldPatch& N, int m) {
  const int l = N.dim_sub;
  if (l == 0) return {Vec(0)};
  std::vector<std::vector<double>> axes(l);
  for (int i = 0; i < l; ++i) {
    const bool per = N.periodic.size() > static_cast<size_t>(i) && N.periodic[i];
    const int count = per ? m : m + 1;
    for (int j = 0; j < count; ++j) axes[i].push_back(N.param_lo[i] + j * (N.param_hi[i] - N.param_lo[i]) / m);
  }
  std::vector<Vec> out;
  std::vector<size_t> idx(l, 0);
  for (;;) {
    Vec u(l);
    for (int i = 0; i < l; ++i) u(i) = axes[i][idx[i]];
    out.push_back(u);
    int i = l - 1;
    while (i >= 0 && ++idx[i] == axes[i].size()) idx[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

inline double radical_inverse(unsigned i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

/// Deterministic unit vectors of R^c: +-1 for c = 1, equally spaced angles for
/// c = 2, and for c >= 3 the +- coordinate axes followed by Halton points pushed
/// to the sphere through Box-Muller.
inline std::vector<Vec> sphere_directions(int c, int density) {
  std::vector<Vec> out;
  if (c <= 0) return out;
  if (c == 1) return {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  if (c == 2) {
    const int q = std::max(4, density);
    for (int j = 0; j < q; ++j) {
      const double a = 2.0 * kPi * j / q;
      out.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
    }
    return out;
  }
  for (int i = 0; i < c; ++i) {
    out.push_back(Vec::Unit(c, i));
    out.push_back(-Vec::Unit(c, i));
  }
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  const int extra = density * density;
  for (int j = 1; j <= extra; ++j) {
    Vec z(c);
    for (int i = 0; i < c; i += 2) {
      const double u1 = std::max(1e-12, radical_inverse(j, primes[i % 8]));
      const double u2 = radical_inverse(j, primes[(i + 1) % 8]);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      z(i) = rad * std::cos(2 * kPi * u2);
      if (i + 1 < c) z(i + 1) = rad * std::sin(2 * kPi * u2);
    }
    if (z.norm() > 1e-9) out.push_back(z.normalized());
  }
  return out;
}

/// A sampled point of the unit normal bundle.
struct NormalSample {
  Vec u;
  Vec normal;  // chart components, unit
};

inline std::vector<NormalSample> normal_samples(const SubmanifoldPatch& N, const Sampling& s) {
  std::vector<NormalSample> out;
  const int c = N.ambient->dim - N.dim_sub;
  const auto dirs = sphere_directions(c, s.normal_density);
  for (const Vec& u : parameter_grid(N, s.param_density)) {
    PatchFrame pf;
    try {
      pf = patch_frame(N, u);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::domain) continue;
      throw;
    }
    for (const Vec& d : dirs) out.push_back({u, pf.normal_frame * d});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Admissible radius from the shape operator traces
// ---------------------------------------------------------------------------

struct AdmissibleRadius {
  double r = 0.0;
  double max_trace = 0.0;       // sup over samples of |Tr S_v|_W| over k-dim W
  double max_trace_coarse = 0.0;  // the same at half density
  bool sampling_warning = false;  // the sup grew noticeably under refinement
  bool vacuous = false;           // k exceeds dim N: no k-dimensional tangent subspaces
  Vec at_u, at_normal;
};

inline double max_abs_trace(const Mat& s, int k) {
  const TraceExtremes te = trace_extremes(s, k);
  return std::max(std::abs(te.min), std::abs(te.max));
}

inline AdmissibleRadius min_admissible_r(const SubmanifoldPatch& N, int k, const Sampling& s = {}) {
  require(k >= 1, ErrorKind::parameter, "min_admissible_r: k must be at least 1");
  AdmissibleRadius out;
  if (k > N.dim_sub) {
    out.vacuous = true;
    return out;
  }
  auto sweep = [&](const Sampling& smp, Vec* at_u, Vec* at_n) {
    double best = -1.0;
    for (const auto& ns : normal_samples(N, smp)) {
      const double v = max_abs_trace(shape_operator(N, ns.u, ns.normal).matrix, k);
      if (v > best) {
        best = v;
        if (at_u) *at_u = ns.u, *at_n = ns.normal;
      }
    }
    return std::max(0.0, best);
  };
  out.max_trace = sweep(s, &out.at_u, &out.at_normal);
  out.max_trace_coarse = sweep(s.coarsened(), nullptr, nullptr);
  out.sampling_warning = out.max_trace > 1.1 * out.max_trace_coarse + 1e-9;
  // cot(pi/2 - r) = tan r = max_trace / k
  out.r = std::atan(out.max_trace / k);
  return out;
}

// ---------------------------------------------------------------------------
// Focal radius
// ---------------------------------------------------------------------------

struct FocalRadius {
  double value = 0.0;          // min first focal time over samples (horizon if none found)
  bool beyond_horizon = false;  // no focal point before the horizon: the radius is >= value
  double horizon = kPi;
  int samples = 0;
  int skipped = 0;  // normal geodesics that left the chart before any focal point
  Vec at_u, at_normal;
  int multiplicity = 0;
  std::vector<double> focal_times;  // all singular times in (0, horizon] along the minimizing normal
};

struct FocalOptions {
  double horizon = kPi;
  double tol = 1e-9;
  SingularOptions singular;
};

/// First singular time of Lambda_N along the normal geodesic (u, nu), or nullopt if
/// none before the horizon. Sets `left_chart` when the path was truncated first.
inline std::optional<SingularTimeRecord> first_focal_time(const SubmanifoldPatch& N, const Vec& u, const Vec& nu,
                                                          const FocalOptions& opt, bool* left_chart = nullptr,
                                                          std::vector<double>* all = nullptr) {
  const double T = opt.horizon + 2 * opt.singular.end_slack;
  const PathPtr p = share(normal_geodesic(N, u, nu, T, opt.tol));
  const LagrangianFamily L = lagrangian_from_submanifold(p, N, u);
  const double b = std::min(opt.horizon, p->t_max);
  if (left_chart) *left_chart = p->truncated;
  if (b <= 0.0) return std::nullopt;
  const auto recs = singular_times(L, 0.0, b, opt.singular);
  if (all)
    for (const auto& r : recs) all->push_back(r.t);
  if (recs.empty()) return std::nullopt;
  if (left_chart) *left_chart = false;
  return recs.front();
}

inline FocalRadius focal_radius(const SubmanifoldPatch& N, const Sampling& s = {}, const FocalOptions& opt = {}) {
  const auto samples = normal_samples(N, s);
  std::vector<std::optional<SingularTimeRecord>> first(samples.size());
  std::vector<char> left(samples.size(), 0);
  parallel_for(samples.size(), s.jobs, [&](size_t i) {
    bool lc = false;
    first[i] = first_focal_time(N, samples[i].u, samples[i].normal, opt, &lc);
    left[i] = lc ? 1 : 0;
  });
  FocalRadius out;
  out.horizon = opt.horizon;
  out.value = opt.horizon;
  out.beyond_horizon = true;
  size_t best = samples.size();
  for (size_t i = 0; i < samples.size(); ++i) {
    if (left[i]) {
      ++out.skipped;
      continue;
    }
    ++out.samples;
    if (first[i] && (best == samples.size() || first[i]->t < out.value)) {
      out.value = first[i]->t;
      out.beyond_horizon = false;
      best = i;
    }
  }
  if (best < samples.size()) {
    out.at_u = samples[best].u;
    out.at_normal = samples[best].normal;
    out.multiplicity = first[best]->multiplicity;
    first_focal_time(N, out.at_u, out.at_normal, opt, nullptr, &out.focal_times);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Distance between two submanifolds by geodesic shooting
// ---------------------------------------------------------------------------

struct DistanceResult {
  double distance = 0.0;
  Vec u, u_tilde;            // parameters of the endpoints
  Vec start, end;            // chart coordinates
  Vec velocity;              // unit initial velocity (zero when the submanifolds meet)
  double angle_defect_start = 0.0;  // |pi/2 - angle| at N, radians
  double angle_defect_end = 0.0;
  double residual = 0.0;
  double proxy_min = 0.0;    // best straight-segment length on the coarse grid (an upper bound)
  bool certified = false;
  double orthogonality_threshold = 1e-4;
  int candidates = 0;
  int converged = 0;
};

struct DistanceOptions {
  int grid = 12;           // coarse grid density per parameter axis
  int starts = 6;          // number of best coarse pairs refined
  double tol = 1e-9;
  double orthogonality_threshold = 1e-4;
  int max_iterations = 200;
};

namespace detail {

/// Chart-coordinate difference a - b, reduced by the chart identification.
inline Vec chart_difference(const MetricChart& c, const Vec& a, const Vec& b) {
  Vec d = a - b;
  if (c.wrap) c.wrap(d.data());
  return d;
}

/// Length of the straight coordinate segment, 5-point Gauss-Legendre on each piece.
inline double segment_length(const MetricChart& c, const Vec& a, const Vec& d, int pieces = 8) {
  static const double node[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
  static const double weight[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
  double L = 0.0;
  for (int i = 0; i < pieces; ++i)
    for (int q = 0; q < 5; ++q) {
      const double s = (i + 0.5 + 0.5 * node[q]) / pieces;
      L += 0.5 * weight[q] * norm(metric_at(c, a + s * d), d) / pieces;
    }
  return L;
}

/// Angle defect |pi/2 - angle(v, T N)| at parameter u.
inline double orthogonality_defect(const SubmanifoldPatch& N, const Vec& u, const Vec& v) {
  if (N.dim_sub == 0) return 0.0;
  const PatchFrame pf = patch_frame(N, u);
  const double vn = norm(pf.g, v);
  if (vn < 1e-14) return 0.0;
  const double tn = tangent_components(pf, v).norm();
  return std::asin(std::min(1.0, tn / vn));
}

}  // namespace detail

inline DistanceResult distance(const SubmanifoldPatch& N, const SubmanifoldPatch& Nt, const DistanceOptions& opt = {}) {
  require(N.ambient.get() == Nt.ambient.get() || N.ambient->name == Nt.ambient->name, ErrorKind::parameter,
          "distance: submanifolds live in different charts");
  const MetricChart& c = *N.ambient;
  const int n = c.dim, l = N.dim_sub, lt = Nt.dim_sub;
  DistanceResult best;
  best.distance = std::numeric_limits<double>::infinity();
  best.orthogonality_threshold = opt.orthogonality_threshold;

  // Coarse product grid.
  struct Pair {
    double len;
    Vec u, ut;
  };
  std::vector<Pair> pairs;
  const auto gu = parameter_grid(N, opt.grid), gt = parameter_grid(Nt, opt.grid);
  for (const Vec& u : gu) {
    Vec x;
    try {
      x = N.point(u);
      metric_at(c, x);
    } catch (const Error&) {
      continue;
    }
    for (const Vec& ut : gt) {
      try {
        const Vec xt = Nt.point(ut);
        pairs.push_back({detail::segment_length(c, x, detail::chart_difference(c, xt, x), 2), u, ut});
      } catch (const Error&) {
      }
    }
  }
  require(!pairs.empty(), ErrorKind::domain, "distance: no grid pair inside the chart");
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.len < b.len; });
  // Re-measure the leading pairs finely; the coarse lengths only rank them.
  const size_t head = std::min(pairs.size(), static_cast<size_t>(4 * opt.starts));
  for (size_t i = 0; i < head; ++i) {
    const Vec x = N.point(pairs[i].u);
    pairs[i].len = detail::segment_length(c, x, detail::chart_difference(c, Nt.point(pairs[i].ut), x), 64);
  }
  std::stable_sort(pairs.begin(), pairs.begin() + head, [](const Pair& a, const Pair& b) { return a.len < b.len; });
  best.proxy_min = pairs.front().len;

  const int unknowns = l + (n - l) + lt;
  const int eqs = n + lt;
  // Residual of the shooting system at z = (u, xi, u_tilde).
  auto residual = [&](const Vec& z, int steps, Vec* vend) -> Vec {
    const Vec u = z.head(l), xi = z.segment(l, n - l), ut = z.tail(lt);
    const PatchFrame pf = patch_frame(N, u);
    const Vec w = pf.normal_frame * xi;
    const auto [xe, ve] = exp_map_with_velocity(c, pf.x, w, steps);
    Vec F(eqs);
    F.head(n) = detail::chart_difference(c, xe, Nt.point(ut));
    if (lt > 0) {
      const PatchFrame pt = patch_frame(Nt, ut);
      F.tail(lt) = pt.tangent_frame.transpose() * metric_at(c, xe) * ve;
    }
    if (vend) *vend = ve;
    return F;
  };

  const int starts = std::min<int>(opt.starts, static_cast<int>(pairs.size()));
  for (int sidx = 0; sidx < starts; ++sidx) {
    const Pair& pr = pairs[sidx];
    ++best.candidates;
    Vec z(unknowns);
    z.head(l) = pr.u;
    z.tail(lt) = pr.ut;
    {
      const PatchFrame pf = patch_frame(N, pr.u);
      const Vec d = detail::chart_difference(c, Nt.point(pr.ut), pf.x);
      Vec xi = pf.normal_frame.transpose() * pf.g * d;
      const double xn = xi.norm();
      if (xn > 1e-12) xi *= pr.len / xn;
      z.segment(l, n - l) = xi;
    }
    const int steps = std::max(64, static_cast<int>(std::ceil(1.5 * std::max(pr.len, 1.0) / detail::target_step(opt.tol))));
    double mu = 1e-3;
    Vec F;
    try {
      F = residual(z, steps, nullptr);
    } catch (const Error&) {
      continue;
    }
    double fn = F.norm();
    for (int it = 0; it < opt.max_iterations && fn > 1e-12; ++it) {
      Mat Jac(eqs, unknowns);
      bool ok = true;
      for (int j = 0; j < unknowns && ok; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(z(j)));
        Vec zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        try {
          Jac.col(j) = (residual(zp, steps, nullptr) - residual(zm, steps, nullptr)) / (2 * h);
        } catch (const Error&) {
          ok = false;
        }
      }
      if (!ok) break;
      const Mat A = Jac.transpose() * Jac;
      const Vec g = Jac.transpose() * F;
      bool accepted = false;
      for (int tries = 0; tries < 30; ++tries) {
        Mat D = A;
        D.diagonal().array() += mu * (A.diagonal().array().maxCoeff() + 1e-12);
        const Vec dz = -D.ldlt().solve(g);
        Vec zn = z + dz;
        try {
          const Vec Fn = residual(zn, steps, nullptr);
          if (Fn.norm() < fn) {
            z = zn;
            F = Fn;
            fn = Fn.norm();
            mu = std::max(1e-12, mu / 10);
            accepted = true;
            break;
          }
        } catch (const Error&) {
        }
        mu *= 10;
      }
      if (!accepted) break;
    }
    if (!(fn < 1e-9)) continue;
    ++best.converged;
    const Vec u = z.head(l), xi = z.segment(l, n - l), ut = z.tail(lt);
    const PatchFrame pf = patch_frame(N, u);
    const Vec w = pf.normal_frame * xi;
    const double len = xi.norm();  // normal frame is g-orthonormal
    if (len < best.distance - 1e-12) {
      Vec vend;
      residual(z, steps, &vend);
      best.distance = len;
      best.u = u;
      best.u_tilde = ut;
      best.start = pf.x;
      best.end = Nt.point(ut);
      best.velocity = len > 1e-12 ? Vec(w / len) : Vec(Vec::Zero(n));
      best.residual = fn;
      best.angle_defect_start = len > 1e-12 ? detail::orthogonality_defect(N, u, w) : 0.0;
      best.angle_defect_end = len > 1e-12 ? detail::orthogonality_defect(Nt, ut, vend) : 0.0;
    }
  }
  if (!std::isfinite(best.distance)) {
    // No start converged: report the coarse bound, uncertified.
    best.distance = best.proxy_min;
    best.u = pairs.front().u;
    best.u_tilde = pairs.front().ut;
    best.start = N.point(best.u);
    best.end = Nt.point(best.u_tilde);
    best.velocity = Vec::Zero(n);
    best.certified = false;
    return best;
  }
  best.certified = best.angle_defect_start <= opt.orthogonality_threshold &&
                   best.angle_defect_end <= opt.orthogonality_threshold &&
                   best.distance <= best.proxy_min + 1e-9;
  return best;
}

/// The connecting unit-speed geodesic of a distance result.
inline GeodesicPath connecting_path(const SubmanifoldPatch& N, const DistanceResult& d, double tol = 1e-9,
                                    PathOptions opts = {}) {
  require(d.distance > 0.0, ErrorKind::degeneracy, "connecting_path: the submanifolds meet");
  return integrate_geodesic(N.ambient, d.start, d.velocity, d.distance, tol, opts);
}

}  // namespace curvlab

#endif  // CURVLAB_SUBMANIFOLD_HPP
