#ifndef CURVLAB_COMPARISON_HPP
#define CURVLAB_COMPARISON_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "curvlab/jacobi.hpp"
#include "curvlab/submanifold.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// Trace comparison along a Lagrangian family
// ---------------------------------------------------------------------------

struct ComparisonSample {
  double t = 0.0;
  double lhs = 0.0;     // trace of the Riccati operator on the test subspace
  double rhs = 0.0;     // k cot(...)
  double margin = 0.0;  // rhs - lhs
  int dim_h = 0;
};

struct ComparisonReport {
  std::string scenario;
  std::vector<ComparisonSample> samples;
  std::vector<double> excluded;  // times where the cot argument left (eps, pi - eps)
  double worst_margin = 0.0;
  double tolerance = 1e-5;
  bool applicable = true;
  std::string reason;  // why the check is inapplicable
  double ric_k_min = 0.0;
  bool pass = false;

  void finish() {
    worst_margin = samples.empty() ? 0.0 : samples.front().margin;
    for (const auto& s : samples) worst_margin = std::min(worst_margin, s.margin);
    pass = applicable && worst_margin >= -tolerance;
  }
  void inapplicable(const std::string& why) {
    applicable = false;
    reason = why;
    pass = false;
  }
};

struct ComparisonOptions {
  int samples = 240;        // uniform sample times on the interval
  double cot_guard = 1e-3;  // cot arguments are kept in (guard, pi - guard)
  double tolerance = 1e-5;
  double ric_tolerance = 1e-6;
  double rel_threshold = 1e-6;
  std::string scenario;
};

namespace detail {

inline std::vector<double> uniform_times(double t0, double t1, int count) {
  std::vector<double> out;
  for (int i = 1; i <= count; ++i) out.push_back(t0 + (t1 - t0) * i / count);
  return out;
}

/// min over the sample times of Ric_k(gamma', .).
inline double ric_k_along(const GeodesicPath& P, const std::vector<double>& times, int k) {
  double lo = 1e300;
  for (double t : times) lo = std::min(lo, ric_k(curvature_along(P, t), k));
  return lo;
}

/// Largest component of the columns of K outside the span of the columns of V.
inline double containment_defect(const Mat& K, const Mat& V) {
  if (K.cols() == 0) return 0.0;
  if (V.cols() == 0) return K.norm();
  const Mat q = column_span(V, 1e-12);
  return (K - q * (q.transpose() * K)).cwiseAbs().maxCoeff();
}

inline void check_interval(const LagrangianFamily& L, double t0, double t1) {
  require(t0 >= 0.0 && t1 > t0, ErrorKind::parameter, "comparison: need 0 <= t0 < t1");
  require(t1 <= L.path->t_max + 1e-12, ErrorKind::parameter, "comparison: interval exceeds the integrated path");
}

}  // namespace detail

/// Intermediate Ricci comparison started at t0: for W0 (frame components at t0,
/// orthonormal columns) with Tr S_{t0}|_{W0} <= k cot(s0), the Riccati trace on
/// H(t) = V(t)-perp stays below k cot(t - t0 + s0), where V are the fields
/// orthogonal to W0 at t0.
inline ComparisonReport verify_ricci_comparison(const LagrangianFamily& L, const Mat& W0, double s0, double t0,
                                                double t1, const ComparisonOptions& opt = {}) {
  detail::check_interval(L, t0, t1);
  require(s0 > 0.0 && s0 < kPi, ErrorKind::parameter, "verify_ricci_comparison: s0 must lie in (0, pi)");
  const int m = L.dim();
  const int k = static_cast<int>(W0.cols());
  require(W0.rows() == m && k >= 1 && k <= m, ErrorKind::parameter,
          "verify_ricci_comparison: W0 must have n-1 rows and 1..n-1 columns");
  ComparisonReport rep;
  rep.scenario = opt.scenario;
  rep.tolerance = opt.tolerance;
  const auto times = detail::uniform_times(t0, t1, opt.samples);
  std::vector<double> ric_times = times;
  ric_times.insert(ric_times.begin(), t0);
  rep.ric_k_min = detail::ric_k_along(*L.path, ric_times, k);
  if (rep.ric_k_min < k - opt.ric_tolerance) {
    rep.inapplicable("Ric_k >= k fails along the geodesic (min " + std::to_string(rep.ric_k_min) + ")");
    return rep;
  }

  // Initial trace hypothesis on W0.
  const RiccatiOperator R0 = riccati(L, t0, nullptr, opt.rel_threshold);
  require(detail::containment_defect(W0, R0.basis) <= 1e-6, ErrorKind::ill_defined,
          "verify_ricci_comparison: W0 meets the kernel directions where S is undefined");
  const Mat w = R0.basis.transpose() * W0;
  const double tr0 = (w.transpose() * R0.matrix * w).trace();
  if (tr0 > k / std::tan(s0) + opt.tolerance) {
    rep.inapplicable("initial trace " + std::to_string(tr0) + " exceeds k cot(s0)");
    return rep;
  }

  // V = {c : W0^T J(t0) c = 0} in coefficient space.
  const auto [J0, Jp0] = L.values_at(t0);
  const double scale = std::max(1.0, std::max(J0.norm(), Jp0.norm()));
  const Mat V = null_space(W0.transpose() * J0, opt.rel_threshold, scale);
  const Mat K = full_index_space(L, t0, t1);
  if (detail::containment_defect(K, V) > 1e-6) {
    rep.inapplicable("V is not of full index on the interval");
    return rep;
  }

  for (double t : times) {
    const double arg = t - t0 + s0;
    if (arg <= opt.cot_guard || arg >= kPi - opt.cot_guard) {
      rep.excluded.push_back(t);
      continue;
    }
    const RiccatiOperator R = riccati(L, t, &V, opt.rel_threshold);
    ComparisonSample s;
    s.t = t;
    s.dim_h = static_cast<int>(R.basis.cols());
    s.lhs = R.matrix.trace();
    s.rhs = k / std::tan(arg);
    s.margin = s.rhs - s.lhs;
    rep.samples.push_back(s);
  }
  rep.finish();
  return rep;
}

/// Comparison with a singularity at 0: for V of full index (coefficient columns),
/// every k-dimensional H(t) orthogonal to V(t) has Tr S_t|_H <= k cot t. The
/// largest such trace is the sum of the top k eigenvalues of S_t on V(t)-perp.
/// When dim V <= n-1-k the interval must also end before pi.
inline ComparisonReport verify_cot_bound(const LagrangianFamily& L, const Mat& V, int k, double t0, double t1,
                                         const ComparisonOptions& opt = {}) {
  detail::check_interval(L, t0, t1);
  const int m = L.dim();
  require(V.rows() == m, ErrorKind::parameter, "verify_cot_bound: V must have n-1 rows");
  require(k >= 1 && k <= m, ErrorKind::parameter, "verify_cot_bound: k must lie in [1, n-1]");
  ComparisonReport rep;
  rep.scenario = opt.scenario;
  rep.tolerance = opt.tolerance;
  const auto times = detail::uniform_times(t0, t1, opt.samples);
  rep.ric_k_min = detail::ric_k_along(*L.path, times, k);
  if (rep.ric_k_min < k - opt.ric_tolerance) {
    rep.inapplicable("Ric_k >= k fails along the geodesic (min " + std::to_string(rep.ric_k_min) + ")");
    return rep;
  }
  const Mat K = full_index_space(L, 0.0, t1);
  if (detail::containment_defect(K, V) > 1e-6) {
    rep.inapplicable("V is not of full index on the interval");
    return rep;
  }
  for (double t : times) {
    if (t <= opt.cot_guard || t >= kPi - opt.cot_guard) {
      rep.excluded.push_back(t);
      continue;
    }
    const RiccatiOperator R = riccati(L, t, &V, opt.rel_threshold);
    if (R.basis.cols() < k) {
      rep.excluded.push_back(t);
      continue;
    }
    ComparisonSample s;
    s.t = t;
    s.dim_h = k;
    s.lhs = trace_extremes(R.matrix, k).max;
    s.rhs = k / std::tan(t);
    s.margin = s.rhs - s.lhs;
    rep.samples.push_back(s);
  }
  rep.finish();
  if (V.cols() <= m - k && t1 >= kPi) {
    rep.pass = false;
    rep.reason = "a full-index V of dimension <= n-1-k survived to length pi";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Index of short Lagrangians
// ---------------------------------------------------------------------------

struct FirstCorReport {
  int dim_K = 0;
  int required = 0;  // l - k + 1
  double trace_max = 0.0;  // max over k-dim W in U0 of Tr S_0|_W
  double bound = 0.0;      // k cot(pi/2 - r)
  bool hypothesis = false;
  double ric_k_min = 0.0;
  bool curvature_ok = false;
  bool pass = false;
};

/// Checks dim K >= l - k + 1 on (0, pi/2 + r] for an l-dimensional U0 (frame
/// components at 0) satisfying the initial trace inequality.
inline FirstCorReport check_first_cor(const LagrangianFamily& L, const Mat& U0, double r, int k,
                                      const ComparisonOptions& opt = {}) {
  require(r >= 0.0 && r < kPi / 2, ErrorKind::parameter, "check_first_cor: r must lie in [0, pi/2)");
  const int l = static_cast<int>(U0.cols());
  require(U0.rows() == L.dim() && k >= 1 && k <= l, ErrorKind::parameter,
          "check_first_cor: need n-1 rows and 1 <= k <= dim U0");
  const double b = kPi / 2 + r;
  require(L.path->t_max >= b - 1e-9, ErrorKind::precondition, "check_first_cor: geodesic shorter than pi/2 + r");
  FirstCorReport rep;
  rep.required = l - k + 1;
  rep.bound = k * std::tan(r);
  const RiccatiOperator R0 = riccati(L, 0.0, nullptr, opt.rel_threshold);
  require(detail::containment_defect(U0, R0.basis) <= 1e-6, ErrorKind::ill_defined,
          "check_first_cor: U0 meets the kernel directions where S_0 is undefined");
  const Mat u = R0.basis.transpose() * U0;
  rep.trace_max = trace_extremes(u.transpose() * R0.matrix * u, k).max;
  rep.hypothesis = rep.trace_max <= rep.bound + opt.tolerance;
  rep.ric_k_min = detail::ric_k_along(*L.path, detail::uniform_times(0.0, std::min(b, L.path->t_max), opt.samples), k);
  rep.curvature_ok = rep.ric_k_min >= k - opt.ric_tolerance;
  rep.dim_K = static_cast<int>(full_index_space(L, 0.0, std::min(b, L.path->t_max)).cols());
  rep.pass = rep.dim_K >= rep.required;
  return rep;
}

// ---------------------------------------------------------------------------
// Linear algebra: low Rayleigh quotient subspace from a trace bound
// ---------------------------------------------------------------------------

struct LowTraceResult {
  bool hypothesis = false;
  Mat V;        // eigenvectors with eigenvalue <= lambda (when the hypothesis holds)
  Mat witness;  // k-frame with Tr A|_W > k lambda (when it fails)
  double witness_trace = 0.0;
  double rayleigh_max = 0.0;  // max Rayleigh quotient on V
};

inline LowTraceResult low_trace_subspace(const Mat& A, int k, double lambda, double tol = 1e-12) {
  const int l = static_cast<int>(A.rows());
  require(A.cols() == l && l >= 1, ErrorKind::parameter, "low_trace_subspace: A must be square");
  require(k >= 1 && k <= l, ErrorKind::parameter, "low_trace_subspace: k must lie in [1, dim]");
  const Mat S = 0.5 * (A + A.transpose());
  const SymEig e = sym_eig(S);
  const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  LowTraceResult out;
  const double top = e.values.tail(k).sum();
  out.hypothesis = top <= k * lambda + tol * scale;
  if (!out.hypothesis) {
    out.witness = e.vectors.rightCols(k);
    out.witness_trace = top;
    return out;
  }
  int count = 0;
  while (count < l && e.values(count) <= lambda + tol * scale) ++count;
  out.V = e.vectors.leftCols(count);
  out.rayleigh_max = count ? e.values(count - 1) : -1e300;
  return out;
}

// ---------------------------------------------------------------------------
// Theorem checkers
// ---------------------------------------------------------------------------

/// Predicted connectivity integers are clamped at 0; `vacuous` when <= 0.
struct Connectivity {
  int value = 0;
  bool vacuous = true;
};

inline Connectivity connectivity(int raw) { return {std::max(0, raw), raw <= 0}; }

struct TheoremAReport {
  int k = 0;
  double ric_k_min = 0.0;
  double conj = 0.0;
  bool conj_beyond_horizon = false;
  int directions = 0;
  int skipped = 0;
  bool hypothesis = false;
  Connectivity predicted;
};

struct TheoremOptions {
  double strict_margin = 1e-6;  // strict inequalities need this much room
  double ric_tolerance = 1e-6;
  double horizon = kPi + 0.05;
};

/// Ric_k sampled at p and along the sampled geodesics, and conj_p as the least
/// first singular time of the point Lagrangians over sampled directions.
inline TheoremAReport theorem_a_check(ChartPtr c, const Vec& p, int k, const Sampling& s = {},
                                      const TheoremOptions& opt = {}) {
  require(k >= 1 && k <= c->dim - 1, ErrorKind::parameter, "theorem_a_check: k must lie in [1, n-1]");
  const auto pt = make_point_patch("point", c, p);
  TheoremAReport rep;
  rep.k = k;
  FocalOptions fo;
  fo.horizon = opt.horizon;
  const FocalRadius fr = focal_radius(pt, s, fo);
  rep.conj = fr.value;
  rep.conj_beyond_horizon = fr.beyond_horizon;
  rep.directions = fr.samples;
  rep.skipped = fr.skipped;
  const auto dirs = normal_samples(pt, s);
  std::vector<double> lows(dirs.size(), 1e300);
  parallel_for(dirs.size(), s.jobs, [&](size_t i) {
    double lo = ric_k(*c, p, dirs[i].normal, k);
    const GeodesicPath P = integrate_geodesic(c, p, dirs[i].normal, std::min(rep.conj, 2.0));
    for (int j = 1; j <= 4; ++j) lo = std::min(lo, ric_k(curvature_along(P, P.t_max * j / 4), k));
    lows[i] = lo;
  });
  rep.ric_k_min = *std::min_element(lows.begin(), lows.end());
  rep.hypothesis = rep.ric_k_min >= k - opt.ric_tolerance && rep.conj > kPi / 2 + opt.strict_margin;
  rep.predicted = connectivity(c->dim - k);
  return rep;
}

struct TheoremBReport {
  int k = 0;
  double foc = 0.0;
  bool foc_beyond_horizon = false;
  AdmissibleRadius r;
  double ric_k_min = 0.0;
  bool curvature_ok = false;
  bool condition = false;  // foc_N > r, strictly
  bool hypothesis = false;
  Connectivity predicted;  // 2l - n - k + 2
};

inline TheoremBReport theorem_b_check(const SubmanifoldPatch& N, int k, const Sampling& s = {},
                                      const TheoremOptions& opt = {}) {
  const int n = N.ambient->dim;
  require(k >= 1 && k <= n - 1, ErrorKind::parameter, "theorem_b_check: k must lie in [1, n-1]");
  TheoremBReport rep;
  rep.k = k;
  const FocalRadius fr = focal_radius(N, s);
  rep.foc = fr.value;
  rep.foc_beyond_horizon = fr.beyond_horizon;
  rep.r = min_admissible_r(N, k, s);
  double lo = 1e300;
  for (const auto& ns : normal_samples(N, s.coarsened())) {
    const Vec x = N.point(ns.u);
    const Mat g = metric_at(*N.ambient, x);
    const Mat frame = gram_schmidt(g, Mat::Identity(n, n), n);
    for (int i = 0; i < n; ++i) lo = std::min(lo, ric_k(*N.ambient, x, frame.col(i), k));
    lo = std::min(lo, ric_k(*N.ambient, x, ns.normal, k));
  }
  rep.ric_k_min = lo;
  rep.curvature_ok = lo >= k - opt.ric_tolerance;
  rep.condition = rep.foc > rep.r.r + opt.strict_margin;
  rep.hypothesis = rep.curvature_ok && rep.condition && rep.r.r < kPi / 2;
  rep.predicted = connectivity(2 * N.dim_sub - n - k + 2);
  return rep;
}

struct FrankelReport {
  int k = 0;
  bool dim_condition = false;  // dim N + dim Nt >= dim M + k - 1
  AdmissibleRadius r, rt;
  DistanceResult dist;
  double slack = 1e-4;
  bool bound = false;  // dist <= r + rt + slack
};

inline FrankelReport frankel_check(const SubmanifoldPatch& N, const SubmanifoldPatch& Nt, int k,
                                   const Sampling& s = {}, const DistanceOptions& dopt = {}) {
  const int n = N.ambient->dim;
  require(Nt.ambient->name == N.ambient->name, ErrorKind::parameter, "frankel_check: patches live in different charts");
  require(k >= 1 && k <= n - 1, ErrorKind::parameter, "frankel_check: k must lie in [1, n-1]");
  FrankelReport rep;
  rep.k = k;
  rep.dim_condition = N.dim_sub + Nt.dim_sub >= n + k - 1;
  rep.r = min_admissible_r(N, k, s);
  rep.rt = min_admissible_r(Nt, k, s);
  rep.dist = distance(N, Nt, dopt);
  rep.bound = rep.dist.distance <= rep.r.r + rep.rt.r + rep.slack;
  return rep;
}

}  // namespace curvlab

#endif  // CURVLAB_COMPARISON_HPP
