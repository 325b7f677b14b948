#ifndef CURVLAB_CLI_OPS_HPP
#define CURVLAB_CLI_OPS_HPP

// Scenario operations of the command-line front end. Included from cli.hpp.

namespace curvlab::cli {

/// Collects the quantities of one scenario.
class Emitter {
 public:
  void value(const std::string& name, double v) { q_.push_back({name, v}); }
  void flag(const std::string& name, bool b) {
    Quantity q{name, b ? 1.0 : 0.0};
    q.is_bool = true;
    q_.push_back(q);
  }
  /// A verdict computed by the library. `applicable = false` reports the check
  /// as inapplicable instead of failed.
  void check(const std::string& name, bool ok, double margin, bool applicable = true, const std::string& note = "") {
    Quantity q{name, ok ? 1.0 : 0.0};
    q.is_check = true;
    q.ok = ok;
    q.margin = margin;
    q.applicable = applicable;
    q.note = note;
    q_.push_back(q);
  }
  void trace(const std::string& scenario, const ComparisonReport& rep) {
    for (const auto& s : rep.samples) trace_.push_back({scenario, s.t, s.lhs, s.rhs, s.margin, s.dim_h});
  }

  const std::vector<Quantity>& quantities() const { return q_; }
  std::vector<TraceSample>& traces() { return trace_; }
  Json details = Json::object();

 private:
  std::vector<Quantity> q_;
  std::vector<TraceSample> trace_;
};

struct OpContext {
  const Fields& f;
  std::string id;
  std::uint64_t seed;
  const RunSettings& rs;
  Emitter& out;
};

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {"id", "op", "expect", "tolerance", "enabled", "note"};
  return keys;
}

inline void allow_keys(const Fields& f, std::initializer_list<const char*> extra) {
  std::set<std::string> keys = common_keys();
  for (const char* k : extra) keys.insert(k);
  f.allow(keys);
}

inline int positive(const Fields& f, const std::string& key, int dflt) {
  const int v = f.integer(key, dflt);
  if (v < 1) fail(ErrorKind::config, f.where() + ": '" + key + "' must be at least 1");
  return v;
}

inline Sampling sampling_of(const Fields& f, int param, int normal) {
  return {positive(f, "param_density", param), positive(f, "normal_density", normal), 1};
}

inline ChartPtr chart_of(const Fields& f) { return chart_by_name(f.str("chart"), positive(f, "flat_dim", 3)); }

inline PatchPtr patch_of(const Fields& f, const ChartPtr& c, const std::string& key = "patch") {
  if (f.has("at")) {
    const Vec at = f.vec("at");
    return patch_by_name(f.str(key), c, &at);
  }
  return patch_by_name(f.str(key), c);
}

inline Vec unit_for(const MetricChart& c, const Vec& x, Vec v) {
  const double n = norm(metric_at(c, x), v);
  require(n > 1e-12, ErrorKind::parameter, "direction must be nonzero");
  return v / n;
}

inline int required_k(const Fields& f) {
  if (!f.has("k")) fail(ErrorKind::config, f.where() + ": missing key 'k'");
  return f.integer("k", 1);
}

/// Unit normal at N(u) from coefficients in the orthonormal normal frame (default
/// the first frame vector).
inline Vec normal_of(const Fields& f, const SubmanifoldPatch& N, const Vec& u) {
  const PatchFrame pf = patch_frame(N, u);
  const int codim = static_cast<int>(pf.normal_frame.cols());
  Vec coeff = Vec::Unit(codim, 0);
  if (f.has("normal")) {
    coeff = f.vec("normal");
    require(coeff.size() == codim, ErrorKind::parameter,
            "normal: expected " + std::to_string(codim) + " normal-frame coefficients");
    require(coeff.norm() > 1e-12, ErrorKind::parameter, "normal must be nonzero");
    coeff.normalize();
  }
  return pf.normal_frame * coeff;
}

inline Vec parameters_of(const Fields& f, const SubmanifoldPatch& N, const std::string& key = "u") {
  if (N.dim_sub == 0) return Vec(0);
  if (!f.has(key)) fail(ErrorKind::config, f.where() + ": '" + key + "' is required for patch " + N.name);
  const Vec u = f.vec(key);
  require(u.size() == N.dim_sub, ErrorKind::parameter,
          key + ": expected " + std::to_string(N.dim_sub) + " parameters for " + N.name);
  return u;
}

// ---------------------------------------------------------------------------
// curvature
// ---------------------------------------------------------------------------

inline void op_curvature(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"chart", "flat_dim", "k", "at", "samples", "box", "normal_density"});
  const ChartPtr c = chart_of(f);
  const int k = required_k(f);
  require(k >= 1 && k <= c->dim - 1, ErrorKind::parameter, "k must lie in [1, n-1]");
  const Vec p = f.has("at") ? f.vec("at") : default_point(*c);
  require(p.size() == c->dim, ErrorKind::parameter, "at: coordinate count mismatch");
  const int samples = positive(f, "samples", 100);
  const double box = f.num("box", 1.0);
  require(box > 0.0, ErrorKind::parameter, "box must be positive");

  std::mt19937_64 rng(cx.seed);
  std::uniform_real_distribution<double> ux(-box, box);
  std::normal_distribution<double> nd;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < samples; ++i) {
    Vec x(c->dim), v(c->dim);
    for (int j = 0; j < c->dim; ++j) x(j) = ux(rng);
    for (int j = 0; j < c->dim; ++j) v(j) = nd(rng);
    const double r = ric_k(*c, x, unit_for(*c, x, v), k);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  cx.out.value("ric_k_min", lo);
  cx.out.value("ric_k_max", hi);

  const Sampling s{1, positive(f, "normal_density", 3), 1};
  const TheoremAReport a = theorem_a_check(c, p, k, s);
  cx.out.value("ric_k_along_geodesics", a.ric_k_min);
  cx.out.value("conj", a.conj);
  cx.out.flag("conj_beyond_horizon", a.conj_beyond_horizon);
  cx.out.flag("hypothesis", a.hypothesis);
  cx.out.value("connectivity", a.predicted.value);
  cx.out.flag("connectivity_vacuous", a.predicted.vacuous);
  cx.out.details["directions"] = a.directions;
  cx.out.details["skipped"] = a.skipped;
}

// ---------------------------------------------------------------------------
// focal
// ---------------------------------------------------------------------------

inline void op_focal(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"chart", "flat_dim", "patch", "at", "k", "param_density", "normal_density", "horizon"});
  const ChartPtr c = chart_of(f);
  const PatchPtr N = patch_of(f, c);
  const Sampling s = sampling_of(f, 8, 8);
  FocalOptions fo;
  fo.horizon = f.num("horizon", kPi);
  require(fo.horizon > 0.0, ErrorKind::parameter, "horizon must be positive");

  const FocalRadius fr = focal_radius(*N, s, fo);
  cx.out.value("foc", fr.beyond_horizon ? std::numeric_limits<double>::infinity() : fr.value);
  cx.out.flag("beyond_horizon", fr.beyond_horizon);
  cx.out.value("multiplicity", fr.multiplicity);
  cx.out.value("skipped", fr.skipped);
  for (double t : fr.focal_times)
    if (t > fr.value + 1e-6) {
      cx.out.value("second_focal", t);
      break;
    }
  Json times = Json::array();
  for (double t : fr.focal_times) times.push_back(num_json(t));
  cx.out.details["focal_times"] = times;
  cx.out.details["samples"] = fr.samples;

  if (N->dim_sub > 0) {
    double emin = std::numeric_limits<double>::infinity(), emax = -emin;
    for (const auto& ns : normal_samples(*N, s)) {
      const Vec ev = sym_eig(shape_operator(*N, ns.u, ns.normal).matrix).values;
      emin = std::min(emin, ev.minCoeff());
      emax = std::max(emax, ev.maxCoeff());
    }
    cx.out.value("shape_eig_min", emin);
    cx.out.value("shape_eig_max", emax);
  }
  if (f.has("k")) {
    const AdmissibleRadius ar = min_admissible_r(*N, f.integer("k", 1), s);
    cx.out.flag("r_vacuous", ar.vacuous);
    if (!ar.vacuous) {
      cx.out.value("max_trace", ar.max_trace);
      cx.out.value("min_r", ar.r);
      cx.out.flag("sampling_warning", ar.sampling_warning);
    }
  }
}

// ---------------------------------------------------------------------------
// index
// ---------------------------------------------------------------------------

inline void op_index(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"mode", "chart", "flat_dim", "at", "direction", "length", "per_pairing", "band"});
  const std::string mode = f.str("mode", "endpoint");
  if (mode == "endpoint") {
    const ChartPtr c = chart_of(f);
    const Vec x0 = f.has("at") ? f.vec("at") : default_point(*c);
    require(x0.size() == c->dim, ErrorKind::parameter, "at: coordinate count mismatch");
    const Vec d = f.has("direction") ? f.vec("direction") : Vec(Vec::Unit(c->dim, 0));
    require(d.size() == c->dim, ErrorKind::parameter, "direction: coordinate count mismatch");
    const double b = f.num("length");
    require(b > 0.0, ErrorKind::parameter, "length must be positive");
    const PathPtr p = share(integrate_geodesic(c, x0, unit_for(*c, x0, d), b));
    require(!p->truncated, ErrorKind::domain, "the geodesic leaves the chart before its end");
    const EndpointIndex r = index_endpoint(p);
    cx.out.value("index", r.index);
    cx.out.flag("degenerate", r.degenerate);
    cx.out.value("endpoint_kernel", r.endpoint_kernel);
    Json times = Json::array();
    for (const auto& rec : r.conjugate) times.push_back(num_json(rec.t));
    cx.out.details["conjugate_times"] = times;
    return;
  }
  if (mode != "random") fail(ErrorKind::config, f.where() + ": mode must be 'endpoint' or 'random'");
  const int per = positive(f, "per_pairing", 2);
  const double band = f.num("band", 1e-3);
  const auto scenarios = random_index_scenarios(cx.seed, per, band);
  int mismatches = 0, identity_failures = 0, focal = 0, unstable = 0;
  Json rows = Json::array();
  for (const auto& sc : scenarios) {
    const IndexReport r = index_endmanifold_hk(sc.path, *sc.N, sc.u, *sc.Nt, sc.ut);
    const bool match = r.has_oracle && r.total_hk == r.total_oracle;
    if (!match) ++mismatches;
    if (r.b_is_focal) {
      ++focal;
      if (!r.identity_holds) ++identity_failures;
    }
    if (r.has_oracle && !r.oracle.stable) ++unstable;
    rows.push_back({{"pairing", sc.pairing},
                    {"label", sc.label},
                    {"b", num_json(r.b)},
                    {"hk", r.total_hk},
                    {"oracle", r.total_oracle},
                    {"b_is_focal", r.b_is_focal}});
  }
  cx.out.value("scenarios", static_cast<double>(scenarios.size()));
  cx.out.value("focal_ends", focal);
  cx.out.value("unstable_oracles", unstable);
  cx.out.check("hk_equals_oracle", mismatches == 0, -mismatches);
  cx.out.check("identity_at_focal_ends", identity_failures == 0, -identity_failures);
  cx.out.details["scenarios"] = rows;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

/// Lagrangian family along a geodesic: a point family when the patch is `point`
/// (direction in chart components), otherwise the family of N along the normal
/// geodesic from N(u).
inline LagrangianFamily family_of(const Fields& f, double length) {
  const ChartPtr c = chart_of(f);
  const std::string patch = f.str("patch", "point");
  if (patch == "point") {
    const Vec x0 = f.has("at") ? f.vec("at") : default_point(*c);
    require(x0.size() == c->dim, ErrorKind::parameter, "at: coordinate count mismatch");
    const Vec d = f.has("direction") ? f.vec("direction") : Vec(Vec::Unit(c->dim, 0));
    require(d.size() == c->dim, ErrorKind::parameter, "direction: coordinate count mismatch");
    return lagrangian_from_point(share(integrate_geodesic(c, x0, unit_for(*c, x0, d), length)));
  }
  const PatchPtr N = patch_by_name(patch, c);
  const Vec u = parameters_of(f, *N);
  const Vec nu = normal_of(f, *N, u);
  return lagrangian_from_submanifold(share(normal_geodesic(*N, u, nu, length)), *N, u);
}

inline void emit_comparison(OpContext& cx, const ComparisonReport& rep) {
  cx.out.flag("applicable", rep.applicable);
  if (rep.applicable) {
    cx.out.value("worst_margin", rep.worst_margin);
    cx.out.value("ric_k_min", rep.ric_k_min);
    cx.out.value("excluded_samples", static_cast<double>(rep.excluded.size()));
  }
  cx.out.check("bound", rep.pass, rep.applicable ? rep.worst_margin : std::numeric_limits<double>::quiet_NaN(),
               rep.applicable, rep.reason);
  if (!rep.reason.empty()) cx.out.details["reason"] = rep.reason;
  cx.out.trace(cx.id, rep);
}

inline void op_compare(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"lemma", "chart", "flat_dim", "patch", "at", "direction", "u", "normal", "k", "t0", "t1", "s0",
                 "w0", "r", "samples", "param_density", "normal_density", "count"});
  const std::string lemma = f.str("lemma");
  ComparisonOptions opt;
  opt.samples = positive(f, "samples", 240);
  opt.scenario = cx.id;

  if (lemma == "ricci" || lemma == "cot") {
    const int k = required_k(f);
    const bool point = f.str("patch", "point") == "point";
    const double t0 = f.num("t0", point ? 1e-3 : 0.0);
    const double t1 = f.num("t1");
    require(t1 > t0 && t0 >= 0.0, ErrorKind::parameter, "need 0 <= t0 < t1");
    const LagrangianFamily L = family_of(f, t1);
    require(k <= L.dim(), ErrorKind::parameter, "k exceeds n-1");
    if (lemma == "cot") {
      const Mat V = full_index_space(L, t0, t1);
      emit_comparison(cx, verify_cot_bound(L, V, k, t0, t1, opt));
      return;
    }
    const RiccatiOperator R0 = riccati(L, t0);
    require(R0.matrix.rows() >= k, ErrorKind::degeneracy, "the family is singular at t0");
    const SymEig e = sym_eig(R0.matrix);
    const std::string w0 = f.str("w0", "top");
    if (w0 != "top" && w0 != "bottom") fail(ErrorKind::config, f.where() + ": w0 must be 'top' or 'bottom'");
    const Eigen::Index first = w0 == "top" ? e.values.size() - k : 0;
    const Mat W0 = R0.basis * e.vectors.middleCols(first, k);
    const double tr = e.values.segment(first, k).sum();
    const double s0 = f.num("s0", std::atan2(static_cast<double>(k), tr));
    cx.out.value("initial_trace", tr);
    cx.out.value("s0", s0);
    emit_comparison(cx, verify_ricci_comparison(L, W0, s0, t0, t1, opt));
    return;
  }
  if (lemma == "first_cor") {
    const int k = required_k(f);
    const double r = f.num("r");
    const LagrangianFamily L = family_of(f, kPi / 2 + r + 0.01);
    require(L.mode == "submanifold", ErrorKind::parameter, "first_cor needs a submanifold patch");
    const FirstCorReport rc = check_first_cor(L, L.tangent_components, r, k, opt);
    cx.out.value("dim_K", rc.dim_K);
    cx.out.value("required", rc.required);
    cx.out.value("trace_max", rc.trace_max);
    cx.out.value("trace_bound", rc.bound);
    cx.out.flag("hypothesis", rc.hypothesis);
    cx.out.flag("curvature_ok", rc.curvature_ok);
    cx.out.check("first_cor", rc.pass, rc.dim_K - rc.required, rc.hypothesis && rc.curvature_ok,
                 rc.hypothesis && rc.curvature_ok ? "" : "hypothesis fails");
    return;
  }
  if (lemma == "theorem_b") {
    const ChartPtr c = chart_of(f);
    const PatchPtr N = patch_by_name(f.str("patch"), c);
    const TheoremBReport b = theorem_b_check(*N, required_k(f), sampling_of(f, 4, 4));
    cx.out.value("foc", b.foc);
    cx.out.flag("r_vacuous", b.r.vacuous);
    cx.out.value("min_r", b.r.r);
    cx.out.value("ric_k_min", b.ric_k_min);
    cx.out.flag("curvature_ok", b.curvature_ok);
    cx.out.flag("condition", b.condition);
    cx.out.flag("hypothesis", b.hypothesis);
    cx.out.value("connectivity", b.predicted.value);
    cx.out.flag("connectivity_vacuous", b.predicted.vacuous);
    return;
  }
  if (lemma == "low_trace") {
    const int count = positive(f, "count", 1000);
    std::mt19937_64 rng(cx.seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    int held = 0, failed = 0, bad = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < count; ++trial) {
      const int l = 2 + trial % 5;
      Mat a(l, l);
      for (int i = 0; i < l * l; ++i) a(i) = nd(rng);
      const Mat A = 0.5 * (a + a.transpose());
      const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(l));
      const double lambda = ud(rng);
      const LowTraceResult r = low_trace_subspace(A, k, lambda);
      if (sym_eig(A).values.tail(k).sum() <= k * lambda) {
        ++held;
        double m = -1.0;
        if (r.hypothesis && r.V.cols() >= l - k + 1)
          m = lambda + 1e-9 - sym_eig(Mat(r.V.transpose() * A * r.V)).values.maxCoeff();
        if (m < 0.0) ++bad;
        worst = std::min(worst, m);
      } else {
        ++failed;
        const double m = r.hypothesis ? -1.0 : (r.witness.transpose() * A * r.witness).trace() - k * lambda;
        if (m <= 0.0) ++bad;
        worst = std::min(worst, m);
      }
    }
    cx.out.value("trials", count);
    cx.out.value("hypothesis_holds", held);
    cx.out.value("hypothesis_fails", failed);
    cx.out.check("low_trace", bad == 0, worst);
    return;
  }
  fail(ErrorKind::config, f.where() + ": lemma must be one of ricci, cot, first_cor, theorem_b, low_trace");
}

// ---------------------------------------------------------------------------
// frankel
// ---------------------------------------------------------------------------

inline void op_frankel(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"chart", "flat_dim", "patch", "patch2", "k", "param_density", "normal_density", "grid"});
  const ChartPtr c = chart_of(f);
  const PatchPtr N = patch_by_name(f.str("patch"), c);
  const PatchPtr Nt = patch_by_name(f.str("patch2"), c);
  DistanceOptions dopt;
  dopt.grid = positive(f, "grid", dopt.grid);
  const FrankelReport r = frankel_check(*N, *Nt, required_k(f), sampling_of(f, 8, 8), dopt);
  const double bound = r.r.r + r.rt.r;
  cx.out.value("dist", r.dist.distance);
  cx.out.value("r", r.r.r);
  cx.out.value("r_tilde", r.rt.r);
  cx.out.value("bound", bound);
  cx.out.value("equality_defect", std::abs(r.dist.distance - bound));
  cx.out.flag("dim_condition", r.dim_condition);
  cx.out.flag("certified", r.dist.certified);
  cx.out.check("frankel", r.bound, bound + r.slack - r.dist.distance);
}

// ---------------------------------------------------------------------------
// lift
// ---------------------------------------------------------------------------

inline double focal_or_given(const Fields& f, const SubmanifoldPatch& N) {
  if (f.has("foc")) return f.num("foc");
  const FocalRadius fr = focal_radius(N, Sampling{4, 4, 1});
  return fr.beyond_horizon ? std::numeric_limits<double>::infinity() : fr.value;
}

/// Random curve from x0 of length close to `target`: t -> exp(L t (cos(kt) a + sin(kt) b))
/// for random orthonormal a, b and a random turning rate k.
inline std::vector<Vec> random_curve(const MetricChart& c, const Vec& x0, double target, int points,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> uk(-2.0, 2.0);
  Mat cand(c.dim, 2);
  for (int i = 0; i < 2 * c.dim; ++i) cand(i) = nd(rng);
  const Mat ab = gram_schmidt(metric_at(c, x0), cand, 2);
  const double kappa = uk(rng);
  auto build = [&](double L) {
    std::vector<Vec> pts;
    for (int i = 0; i <= points; ++i) {
      const double t = static_cast<double>(i) / points;
      const Vec w = L * t * (std::cos(kappa * t) * ab.col(0) + std::sin(kappa * t) * ab.col(1));
      pts.push_back(exp_map(c, x0, w));
    }
    return pts;
  };
  double L = target;
  for (int it = 0; it < 4; ++it) L *= target / curve_length(c, build(L));
  return build(L);
}

inline void op_lift(OpContext& cx) {
  const Fields& f = cx.f;
  allow_keys(f, {"mode", "chart", "flat_dim", "patch", "u", "normal", "e", "b", "eps", "count", "points", "foc",
                 "max_fraction", "rows", "columns"});
  const std::string mode = f.str("mode");
  LiftOptions lo;

  if (mode == "random_curves") {
    const ChartPtr c = chart_of(f);
    const PatchPtr N = patch_of(f, c);
    const double foc = focal_or_given(f, *N);
    const int count = positive(f, "count", 100);
    const int points = positive(f, "points", 24);
    const double frac = f.num("max_fraction", 0.9);
    require(frac > 0.0 && frac < 1.0, ErrorKind::parameter, "max_fraction must lie in (0, 1)");
    const double cap = std::isfinite(foc) ? frac * foc : 1.0;
    std::mt19937_64 rng(cx.seed);
    std::uniform_real_distribution<double> ufrac(0.1, 1.0);
    const auto grid = parameter_grid(*N, 6);
    double roundtrip = 0.0, tube_excess = -std::numeric_limits<double>::infinity();
    int violations = 0, discontinuous = 0, skipped = 0;
    for (int done = 0; done < count;) {
      const Vec u0 = grid[rng() % grid.size()];
      const double target = ufrac(rng) * cap;
      LiftedCurve lc;
      try {
        lc = lift_curve(*N, random_curve(*c, N->point(u0), target, points, rng), u0, foc, lo);
      } catch (const Error& e) {
        // Curves that leave the chart are redrawn.
        if (e.kind() != ErrorKind::domain) throw;
        require(++skipped <= count, ErrorKind::domain, "random_curves: too many curves leave the chart");
        continue;
      }
      ++done;
      roundtrip = std::max(roundtrip, lc.pushforward_defect);
      const double excess = lc.max_norm - lc.source_length;
      tube_excess = std::max(tube_excess, excess);
      if (excess > 1e-6) ++violations;
      if (!lc.continuous) ++discontinuous;
    }
    cx.out.value("foc", foc);
    cx.out.value("curves", count);
    cx.out.value("roundtrip_defect", roundtrip);
    cx.out.value("tube_excess", tube_excess);
    cx.out.value("discontinuous", discontinuous);
    cx.out.value("skipped", skipped);
    cx.out.check("roundtrip", roundtrip <= 1e-6, 1e-6 - roundtrip);
    cx.out.check("tube_bound", violations == 0, 1e-6 - tube_excess);
    return;
  }
  if (mode == "bump_homotopy") {
    const ChartPtr c = chart_of(f);
    const PatchPtr N = patch_of(f, c);
    require(c->dim - N->dim_sub == 1, ErrorKind::parameter, "bump_homotopy needs a hypersurface");
    const double foc = focal_or_given(f, *N);
    const Vec u0 = parameters_of(f, *N);
    const Vec e = parameters_of(f, *N, "e");
    const double b = f.num("b"), eps = f.num("eps");
    const int mt = positive(f, "columns", 41), ms = positive(f, "rows", 9);
    require(mt >= 2 && ms >= 2, ErrorKind::parameter, "the grid needs at least 2 rows and 2 columns");
    HomotopyGrid H(ms);
    std::vector<std::vector<double>> height(ms);
    for (int s = 0; s < ms; ++s)
      for (int j = 0; j < mt; ++j) {
        const double t = b * j / (mt - 1);
        const double w = eps * (static_cast<double>(s) / (ms - 1)) * std::sin(kPi * t / b);
        const Vec u = u0 + t * e;
        H[s].push_back(w == 0.0 ? N->point(u) : exp_normal(*N, u, normal_of(f, *N, u), w));
        height[s].push_back(std::abs(w));
      }
    const LiftedHomotopy L = lift_homotopy(*N, H, foc, lo);
    double match = 0.0, height_err = 0.0;
    for (double d : L.match_defect) match = std::max(match, d);
    for (int s = 0; s < ms; ++s)
      for (int j = 0; j < mt; ++j) height_err = std::max(height_err, std::abs(L.grid[s][j].norm - height[s][j]));
    cx.out.value("foc", foc);
    cx.out.value("match_defect", match);
    cx.out.value("boundary_defect", L.boundary_defect);
    cx.out.value("height_error", height_err);
    cx.out.value("max_norm", L.max_norm);
    cx.out.flag("continuous", L.continuous);
    cx.out.check("matched", L.matched, lo.match_tol - match);
    return;
  }
  if (mode == "no_lift") {
    const ChartPtr c = chart_of(f);
    const PatchPtr N = patch_of(f, c);
    const Vec u = parameters_of(f, *N);
    const double foc = focal_or_given(f, *N);
    const NoLiftReport r = no_lift_certificate(*N, u, normal_of(f, *N, u), f.num("b"), foc, lo);
    cx.out.value("foc", foc);
    cx.out.flag("hypothesis", r.hypothesis);
    cx.out.value("end_norm", r.end_norm);
    cx.out.value("lower_bound", r.lower_bound);
    cx.out.value("initial_segment_defect", r.initial_segment_defect);
    cx.out.flag("obstructed", r.obstructed);
    cx.out.check("no_lift", r.certified, r.end_norm - 0.1, r.hypothesis,
                 r.hypothesis ? "" : "b >= 2 foc: diagnostic only");
    return;
  }
  if (mode == "long_homotopy") {
    const int mt = positive(f, "columns", 61), ms = positive(f, "rows", 21);
    require(mt >= 2 && ms >= 2, ErrorKind::parameter, "the grid needs at least 2 rows and 2 columns");
    const ChartPtr c = chart_by_name("s3_unit");
    const auto T = patch_by_name("clifford_torus", c);
    // Row 0 runs inside the torus, the last row is the normal chord of length pi/2.
    HomotopyGrid H(ms);
    for (int s = 0; s < ms; ++s)
      for (int j = 0; j < mt; ++j) {
        const double t = (kPi / 2) * j / (mt - 1);
        const double sig = static_cast<double>(s) / (ms - 1);
        Vec g(4), c0(4);
        g << std::cos(t) + std::sin(t), 0.0, std::cos(t) - std::sin(t), 0.0;
        c0 << 1.0, 0.0, std::cos(2 * t), std::sin(2 * t);
        H[s].push_back(stereo(((1 - sig) * c0 + sig * g).normalized()));
      }
    const LongHomotopyReport r = long_homotopy_scan(*T, H, kPi / 4);
    cx.out.flag("applicable", r.applicable);
    cx.out.value("max_length", r.max_length);
    cx.out.value("two_foc", r.two_foc);
    cx.out.check("long_row", r.pass, r.max_length - r.two_foc + r.slack, r.applicable, r.reason);
    return;
  }
  fail(ErrorKind::config, f.where() + ": mode must be one of random_curves, bump_homotopy, no_lift, long_homotopy");
}

}  // namespace curvlab::cli

#include "curvlab/cli_run.hpp"

#endif  // CURVLAB_CLI_OPS_HPP
