#ifndef CURVLAB_INDEX_SCENARIOS_HPP
#define CURVLAB_INDEX_SCENARIOS_HPP

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "curvlab/index.hpp"
#include "curvlab/zoo.hpp"

namespace curvlab {

/// A geodesic from N to Ntilde, normal at both ends.
struct IndexScenario {
  std::string pairing;
  std::string label;
  PatchPtr N, Nt;
  Vec u, ut;
  PathPtr path;
  bool focal_end = false;  // constructed so that b is a focal time of Lambda_N
};

namespace detail {

inline Vec unit_perp(std::mt19937_64& rng, const Mat& against) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::Index n = against.rows();
  for (;;) {
    Vec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = nd(rng);
    if (against.cols() > 0) {
      const Mat q = column_span(against, 1e-12);
      z -= q * (q.transpose() * z);
    }
    if (z.norm() > 1e-3) return z.normalized();
  }
}

inline Vec unit_for(std::mt19937_64& rng, const Mat& g) {
  const Vec z = unit_perp(rng, Mat(g.rows(), 0));
  return z / norm(g, z);
}

/// Random orthonormal columns of R^4 orthogonal to the columns of `against`.
inline Mat perp_frame4(std::mt19937_64& rng, const Mat& against, int count) {
  Mat out(against.rows(), count);
  Mat acc = against;
  for (int i = 0; i < count; ++i) {
    out.col(i) = unit_perp(rng, acc);
    Mat next(acc.rows(), acc.cols() + 1);
    next << acc, out.col(i);
    acc = next;
  }
  return out;
}

/// True when b is within `band` of a singular time of Lambda_N on (0, b + band].
inline bool near_singular(const LagrangianFamily& L, double b, double band) {
  const double reach = L.path->t_max;
  for (const auto& r : singular_times(L, 0.0, std::min(b + band, reach)))
    if (std::abs(r.t - b) < band) return true;
  return false;
}

/// Builds the S^3 scenario ending on a great subsphere of dimension lt through X(b)
/// orthogonal to the closed-form great circle X(t) = cos t X0 + sin t V0.
inline bool finish_s3(IndexScenario& sc, ChartPtr c, const Vec& X0, const Vec& V0, double b, int lt,
                      std::mt19937_64& rng) {
  GeodesicPath p = integrate_geodesic(c, stereo(X0), stereo_push(X0, V0), b);
  if (p.truncated) return false;
  sc.path = share(std::move(p));
  const Vec Xb = std::cos(b) * X0 + std::sin(b) * V0;
  const Vec Vb = -std::sin(b) * X0 + std::cos(b) * V0;
  if (lt == 0) {
    sc.Nt = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_end", c, sc.path->back().x));
    sc.ut = Vec(0);
  } else {
    Mat against(4, 2);
    against << Xb, Vb;
    const Mat T = perp_frame4(rng, against, lt);
    sc.Nt = std::make_shared<const SubmanifoldPatch>(make_great_subsphere("great_s" + std::to_string(lt), c, Xb, T));
    sc.ut = Vec::Zero(lt);
  }
  return true;
}

}  // namespace detail

/// Randomized endmanifold scenarios, `per_pairing` of each pairing, drawn from `seed`.
/// Lengths within `band` of a singular time of Lambda_N are redrawn, except in the
/// pairings that are focal by construction.
inline std::vector<IndexScenario> random_index_scenarios(std::uint64_t seed, int per_pairing, double band = 1e-3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto U = [&](double a, double b) { return a + (b - a) * unif(rng); };
  const ChartPtr s3 = chart_by_name("s3_unit");
  const ChartPtr s22 = chart_by_name("s2x2_k3");
  const auto eq = std::make_shared<const SubmanifoldPatch>(make_equator_s2(s3));
  const auto torus = std::make_shared<const SubmanifoldPatch>(make_clifford_torus(s3));
  const auto circle = std::make_shared<const SubmanifoldPatch>(make_coord_circle(s3));
  std::vector<IndexScenario> out;

  auto accept = [&](IndexScenario& sc, bool allow_focal) {
    if (!sc.path) return false;
    if (allow_focal) return true;
    const LagrangianFamily L = lagrangian_from_submanifold(sc.path, *sc.N, sc.u);
    return !detail::near_singular(L, sc.path->t_max, band);
  };
  auto draw = [&](const std::string& pairing, const std::function<bool(IndexScenario&)>& make, bool focal) {
    int made = 0;
    for (int attempt = 0; made < per_pairing && attempt < 50 * per_pairing; ++attempt) {
      IndexScenario sc;
      sc.pairing = pairing;
      sc.focal_end = focal;
      if (!make(sc) || !accept(sc, focal)) continue;
      sc.label = pairing + "#" + std::to_string(made++);
      out.push_back(std::move(sc));
    }
  };

  // Equator S^2 -> point / great circle / great sphere.
  draw("s3:equator->great", [&](IndexScenario& sc) {
    sc.N = eq;
    sc.u = (Vec(2) << U(-1, 1), U(-1, 1)).finished();
    const Vec X0 = unstereo(eq->point(sc.u));
    const Vec V0 = (unif(rng) < 0.5 ? 1.0 : -1.0) * Vec::Unit(4, 0);
    return detail::finish_s3(sc, s3, X0, V0, U(0.2, 3.0), static_cast<int>(U(0, 3)), rng);
  }, false);

  // Clifford torus -> point / great circle / great sphere.
  draw("s3:clifford->great", [&](IndexScenario& sc) {
    sc.N = torus;
    const double a = U(0, 2 * kPi), bb = U(0, 2 * kPi);
    sc.u = (Vec(2) << a, bb).finished();
    const Vec X0 = clifford_point(a, bb);
    Vec V0(4);
    V0 << std::cos(a), std::sin(a), -std::cos(bb), -std::sin(bb);
    V0 *= (unif(rng) < 0.5 ? 1.0 : -1.0) / std::sqrt(2.0);
    return detail::finish_s3(sc, s3, X0, V0, U(0.2, 3.0), static_cast<int>(U(0, 3)), rng);
  }, false);

  // Clifford torus -> Clifford torus along a self-connecting normal geodesic of length pi/2.
  draw("s3:clifford->clifford", [&](IndexScenario& sc) {
    sc.N = torus;
    sc.Nt = torus;
    const double a = U(0, 2 * kPi), bb = U(0, 2 * kPi);
    const double sgn = unif(rng) < 0.5 ? 1.0 : -1.0;
    sc.u = (Vec(2) << a, bb).finished();
    const Vec X0 = clifford_point(a, bb);
    Vec V0(4);
    V0 << std::cos(a), std::sin(a), -std::cos(bb), -std::sin(bb);
    V0 *= sgn / std::sqrt(2.0);
    GeodesicPath p = integrate_geodesic(s3, stereo(X0), stereo_push(X0, V0), kPi / 2);
    if (p.truncated) return false;
    sc.path = share(std::move(p));
    // X(pi/2) = V0 = (e^{ia}, e^{i(b + pi)}) / sqrt 2 up to the sign.
    sc.ut = sgn > 0 ? (Vec(2) << a, bb + kPi).finished() : (Vec(2) << a + kPi, bb).finished();
    return true;
  }, false);

  // Point -> point in S^3.
  draw("s3:point->point", [&](IndexScenario& sc) {
    Vec X0 = detail::unit_perp(rng, Mat(4, 0));
    if (X0(3) > 0.5) X0(3) = -X0(3);
    const Vec V0 = detail::unit_perp(rng, X0);
    sc.N = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_start", s3, stereo(X0)));
    sc.u = Vec(0);
    return detail::finish_s3(sc, s3, X0, V0, U(0.3, 5.5), 0, rng);
  }, false);

  // Point -> point in S^2_3 x S^2_3.
  draw("s2x2:point->point", [&](IndexScenario& sc) {
    const Vec x0 = (Vec(4) << U(-1, 1), U(-1, 1), U(-1, 1), U(-1, 1)).finished();
    const Vec v0 = detail::unit_for(rng, metric_at(*s22, x0));
    GeodesicPath p = integrate_geodesic(s22, x0, v0, U(0.3, 4.0));
    if (p.truncated) return false;
    sc.path = share(std::move(p));
    sc.N = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_start", s22, x0));
    sc.u = Vec(0);
    sc.Nt = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_end", s22, sc.path->back().x));
    sc.ut = Vec(0);
    return true;
  }, false);

  // Factor sphere -> factor sphere (or a point) in S^2_3 x S^2_3, moving in the second factor.
  draw("s2x2:factor->factor", [&](IndexScenario& sc) {
    const Vec w0 = (Vec(2) << U(-1, 1), U(-1, 1)).finished();
    sc.N = std::make_shared<const SubmanifoldPatch>(make_factor_sphere(s22, w0, "factor_start"));
    sc.u = (Vec(2) << U(-1, 1), U(-1, 1)).finished();
    const Vec x0 = sc.N->point(sc.u);
    Vec v0 = Vec::Zero(4);
    const double ang = U(0, 2 * kPi);
    v0(2) = std::cos(ang);
    v0(3) = std::sin(ang);
    v0 /= norm(metric_at(*s22, x0), v0);
    GeodesicPath p = integrate_geodesic(s22, x0, v0, U(0.2, 4.0));
    if (p.truncated) return false;
    sc.path = share(std::move(p));
    const Vec xb = sc.path->back().x;
    if (unif(rng) < 0.3) {
      sc.Nt = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_end", s22, xb));
      sc.ut = Vec(0);
    } else {
      sc.Nt = std::make_shared<const SubmanifoldPatch>(make_factor_sphere(s22, xb.tail(2), "factor_end"));
      sc.ut = xb.head(2);
    }
    return true;
  }, false);

  // Focal endpoints: Clifford torus -> coordinate circle at pi/4, equator -> point at
  // pi/2, point -> point at pi.
  draw("s3:focal", [&](IndexScenario& sc) {
    const int kind = static_cast<int>(U(0, 3));
    if (kind == 0) {
      sc.N = torus;
      sc.Nt = circle;
      const double a = U(0, 2 * kPi), bb = U(0, 2 * kPi);
      sc.u = (Vec(2) << a, bb).finished();
      const Vec X0 = clifford_point(a, bb);
      Vec V0(4);
      V0 << std::cos(a), std::sin(a), -std::cos(bb), -std::sin(bb);
      V0 /= std::sqrt(2.0);
      GeodesicPath p = integrate_geodesic(s3, stereo(X0), stereo_push(X0, V0), kPi / 4);
      if (p.truncated) return false;
      sc.path = share(std::move(p));
      sc.ut = Vec::Constant(1, a);
      return true;
    }
    if (kind == 1) {
      sc.N = eq;
      sc.u = (Vec(2) << U(-1, 1), U(-1, 1)).finished();
      const Vec X0 = unstereo(eq->point(sc.u));
      return detail::finish_s3(sc, s3, X0, Vec::Unit(4, 0), kPi / 2, 0, rng);
    }
    Vec X0 = detail::unit_perp(rng, Mat(4, 0));
    if (X0(3) > 0.5) X0(3) = -X0(3);
    const Vec V0 = detail::unit_perp(rng, X0);
    sc.N = std::make_shared<const SubmanifoldPatch>(make_point_patch("point_start", s3, stereo(X0)));
    sc.u = Vec(0);
    return detail::finish_s3(sc, s3, X0, V0, kPi, 0, rng);
  }, true);
  return out;
}

}  // namespace curvlab

#endif  // CURVLAB_INDEX_SCENARIOS_HPP
