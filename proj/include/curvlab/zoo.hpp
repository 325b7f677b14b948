#ifndef CURVLAB_ZOO_HPP
#define CURVLAB_ZOO_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "curvlab/manifold.hpp"
#include "curvlab/patch.hpp"

namespace curvlab {

// ---------------------------------------------------------------------------
// Stereographic coordinates on the round sphere S^n of radius rho, projected
// from the pole (0, ..., 0, 1) of the unit sphere in R^{n+1}.
// ---------------------------------------------------------------------------

/// Unit-sphere embedding coordinates of a stereographic point.
template <class T>
void sphere_from_stereo(int n, const T* x, T* X) {
  T r2 = T(0.0);
  for (int i = 0; i < n; ++i) r2 = r2 + x[i] * x[i];
  const T inv = 1.0 / (r2 + 1.0);
  for (int i = 0; i < n; ++i) X[i] = 2.0 * x[i] * inv;
  X[n] = (r2 - 1.0) * inv;
}

template <class T>
void stereo_from_sphere(int n, const T* X, T* x) {
  const T den = 1.0 - X[n];
  for (int i = 0; i < n; ++i) x[i] = X[i] / den;
}

inline Vec stereo(const Vec& X) {
  const int n = static_cast<int>(X.size()) - 1;
  Vec x(n);
  stereo_from_sphere(n, X.data(), x.data());
  return x;
}

inline Vec unstereo(const Vec& x) {
  const int n = static_cast<int>(x.size());
  Vec X(n + 1);
  sphere_from_stereo(n, x.data(), X.data());
  return X;
}

/// Pushes an ambient R^{n+1} tangent vector W at the sphere point X into stereographic coordinates.
inline Vec stereo_push(const Vec& X, const Vec& W) {
  const Eigen::Index n = X.size() - 1;
  const double den = 1.0 - X(n);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = W(i) / den + X(i) * W(n) / (den * den);
  return v;
}

inline constexpr double kStereoBox = 10.0;

inline MetricChart make_round_sphere(std::string name, int n, double radius) {
  std::vector<std::string> coords;
  for (int i = 0; i < n; ++i) coords.push_back("x" + std::to_string(i + 1));
  const double rho2 = radius * radius;
  MetricChart c = make_chart(std::move(name), n, coords, std::vector<double>(n, -kStereoBox),
                             std::vector<double>(n, kStereoBox), [n, rho2](const auto* x, auto* g) {
                               using T = std::remove_cv_t<std::remove_reference_t<decltype(*x)>>;
                               T r2 = T(0.0);
                               for (int i = 0; i < n; ++i) r2 = r2 + x[i] * x[i];
                               const T conf = 4.0 * rho2 / ((1.0 + r2) * (1.0 + r2));
                               for (int i = 0; i < n; ++i)
                                 for (int j = 0; j < n; ++j) g[i * n + j] = (i == j) ? conf : T(0.0);
                             });
  c.description = "round sphere of radius " + std::to_string(radius) + " in stereographic coordinates";
  return c;
}

inline MetricChart make_flat(int n) {
  std::vector<std::string> coords;
  for (int i = 0; i < n; ++i) coords.push_back("x" + std::to_string(i + 1));
  MetricChart c = make_chart("flat_rn", n, coords, std::vector<double>(n, -1e3), std::vector<double>(n, 1e3),
                             [n](const auto* x, auto* g) {
                               using T = std::remove_cv_t<std::remove_reference_t<decltype(*x)>>;
                               for (int i = 0; i < n; ++i)
                                 for (int j = 0; j < n; ++j) g[i * n + j] = T(i == j ? 1.0 : 0.0);
                             });
  c.description = "Euclidean space R^" + std::to_string(n);
  return c;
}

/// Flat cylinder (R/Z) x R: Euclidean chart with the first coordinate identified mod 1.
inline MetricChart make_flat_cylinder() {
  MetricChart c = make_flat(2);
  c.name = "flat_cylinder";
  c.coords = {"theta", "y"};
  c.wrap = [](double* x) { x[0] -= std::round(x[0]); };
  c.description = "flat cylinder (R/Z) x R, first coordinate periodic with period 1";
  return c;
}

/// Product of two round 2-spheres of curvature `kappa`, each in stereographic coordinates.
inline MetricChart make_s2xs2(std::string name, double kappa) {
  const double rho2 = 1.0 / kappa;
  MetricChart c = make_chart(std::move(name), 4, {"y1", "y2", "w1", "w2"}, std::vector<double>(4, -kStereoBox),
                             std::vector<double>(4, kStereoBox), [rho2](const auto* x, auto* g) {
                               using T = std::remove_cv_t<std::remove_reference_t<decltype(*x)>>;
                               for (int i = 0; i < 16; ++i) g[i] = T(0.0);
                               const T r1 = x[0] * x[0] + x[1] * x[1];
                               const T r2 = x[2] * x[2] + x[3] * x[3];
                               const T c1 = 4.0 * rho2 / ((1.0 + r1) * (1.0 + r1));
                               const T c2 = 4.0 * rho2 / ((1.0 + r2) * (1.0 + r2));
                               g[0] = c1;
                               g[5] = c1;
                               g[10] = c2;
                               g[15] = c2;
                             });
  c.description = "product of two round 2-spheres of curvature " + std::to_string(kappa);
  return c;
}

/// Complex projective plane, Fubini-Study metric normalized to 1 <= sec <= 4, affine
/// chart z = (x1 + i y1, x2 + i y2). g = ((1+|z|^2) I - P P^T - Q Q^T) / (1+|z|^2)^2
/// where P, Q are the real and imaginary parts of the linear form xi -> <z, xi>.
inline MetricChart make_cp2() {
  MetricChart c = make_chart("cp2_fs", 4, {"x1", "y1", "x2", "y2"}, std::vector<double>(4, -20.0),
                             std::vector<double>(4, 20.0), [](const auto* x, auto* g) {
                               using T = std::remove_cv_t<std::remove_reference_t<decltype(*x)>>;
                               const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
                               const T p[4] = {x[0], x[1], x[2], x[3]};
                               const T q[4] = {-x[1], x[0], -x[3], x[2]};
                               const T s = 1.0 + r2;
                               const T inv = 1.0 / (s * s);
                               for (int i = 0; i < 4; ++i)
                                 for (int j = 0; j < 4; ++j) {
                                   T e = -(p[i] * p[j] + q[i] * q[j]);
                                   if (i == j) e = e + s;
                                   g[i * 4 + j] = e * inv;
                                 }
                             });
  c.description = "CP^2 with the Fubini-Study metric, sectional curvature in [1, 4], affine chart";
  return c;
}

// ---------------------------------------------------------------------------
// Submanifolds of the unit 3-sphere (stereographic chart); C^2 = R^4 via
// z1 = X1 + i X2, z2 = X3 + i X4. The projection pole is (0, i).
// ---------------------------------------------------------------------------

inline SubmanifoldPatch make_clifford_torus(ChartPtr s3) {
  return make_patch("clifford_torus", std::move(s3), 2, {0.0, 0.0}, {2 * kPi, 2 * kPi}, {true, true},
                    [](const auto* u, auto* x) {
                      using std::cos;
                      using std::sin;
                      using T = std::remove_cv_t<std::remove_reference_t<decltype(*u)>>;
                      const double h = 1.0 / std::sqrt(2.0);
                      const T X[4] = {h * cos(u[0]), h * sin(u[0]), h * cos(u[1]), h * sin(u[1])};
                      stereo_from_sphere(3, X, x);
                    });
}

/// Clifford torus embedding coordinates (z1, z2) = (e^{ia}, e^{ib}) / sqrt 2.
inline Vec clifford_point(double a, double b) {
  const double h = 1.0 / std::sqrt(2.0);
  Vec X(4);
  X << h * std::cos(a), h * std::sin(a), h * std::cos(b), h * std::sin(b);
  return X;
}

inline SubmanifoldPatch make_coord_circle(ChartPtr s3) {
  return make_patch("coord_circle", std::move(s3), 1, {0.0}, {2 * kPi}, {true}, [](const auto* u, auto* x) {
    using std::cos;
    using std::sin;
    x[0] = cos(u[0]);
    x[1] = sin(u[0]);
    x[2] = 0.0 * u[0];
  });
}

/// Great 2-sphere {X1 = 0} of S^3, i.e. the coordinate plane x1 = 0.
inline SubmanifoldPatch make_equator_s2(ChartPtr s3, std::string name = "equator_s2_in_s3", int zero_axis = 0) {
  return make_patch(std::move(name), std::move(s3), 2, {-2.0, -2.0}, {2.0, 2.0}, {false, false},
                    [zero_axis](const auto* u, auto* x) {
                      int j = 0;
                      for (int i = 0; i < 3; ++i) x[i] = (i == zero_axis) ? 0.0 * u[0] : u[j++];
                    });
}

/// Great l-sphere through the unit vector `center` of R^{n+1} spanned with the
/// orthonormal `tangents`, parametrized stereographically with u = 0 at center.
inline SubmanifoldPatch make_great_subsphere(std::string name, ChartPtr sphere, const Vec& center,
                                             const Mat& tangents) {
  const int l = static_cast<int>(tangents.cols());
  const int n = sphere->dim;
  return make_patch(std::move(name), std::move(sphere), l, std::vector<double>(l, -1.0), std::vector<double>(l, 1.0),
                    std::vector<bool>(l, false), [center, tangents, l, n](const auto* u, auto* x) {
                      using T = std::remove_cv_t<std::remove_reference_t<decltype(*u)>>;
                      T r2 = T(0.0);
                      for (int i = 0; i < l; ++i) r2 = r2 + u[i] * u[i];
                      const T inv = 1.0 / (1.0 + r2);
                      std::vector<T> X(n + 1);
                      for (int k = 0; k <= n; ++k) {
                        T e = (1.0 - r2) * center(k);
                        for (int i = 0; i < l; ++i) e = e + 2.0 * u[i] * tangents(k, i);
                        X[k] = e * inv;
                      }
                      stereo_from_sphere(n, X.data(), x);
                    });
}

/// S^2 x {w} inside the product of two 2-spheres.
inline SubmanifoldPatch make_factor_sphere(ChartPtr prod, Vec w, std::string name = "factor_sphere") {
  return make_patch(std::move(name), std::move(prod), 2, {-2.0, -2.0}, {2.0, 2.0}, {false, false},
                    [w](const auto* u, auto* x) {
                      x[0] = u[0];
                      x[1] = u[1];
                      x[2] = w(0) + 0.0 * u[0];
                      x[3] = w(1) + 0.0 * u[0];
                    });
}

/// The line {theta = 0} of the flat cylinder, a closed geodesic orthogonal to the periodic direction.
inline SubmanifoldPatch make_cylinder_line(ChartPtr cyl) {
  return make_patch("cylinder_line", std::move(cyl), 1, {-2.0}, {2.0}, {false}, [](const auto* u, auto* x) {
    x[0] = 0.0 * u[0];
    x[1] = u[0];
  });
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct KnownConstant {
  std::string quantity;
  std::string value;
  std::string source;  // "published" (reported in the literature) or "closed-form"
};

struct ZooEntry {
  std::string name;
  std::string kind;  // "chart" or "patch"
  std::string ambient;
  int dim = 0;
  std::string description;
  std::vector<KnownConstant> constants;
};

inline const std::vector<ZooEntry>& zoo_entries() {
  static const std::vector<ZooEntry> entries = {
      {"flat_rn", "chart", "", 3, "Euclidean R^n (default n = 3)", {{"sec", "0", "closed-form"}}},
      {"flat_cylinder", "chart", "", 2, "flat cylinder (R/Z) x R", {{"sec", "0", "closed-form"}}},
      {"s2_unit", "chart", "", 2, "unit round 2-sphere, stereographic", {{"sec", "1", "closed-form"}}},
      {"s3_unit",
       "chart",
       "",
       3,
       "unit round 3-sphere, stereographic from (0, i) in C^2",
       {{"sec", "1", "closed-form"}, {"conj", "pi", "closed-form"}}},
      {"s2x2_k3",
       "chart",
       "",
       4,
       "S^2_3 x S^2_3, each factor of curvature 3",
       {{"Ric_3", "3", "published"}, {"conj", "pi*sqrt(1/3)", "published"}}},
      {"cp2_fs",
       "chart",
       "",
       4,
       "CP^2 Fubini-Study, 1 <= sec <= 4",
       {{"curvature eigenvalues", "{1, 1, 4}", "closed-form"}, {"conj", "pi/2", "published"}}},
      {"clifford_torus",
       "patch",
       "s3_unit",
       2,
       "Clifford torus |z1| = |z2| = 1/sqrt 2",
       {{"|II|", "1", "published"}, {"foc", "pi/4", "published"}, {"second focal time", "3*pi/4", "closed-form"}}},
      {"coord_circle", "patch", "s3_unit", 1, "coordinate circle {(z, 0)}", {{"|II|", "0", "published"},
                                                                              {"dist to clifford_torus", "pi/4", "published"}}},
      {"equator_s2_in_s3", "patch", "s3_unit", 2, "great 2-sphere {X1 = 0}", {{"|II|", "0", "closed-form"},
                                                                               {"foc", "pi/2", "closed-form"}}},
      {"equator2_s2_in_s3", "patch", "s3_unit", 2, "great 2-sphere {X2 = 0}", {{"|II|", "0", "closed-form"}}},
      {"factor_sphere", "patch", "s2x2_k3", 2, "S^2_3 x {w}", {{"|II|", "0", "closed-form"}}},
      {"cylinder_line", "patch", "flat_cylinder", 1, "closed geodesic {theta = 0}", {{"foc", "inf", "closed-form"}}},
      {"point", "patch", "any", 0, "single point (parameter `at`, chart coordinates)", {}},
  };
  return entries;
}

inline std::vector<std::string> zoo_names(const std::string& kind) {
  std::vector<std::string> out;
  for (const auto& e : zoo_entries())
    if (e.kind == kind) out.push_back(e.name);
  return out;
}

inline std::string suggestion_list(const std::string& kind) {
  std::string s;
  for (const auto& n : zoo_names(kind)) s += (s.empty() ? "" : ", ") + n;
  return s;
}

inline ChartPtr chart_by_name(const std::string& name, int flat_dim = 3) {
  if (name == "flat_rn") return std::make_shared<const MetricChart>(make_flat(flat_dim));
  if (name == "flat_cylinder") return std::make_shared<const MetricChart>(make_flat_cylinder());
  if (name == "s2_unit") return std::make_shared<const MetricChart>(make_round_sphere("s2_unit", 2, 1.0));
  if (name == "s3_unit") return std::make_shared<const MetricChart>(make_round_sphere("s3_unit", 3, 1.0));
  if (name == "s2x2_k3") return std::make_shared<const MetricChart>(make_s2xs2("s2x2_k3", 3.0));
  if (name == "cp2_fs") return std::make_shared<const MetricChart>(make_cp2());
  fail(ErrorKind::unknown_name, "unknown chart '" + name + "'; known charts: " + suggestion_list("chart"));
}

/// Default point for `point` patches when none is given.
inline Vec default_point(const MetricChart& c) {
  if (c.name == "s3_unit") return Vec::Unit(3, 0);                   // X = (1, 0, 0, 0)
  if (c.name == "s2x2_k3") return (Vec(4) << 1.0, 0.0, 1.0, 0.0).finished();  // both factors on their equator
  if (c.name == "cp2_fs") return (Vec(4) << 0.5, 0.0, 0.5, 0.0).finished();
  return Vec::Zero(c.dim);
}

inline PatchPtr patch_by_name(const std::string& name, ChartPtr chart, const Vec* at = nullptr) {
  auto need = [&](const char* ambient) {
    require(chart->name == ambient, ErrorKind::parameter,
            "patch '" + name + "' lives in chart '" + ambient + "', not '" + chart->name + "'");
  };
  if (name == "point") {
    const Vec where = at ? *at : default_point(*chart);
    require(where.size() == chart->dim, ErrorKind::parameter, "point: coordinate count mismatch");
    return std::make_shared<const SubmanifoldPatch>(make_point_patch("point", chart, where));
  }
  if (name == "clifford_torus") {
    need("s3_unit");
    return std::make_shared<const SubmanifoldPatch>(make_clifford_torus(chart));
  }
  if (name == "coord_circle") {
    need("s3_unit");
    return std::make_shared<const SubmanifoldPatch>(make_coord_circle(chart));
  }
  if (name == "equator_s2_in_s3") {
    need("s3_unit");
    return std::make_shared<const SubmanifoldPatch>(make_equator_s2(chart));
  }
  if (name == "equator2_s2_in_s3") {
    need("s3_unit");
    return std::make_shared<const SubmanifoldPatch>(make_equator_s2(chart, "equator2_s2_in_s3", 1));
  }
  if (name == "factor_sphere") {
    need("s2x2_k3");
    const Vec w = at ? *at : (Vec(2) << 1.0, 0.0).finished();
    return std::make_shared<const SubmanifoldPatch>(make_factor_sphere(chart, w));
  }
  if (name == "cylinder_line") {
    need("flat_cylinder");
    return std::make_shared<const SubmanifoldPatch>(make_cylinder_line(chart));
  }
  fail(ErrorKind::unknown_name, "unknown submanifold '" + name + "'; known submanifolds: " + suggestion_list("patch"));
}

}  // namespace curvlab

#endif  // CURVLAB_ZOO_HPP
