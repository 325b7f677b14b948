#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvlab/jacobi.hpp"
#include "curvlab/zoo.hpp"
#include "support.hpp"

using namespace curvlab;
using testing_support::random_point;
using testing_support::random_unit;

namespace {

// Great circle in the X1X2-plane of S^3: stays on the unit circle of the chart.
PathPtr s3_circle(double T) {
  const auto c = chart_by_name("s3_unit");
  return share(integrate_geodesic(c, Vec::Unit(3, 0), Vec::Unit(3, 1), T));
}

PathPtr clifford_normal_path(double T, double a = 0.0, double b = 0.0) {
  const auto c = chart_by_name("s3_unit");
  const Vec X = clifford_point(a, b);
  Vec W(4);
  W << std::cos(a), std::sin(a), -std::cos(b), -std::sin(b);
  W /= std::sqrt(2.0);
  return share(integrate_geodesic(c, stereo(X), stereo_push(X, W), T));
}

LagrangianFamily clifford_family(double T) {
  const auto path = clifford_normal_path(T);
  const SubmanifoldPatch torus = make_clifford_torus(path->chart);
  return lagrangian_from_submanifold(path, torus, Vec::Zero(2));
}

}  // namespace

TEST(JacobiField, SineOnS3) {
  const auto p = s3_circle(3.0);
  const JacobiField f = integrate_jacobi(p, Vec::Zero(2), Vec::Unit(2, 0));
  for (size_t i = 0; i < p->samples.size(); ++i) {
    const double t = p->samples[i].t;
    EXPECT_NEAR(f.J[i](0), std::sin(t), 1e-6);
    EXPECT_NEAR(f.J[i](1), 0.0, 1e-9);
    EXPECT_NEAR(f.Jp[i](0), std::cos(t), 1e-6);
  }
}

TEST(JacobiField, LinearInFlat) {
  const auto c = chart_by_name("flat_rn");
  const auto p = share(integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 2), 2.0));
  const JacobiField f = integrate_jacobi(p, Vec::Unit(2, 0), Vec::Unit(2, 1));
  for (size_t i = 0; i < p->samples.size(); ++i) {
    const double t = p->samples[i].t;
    EXPECT_NEAR((f.J[i] - (Vec(2) << 1.0, t).finished()).norm(), 0.0, 1e-12);
  }
}

TEST(JacobiField, Superposition) {
  const auto c = chart_by_name("cp2_fs");
  std::mt19937_64 rng(61);
  const Vec x0 = random_point(rng, 4, 0.5);
  const auto p = share(integrate_geodesic(c, x0, random_unit(rng, metric_at(*c, x0)), 1.5));
  const Vec a0 = testing_support::gaussian(rng, 3), a1 = testing_support::gaussian(rng, 3);
  const Vec b0 = testing_support::gaussian(rng, 3), b1 = testing_support::gaussian(rng, 3);
  const JacobiField A = integrate_jacobi(p, a0, a1), B = integrate_jacobi(p, b0, b1);
  const JacobiField C = integrate_jacobi(p, 2.0 * a0 - 3.0 * b0, 2.0 * a1 - 3.0 * b1);
  for (size_t i = 0; i < p->samples.size(); ++i) EXPECT_LT((C.J[i] - 2.0 * A.J[i] + 3.0 * B.J[i]).norm(), 1e-8);
}

// Oracle: J is the s-derivative of the geodesic variation t -> exp(x(s), t v(s)).
TEST(JacobiField, MatchesGeodesicVariation) {
  std::mt19937_64 rng(67);
  for (const char* name : {"cp2_fs", "s2x2_k3", "s3_unit"}) {
    const auto c = chart_by_name(name);
    const int n = c->dim;
    const Vec x0 = random_point(rng, n, 0.4);
    const Mat g0 = metric_at(*c, x0);
    const Vec v0 = random_unit(rng, g0);
    Vec w = testing_support::gaussian(rng, n);
    w -= inner(g0, w, v0) * v0;
    auto vel = [&](double s) {
      const Vec x = x0 + s * w;
      return Vec(v0 / norm(metric_at(*c, x), v0));
    };
    const double T = 1.2, h = 1e-4;
    PathOptions plain;
    plain.frame = false;
    plain.jacobi = false;
    const Vec xp = integrate_geodesic(c, x0 + h * w, vel(h), T, 1e-9, plain).back().x;
    const Vec xm = integrate_geodesic(c, x0 - h * w, vel(-h), T, 1e-9, plain).back().x;
    const Vec dx = (xp - xm) / (2 * h);

    const auto p = share(integrate_geodesic(c, x0, v0, T));
    const Vec dv = (vel(h) - vel(-h)) / (2 * h);
    const Vec Dv = dv + christoffel(*c, x0).contract(w, v0);
    const Mat& E0 = p->front().frame;
    const JacobiField f = integrate_jacobi(p, E0.transpose() * g0 * w, E0.transpose() * g0 * Dv);
    EXPECT_NEAR(inner(g0, Dv, v0), 0.0, 1e-8) << name;
    const Vec J = p->back().frame * f.J.back();
    EXPECT_LT((J - dx).norm(), 1e-6 * std::max(1.0, dx.norm())) << name;
  }
}

TEST(Symplectic, ClosedFormsAndConstancy) {
  const auto p = s3_circle(2.5);
  const JacobiField s = integrate_jacobi(p, Vec::Zero(2), Vec::Unit(2, 0));
  const JacobiField co = integrate_jacobi(p, Vec::Unit(2, 0), Vec::Zero(2));
  for (size_t i = 0; i < p->samples.size(); i += 20) {
    EXPECT_EQ(symplectic_form(s, s, i), 0.0);
    EXPECT_NEAR(symplectic_form(s, co, i), 1.0, 1e-8);
  }
  std::mt19937_64 rng(71);
  for (const char* name : {"cp2_fs", "s2x2_k3"}) {
    const auto c = chart_by_name(name);
    const Vec x0 = random_point(rng, 4, 0.5);
    const auto q = share(integrate_geodesic(c, x0, random_unit(rng, metric_at(*c, x0)), 2.0));
    const JacobiField A = integrate_jacobi(q, testing_support::gaussian(rng, 3), testing_support::gaussian(rng, 3));
    const JacobiField B = integrate_jacobi(q, testing_support::gaussian(rng, 3), testing_support::gaussian(rng, 3));
    const double w0 = symplectic_form(A, B, 0);
    for (size_t i = 0; i < q->samples.size(); ++i) EXPECT_NEAR(symplectic_form(A, B, i), w0, 10 * q->tol) << name;
  }
}

TEST(Lagrangian, PointFamilyOnS3) {
  const auto p = s3_circle(2 * kPi - 0.01);
  const LagrangianFamily L = lagrangian_from_point(p);
  EXPECT_LE(omega_defect(L), 10 * p->tol);
  const auto recs = singular_times(L, 0.0, p->t_max);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_NEAR(recs[0].t, kPi, 1e-7);
  EXPECT_EQ(recs[0].multiplicity, 2);
  EXPECT_TRUE(recs[0].confident);
  EXPECT_EQ(full_index_space(recs, 2).cols(), 2);
}

TEST(Lagrangian, ProductConjugateTime) {
  const auto c = chart_by_name("s2x2_k3");
  const Vec x0 = default_point(*c);
  const Mat g = metric_at(*c, x0);
  const Vec v0 = (Vec(4) << 0.6, 0.8, 0.0, 0.0).finished() / std::sqrt(g(0, 0));
  const auto p = share(integrate_geodesic(c, x0, v0, 2.5));
  const auto rec = first_singular_time(lagrangian_from_point(p), 2.5);
  ASSERT_TRUE(rec.has_value());
  EXPECT_NEAR(rec->t, kPi / std::sqrt(3.0), 1e-7);
  EXPECT_EQ(rec->multiplicity, 1);
}

TEST(Lagrangian, FubiniStudyConjugateTime) {
  const auto c = chart_by_name("cp2_fs");
  const Vec x0 = default_point(*c);
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec v0 = random_unit(rng, metric_at(*c, x0));
    // Geodesics may leave the affine chart near the line at infinity; only the
    // part before the exit is used.
    const auto p = share(integrate_geodesic(c, x0, v0, 2.0));
    const auto recs = singular_times(lagrangian_from_point(p), 0.0, p->t_max);
    if (p->truncated && p->t_max < kPi / 2 + 0.01) continue;
    ASSERT_GE(recs.size(), 1u);
    EXPECT_NEAR(recs[0].t, kPi / 2, 1e-7);
    EXPECT_EQ(recs[0].multiplicity, 1);
  }
}

TEST(Lagrangian, FlatHasNoSingularTimes) {
  const auto c = chart_by_name("flat_rn");
  const auto p = share(integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 0), 5.0));
  const LagrangianFamily L = lagrangian_from_point(p);
  EXPECT_TRUE(singular_times(L, 0.0, 5.0).empty());
  EXPECT_EQ(full_index_space(L, 0.0, 5.0).cols(), 0);
}

TEST(Lagrangian, EquatorFocalTime) {
  const auto c = chart_by_name("s3_unit");
  const SubmanifoldPatch eq = make_equator_s2(c);
  const Vec u = (Vec(2) << 0.3, -0.2).finished();
  const Vec x = eq.point(u);
  const Vec nu = Vec::Unit(3, 0) / std::sqrt(metric_at(*c, x)(0, 0));
  const auto p = share(normal_geodesic(eq, u, nu, 2.0));
  const LagrangianFamily L = lagrangian_from_submanifold(p, eq, u);
  EXPECT_LE(omega_defect(L), 10 * p->tol);
  const auto recs = singular_times(L, 0.0, 2.0);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_NEAR(recs[0].t, kPi / 2, 1e-7);
  EXPECT_EQ(recs[0].multiplicity, 2);
  // cos(t) fields
  const JacobiField f = L.field(Vec::Unit(2, 0));
  for (size_t i = 0; i < p->samples.size(); i += 40) EXPECT_NEAR(f.J[i].norm(), std::abs(std::cos(p->samples[i].t)), 1e-7);
}

TEST(Lagrangian, CliffordFocalTimes) {
  const LagrangianFamily L = clifford_family(kPi);
  EXPECT_LE(omega_defect(L), 10 * L.path->tol);
  const auto recs = singular_times(L, 0.0, kPi);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_NEAR(recs[0].t, kPi / 4, 1e-7);
  EXPECT_NEAR(recs[1].t, 3 * kPi / 4, 1e-7);
  EXPECT_EQ(recs[0].multiplicity, 1);
  EXPECT_EQ(recs[1].multiplicity, 1);
  EXPECT_EQ(full_index_space(recs, 2).cols(), 2);
  // closed-form determinant (cos t - sin t)(cos t + sin t) vanishes at the same times
  for (const auto& r : recs) EXPECT_NEAR(std::cos(2 * r.t), 0.0, 1e-5);
}

TEST(Lagrangian, PointPatchReducesToPointFamily) {
  const auto c = chart_by_name("s3_unit");
  const SubmanifoldPatch pt = make_point_patch("point", c, Vec::Unit(3, 0));
  const auto p = s3_circle(1.0);
  const LagrangianFamily L = lagrangian_from_submanifold(p, pt, Vec(0));
  const LagrangianFamily P = lagrangian_from_point(p);
  EXPECT_EQ((L.initial - P.initial).norm(), 0.0);
}

TEST(Lagrangian, NonOrthogonalStartRejected) {
  const auto c = chart_by_name("s3_unit");
  const SubmanifoldPatch eq = make_equator_s2(c);
  const Vec u = Vec::Zero(2);
  const Vec v = (Vec(3) << 1.0, 1.0, 0.0).finished();
  const auto p = share(integrate_geodesic(c, eq.point(u), v / norm(metric_at(*c, eq.point(u)), v), 1.0));
  try {
    lagrangian_from_submanifold(p, eq, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Riccati, CotangentOnS3) {
  const auto p = s3_circle(3.1);
  const LagrangianFamily L = lagrangian_from_point(p);
  for (double t = 0.01; t <= 3.1; t += 0.01) {
    const RiccatiOperator R = riccati(L, t);
    EXPECT_FALSE(R.singular);
    EXPECT_LT((R.matrix - std::cos(t) / std::sin(t) * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-5) << t;
    EXPECT_LE(R.asymmetry, 100 * p->tol);
  }
}

TEST(Riccati, InverseTimeInFlat) {
  const auto c = chart_by_name("flat_rn");
  const auto p = share(integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 0), 3.0));
  const LagrangianFamily L = lagrangian_from_point(p);
  for (double t : {0.01, 0.5, 1.0, 2.9}) EXPECT_LT((riccati_full(L, t) - Mat::Identity(2, 2) / t).norm(), 1e-9);
}

TEST(Riccati, StartsAtShapeOperator) {
  const LagrangianFamily L = clifford_family(1.0);
  const RiccatiOperator R0 = riccati(L, 0.0);
  ASSERT_EQ(R0.matrix.rows(), 2);
  const Vec ev = sym_eig(R0.matrix).values;
  EXPECT_NEAR(ev(0), -1.0, 1e-9);
  EXPECT_NEAR(ev(1), 1.0, 1e-9);
  const Mat expect = L.tangent_components * L.shape * L.tangent_components.transpose();
  for (double t : {1e-3, 1e-4}) {
    const Mat S = riccati_full(L, t);
    EXPECT_LT((S - expect).cwiseAbs().maxCoeff(), 3 * t) << t;
  }
  EXPECT_LT((riccati_full(L, 0.0) - expect).cwiseAbs().maxCoeff(), 100 * L.path->tol);
}

TEST(Riccati, EquationResidual) {
  std::mt19937_64 rng(79);
  for (const char* name : {"cp2_fs", "s2x2_k3"}) {
    const auto c = chart_by_name(name);
    const Vec x0 = default_point(*c);
    const auto p = share(integrate_geodesic(c, x0, random_unit(rng, metric_at(*c, x0)), 3.0));
    const LagrangianFamily L = lagrangian_from_point(p);
    const auto recs = singular_times(L, 0.0, p->t_max);
    for (double t = 0.2; t <= p->t_max - 0.2; t += 0.05) {
      double d = t;
      for (const auto& r : recs) d = std::min(d, std::abs(t - r.t));
      if (d < 0.05) continue;
      const double h = std::min(2e-4, d / 1000);
      // fourth-order central difference of S
      const Mat dS = (-riccati_full(L, t + 2 * h) + 8 * riccati_full(L, t + h) - 8 * riccati_full(L, t - h) +
                      riccati_full(L, t - 2 * h)) /
                     (12 * h);
      const Mat S = riccati_full(L, t);
      const Mat res = dS + S * S + curvature_along(*p, t);
      EXPECT_LT(res.cwiseAbs().maxCoeff(), 100 * p->tol) << name << " t=" << t << " d=" << d;
      EXPECT_LE(asymmetry(S), 100 * p->tol * std::max(1.0, 1.0 / d));
    }
  }
}

TEST(Riccati, BlowUpBeforeConjugatePoint) {
  const auto p = s3_circle(3.2);
  const LagrangianFamily L = lagrangian_from_point(p);
  const double t1 = kPi;
  for (double d : {0.5, 0.1, 0.01, 1e-3, 1e-4}) {
    const double lmin = sym_eig(riccati_full(L, t1 - d)).values(0);
    EXPECT_LE(lmin, -1.0 / d + 1.0);
  }
}

TEST(Riccati, DefinedOnlyOnKPerp) {
  const LagrangianFamily L = clifford_family(kPi);
  const auto recs = singular_times(L, 0.0, kPi);
  const Mat K = full_index_space(recs, 2);
  const double t1 = recs[0].t;
  const RiccatiOperator R = riccati(L, t1, &K);
  EXPECT_EQ(R.basis.cols(), 0);  // K(t1) is everything here
  const RiccatiOperator Rk = riccati(L, t1);  // only the kernel at t1 removed
  EXPECT_TRUE(Rk.singular);
  EXPECT_EQ(Rk.basis.cols(), 1);
  const auto [J, Jp] = L.values_at(t1);
  const Vec bad = Jp * recs[0].kernel.col(0);
  try {
    riccati_apply(L, t1, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ill_defined);
  }
  const Vec ok = riccati_apply(L, t1, Rk.basis.col(0));
  EXPECT_TRUE(ok.allFinite());
}
