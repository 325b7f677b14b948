#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvlab/comparison.hpp"
#include "curvlab/zoo.hpp"
#include "support.hpp"

using namespace curvlab;
using testing_support::gaussian;
using testing_support::random_unit;

namespace {

ChartPtr s3() { return chart_by_name("s3_unit"); }

struct CliffordSetup {
  PatchPtr T;
  Vec u;
  LagrangianFamily L;
};

CliffordSetup clifford_family(double length) {
  CliffordSetup s;
  s.T = std::make_shared<const SubmanifoldPatch>(make_clifford_torus(s3()));
  s.u = (Vec(2) << 0.8, 2.1).finished();
  const Vec nu = patch_frame(*s.T, s.u).normal_frame.col(0);
  s.L = lagrangian_from_submanifold(share(normal_geodesic(*s.T, s.u, nu, length)), *s.T, s.u);
  return s;
}

LagrangianFamily point_family(ChartPtr c, const Vec& x0, const Vec& v0, double length) {
  return lagrangian_from_point(share(integrate_geodesic(c, x0, v0, length)));
}

}  // namespace

TEST(RicciComparison, PointFamilyOnSphereIsEquality) {
  const auto c = s3();
  const Vec x0 = default_point(*c);
  const Vec v0 = Vec::Unit(3, 1) / std::sqrt(metric_at(*c, x0)(1, 1));
  const LagrangianFamily L = point_family(c, x0, v0, 3.0);
  // Started at t0, S_{t0} = cot(t0) I, so s0 = t0 satisfies the initial trace bound.
  const double t0 = 1e-3;
  const Mat W0 = Vec::Unit(2, 0);
  const auto rep = verify_ricci_comparison(L, W0, t0, t0, 3.0);
  ASSERT_TRUE(rep.applicable) << rep.reason;
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(std::abs(rep.worst_margin), 1e-4);
  for (const auto& s : rep.samples) EXPECT_EQ(s.dim_h, 1);
}

TEST(RicciComparison, CliffordEqualityCase) {
  const double t1 = 3 * kPi / 4 - 0.01;
  const auto cs = clifford_family(t1);
  const Mat S0 = riccati(cs.L, 0.0).matrix;
  const SymEig e = sym_eig(S0);
  EXPECT_NEAR(e.values(1), 1.0, 1e-7);
  const Mat W0 = riccati(cs.L, 0.0).basis * e.vectors.col(1);
  const auto rep = verify_ricci_comparison(cs.L, W0, kPi / 4, 0.0, t1);
  ASSERT_TRUE(rep.applicable) << rep.reason;
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(std::abs(rep.worst_margin), 1e-4);
  // Past the second focal time the +1 field vanishes outside V.
  const auto long_cs = clifford_family(3 * kPi / 4 + 0.05);
  const auto rep2 = verify_ricci_comparison(long_cs.L, W0, kPi / 4, 0.0, 3 * kPi / 4 + 0.05);
  EXPECT_FALSE(rep2.applicable);
}

TEST(RicciComparison, FlatIsInapplicable) {
  const auto c = chart_by_name("flat_rn", 3);
  const LagrangianFamily L = point_family(c, Vec::Zero(3), Vec::Unit(3, 0), 2.0);
  const auto rep = verify_ricci_comparison(L, Mat(Vec::Unit(2, 0)), 1e-3, 1e-3, 2.0);
  EXPECT_FALSE(rep.applicable);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(CotBound, SpherePointFamilyIsEquality) {
  const auto c = s3();
  const Vec x0 = default_point(*c);
  const Vec v0 = Vec::Unit(3, 2) / std::sqrt(metric_at(*c, x0)(2, 2));
  const LagrangianFamily L = point_family(c, x0, v0, kPi - 0.01);
  const auto rep = verify_cot_bound(L, Mat(2, 0), 2, 1e-3, kPi - 0.01);
  ASSERT_TRUE(rep.applicable) << rep.reason;
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(std::abs(rep.worst_margin), 1e-4);
  EXPECT_TRUE(rep.excluded.empty());
  // The family collapses at pi, so V = {0} is not of full index up to pi.
  const LagrangianFamily Lpi = point_family(c, x0, v0, kPi + 0.05);
  EXPECT_FALSE(verify_cot_bound(Lpi, Mat(2, 0), 2, 1e-3, kPi + 0.05).applicable);
}

TEST(CotBound, ProductOfSpheresMixedDirectionIsStrict) {
  const auto c = chart_by_name("s2x2_k3");
  const Vec x0 = default_point(*c);
  const Mat g = metric_at(*c, x0);
  Vec v0 = (Vec(4) << 0.0, 1.0, 0.0, 0.7).finished();
  v0 /= std::sqrt(v0.dot(g * v0));
  const double t1 = 1.8;
  const LagrangianFamily L = point_family(c, x0, v0, t1);
  ASSERT_FALSE(first_singular_time(L, t1).has_value());
  const auto rep = verify_cot_bound(L, Mat(3, 0), 3, 1e-3, t1);
  ASSERT_TRUE(rep.applicable) << rep.reason;
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.ric_k_min, 3.0, 1e-6);
  for (const auto& s : rep.samples)
    if (s.t > 0.3) EXPECT_GT(s.margin, 1e-6) << "t = " << s.t;
}

TEST(FirstCor, CliffordAndEquator) {
  const auto cs = clifford_family(3 * kPi / 4 + 0.01);
  const auto rc = check_first_cor(cs.L, cs.L.tangent_components, kPi / 4, 1);
  EXPECT_TRUE(rc.hypothesis);
  EXPECT_TRUE(rc.curvature_ok);
  EXPECT_EQ(rc.required, 2);
  EXPECT_EQ(rc.dim_K, 2);
  EXPECT_TRUE(rc.pass);

  const auto c = s3();
  const auto eq = std::make_shared<const SubmanifoldPatch>(make_equator_s2(c));
  const Vec u = (Vec(2) << 0.3, -0.4).finished();
  const Vec nu = patch_frame(*eq, u).normal_frame.col(0);
  const auto L = lagrangian_from_submanifold(share(normal_geodesic(*eq, u, nu, kPi / 2 + 0.01)), *eq, u);
  const auto re = check_first_cor(L, L.tangent_components, 0.0, 1);
  EXPECT_TRUE(re.hypothesis);
  EXPECT_EQ(re.dim_K, 2);
  EXPECT_TRUE(re.pass);
}

TEST(FirstCor, RejectsRadiusOutOfRange) {
  const auto c = s3();
  const Vec x0 = default_point(*c);
  const Vec v0 = Vec::Unit(3, 1) / std::sqrt(metric_at(*c, x0)(1, 1));
  const LagrangianFamily L = point_family(c, x0, v0, 3.5);
  try {
    check_first_cor(L, Mat::Identity(2, 2), kPi / 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parameter);
  }
}

TEST(LowTraceSubspace, Examples) {
  const Mat A = (Vec(3) << 3.0, 1.0, 0.0).finished().asDiagonal();
  const auto r = low_trace_subspace(A, 2, 2.0);
  ASSERT_TRUE(r.hypothesis);
  ASSERT_EQ(r.V.cols(), 2);
  EXPECT_NEAR(r.rayleigh_max, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(r.V.col(0).dot(Vec::Unit(3, 2))) + std::abs(r.V.col(1).dot(Vec::Unit(3, 1))), 2.0, 1e-12);

  const auto id = low_trace_subspace(1.5 * Mat::Identity(4, 4), 2, 1.5);
  ASSERT_TRUE(id.hypothesis);
  EXPECT_EQ(id.V.cols(), 4);

  const Mat B = (Vec(3) << 5.0, 0.0, 0.0).finished().asDiagonal();
  const auto w = low_trace_subspace(B, 1, 2.0);
  ASSERT_FALSE(w.hypothesis);
  ASSERT_EQ(w.witness.cols(), 1);
  EXPECT_NEAR(std::abs(w.witness(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(w.witness_trace, 5.0, 1e-12);
}

TEST(LowTraceSubspace, RandomMatrices) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  int held = 0, failed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int l = 2 + trial % 5;
    const Mat a = gaussian(rng, l * l).reshaped(l, l);
    const Mat A = 0.5 * (a + a.transpose());
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(l));
    const double lambda = ud(rng);
    const auto r = low_trace_subspace(A, k, lambda);
    const Vec ev = sym_eig(A).values;
    if (ev.tail(k).sum() <= k * lambda) {
      ++held;
      ASSERT_TRUE(r.hypothesis);
      ASSERT_GE(r.V.cols(), l - k + 1);
      const Mat q = r.V.transpose() * A * r.V;
      EXPECT_LE(sym_eig(q).values.maxCoeff(), lambda + 1e-9);
    } else {
      ++failed;
      ASSERT_FALSE(r.hypothesis);
      EXPECT_GT((r.witness.transpose() * A * r.witness).trace(), k * lambda);
    }
  }
  EXPECT_GT(held, 50);
  EXPECT_GT(failed, 50);
}

TEST(TheoremA, ZooManifolds) {
  const Sampling s{1, 3, 1};
  const auto c22 = chart_by_name("s2x2_k3");
  const auto a = theorem_a_check(c22, default_point(*c22), 3, s);
  EXPECT_NEAR(a.ric_k_min, 3.0, 1e-6);
  EXPECT_NEAR(a.conj, kPi / std::sqrt(3.0), 1e-6);
  EXPECT_TRUE(a.hypothesis);
  EXPECT_EQ(a.predicted.value, 1);

  const auto cp = chart_by_name("cp2_fs");
  const auto b = theorem_a_check(cp, default_point(*cp), 2, s);
  EXPECT_NEAR(b.ric_k_min, 2.0, 1e-6);
  EXPECT_NEAR(b.conj, kPi / 2, 1e-6);
  EXPECT_FALSE(b.hypothesis);

  const auto c = s3();
  const auto d = theorem_a_check(c, default_point(*c), 1, s);
  EXPECT_NEAR(d.ric_k_min, 1.0, 1e-6);
  EXPECT_NEAR(d.conj, kPi, 1e-6);
  EXPECT_TRUE(d.hypothesis);
  EXPECT_EQ(d.predicted.value, 2);
}

TEST(TheoremB, ZooSubmanifolds) {
  const auto c = s3();
  const Sampling s{4, 4, 1};
  const auto tor = theorem_b_check(make_clifford_torus(c), 1, s);
  EXPECT_NEAR(tor.r.r, kPi / 4, 1e-7);
  EXPECT_NEAR(tor.foc, kPi / 4, 1e-6);
  EXPECT_FALSE(tor.condition);
  EXPECT_FALSE(tor.hypothesis);

  const auto eq = theorem_b_check(make_equator_s2(c), 1, s);
  EXPECT_NEAR(eq.r.r, 0.0, 1e-9);
  EXPECT_NEAR(eq.foc, kPi / 2, 1e-6);
  EXPECT_TRUE(eq.hypothesis);
  EXPECT_EQ(eq.predicted.value, 2);
  EXPECT_FALSE(eq.predicted.vacuous);

  const auto ci = theorem_b_check(make_coord_circle(c), 1, s);
  EXPECT_NEAR(ci.foc, kPi / 2, 1e-6);
  EXPECT_TRUE(ci.hypothesis);
  EXPECT_EQ(ci.predicted.value, 0);
  EXPECT_TRUE(ci.predicted.vacuous);
}

TEST(Frankel, CliffordAndCircleIsSharp) {
  const auto c = s3();
  const auto rep = frankel_check(make_clifford_torus(c), make_coord_circle(c), 1);
  EXPECT_TRUE(rep.dim_condition);
  EXPECT_NEAR(rep.r.r, kPi / 4, 1e-7);
  EXPECT_NEAR(rep.rt.r, 0.0, 1e-9);
  EXPECT_TRUE(rep.bound);
  EXPECT_LE(std::abs(rep.dist.distance - (rep.r.r + rep.rt.r)), 1e-4);
}

TEST(Frankel, IntersectingPairs) {
  const auto c = s3();
  const auto eqs = frankel_check(make_equator_s2(c), make_equator_s2(c, "equator2_s2_in_s3", 1), 1);
  EXPECT_TRUE(eqs.dim_condition);
  EXPECT_NEAR(eqs.dist.distance, 0.0, 1e-6);
  EXPECT_TRUE(eqs.bound);
  const auto self = frankel_check(make_clifford_torus(c), make_clifford_torus(c), 1);
  EXPECT_NEAR(self.dist.distance, 0.0, 1e-6);
  EXPECT_TRUE(self.bound);
}
