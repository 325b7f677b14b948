#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvlab/submanifold.hpp"
#include "curvlab/zoo.hpp"
#include "support.hpp"

using namespace curvlab;
using testing_support::gaussian;

namespace {

ChartPtr s3() { return chart_by_name("s3_unit"); }

Vec clifford_normal(const SubmanifoldPatch& T, const Vec& u) {
  const PatchFrame pf = patch_frame(T, u);
  return pf.normal_frame.col(0);
}

// Brute-force extremes of Tr(S|_W) over random k-frames.
std::pair<double, double> random_frame_traces(const Mat& s, int k, int count, std::mt19937_64& rng) {
  const int l = static_cast<int>(s.rows());
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < count; ++i) {
    Mat a(l, k);
    for (int j = 0; j < k; ++j) a.col(j) = gaussian(rng, l);
    const Mat q = Eigen::HouseholderQR<Mat>(a).householderQ() * Mat::Identity(l, k);
    const double tr = (q.transpose() * s * q).trace();
    lo = std::min(lo, tr);
    hi = std::max(hi, tr);
  }
  return {lo, hi};
}

}  // namespace

TEST(ShapeOperator, CliffordEigenvaluesPlusMinusOne) {
  const auto T = make_clifford_torus(s3());
  for (double a : {0.0, 1.1, 2.5})
    for (double b : {0.3, 4.0}) {
      const Vec u = (Vec(2) << a, b).finished();
      for (double sign : {1.0, -1.0}) {
        const Mat S = shape_operator(T, u, sign * clifford_normal(T, u)).matrix;
        EXPECT_LE(asymmetry(S), 1e-8);
        const Vec ev = sym_eig(S).values;
        EXPECT_NEAR(ev(0), -1.0, 1e-7);
        EXPECT_NEAR(ev(1), 1.0, 1e-7);
      }
    }
}

TEST(ShapeOperator, TotallyGeodesicPatchesVanish) {
  const auto c = s3();
  const auto circle = make_coord_circle(c);
  const auto eq = make_equator_s2(c);
  for (double th : {0.0, 0.7, 3.0}) {
    const Vec u = Vec::Constant(1, th);
    const PatchFrame pf = patch_frame(circle, u);
    for (int j = 0; j < 2; ++j) EXPECT_LE(shape_operator(circle, pf, pf.normal_frame.col(j)).matrix.norm(), 1e-8);
  }
  const Vec u = (Vec(2) << 0.4, -1.2).finished();
  const PatchFrame pf = patch_frame(eq, u);
  EXPECT_LE(shape_operator(eq, pf, pf.normal_frame.col(0)).matrix.norm(), 1e-8);
}

TEST(ShapeOperator, MatchesNormalFieldDerivative) {
  // <S_v X, Y> = <nabla_X nu, Y> for the unit normal field nu extended along N.
  const auto c = s3();
  const auto T = make_clifford_torus(c);
  const Vec u = (Vec(2) << 0.8, 2.1).finished();
  const PatchFrame pf = patch_frame(T, u);
  const Mat S = shape_operator(T, pf, pf.normal_frame.col(0)).matrix;
  const Christoffel G = christoffel(*c, pf.x);
  const double h = 1e-5;
  Mat fd(2, 2);
  for (int i = 0; i < 2; ++i) {
    Vec up = u, um = u;
    up(i) += h;
    um(i) -= h;
    // Keep the normal orientation continuous by matching against the base normal.
    auto nu_at = [&](const Vec& w) {
      const PatchFrame q = patch_frame(T, w);
      Vec n = q.normal_frame.col(0);
      if (inner(pf.g, n, pf.normal_frame.col(0)) < 0) n = -n;
      return n;
    };
    const Vec dnu = (nu_at(up) - nu_at(um)) / (2 * h);
    const Vec X = pf.tangents.col(i);
    const Vec cov = dnu + G.contract(X, pf.normal_frame.col(0));
    for (int j = 0; j < 2; ++j) fd(i, j) = inner(pf.g, cov, pf.tangents.col(j));
  }
  // fd is expressed in the coordinate tangent basis; move S there.
  const Mat A = pf.tangents.transpose() * pf.g * pf.tangent_frame;  // coordinate tangents vs frame
  const Mat Sc = A * S * A.transpose();
  EXPECT_LE((fd - Sc).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ShapeOperator, RejectsTangentVector) {
  const auto T = make_clifford_torus(s3());
  const Vec u = Vec::Zero(2);
  const PatchFrame pf = patch_frame(T, u);
  try {
    shape_operator(T, pf, pf.tangent_frame.col(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(TraceExtremes, CliffordAndZero) {
  const auto T = make_clifford_torus(s3());
  const Vec u = (Vec(2) << 0.2, 0.9).finished();
  const Mat S = shape_operator(T, u, clifford_normal(T, u)).matrix;
  auto e1 = trace_extremes(S, 1);
  EXPECT_NEAR(e1.min, -1.0, 1e-7);
  EXPECT_NEAR(e1.max, 1.0, 1e-7);
  auto e2 = trace_extremes(S, 2);
  EXPECT_NEAR(e2.min, 0.0, 1e-7);
  EXPECT_NEAR(e2.max, 0.0, 1e-7);
  auto z = trace_extremes(Mat::Zero(3, 3), 2);
  EXPECT_EQ(z.min, 0.0);
  EXPECT_EQ(z.max, 0.0);
  EXPECT_THROW(trace_extremes(S, 3), Error);
  EXPECT_THROW(trace_extremes(S, 0), Error);
}

TEST(TraceExtremes, KyFanCertificateAgainstRandomFrames) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int l = 2 + trial % 4;
    Mat a = gaussian(rng, l * l).reshaped(l, l);
    const Mat s = 0.5 * (a + a.transpose());
    for (int k = 1; k <= l; ++k) {
      const auto ex = trace_extremes(s, k);
      const auto [lo, hi] = random_frame_traces(s, k, 1000, rng);
      EXPECT_GE(lo, ex.min - 1e-10);
      EXPECT_LE(hi, ex.max + 1e-10);
      // The extremes are attained on eigenvector frames.
      const SymEig ev = sym_eig(s);
      EXPECT_NEAR((ev.vectors.leftCols(k).transpose() * s * ev.vectors.leftCols(k)).trace(), ex.min, 1e-9);
      EXPECT_NEAR((ev.vectors.rightCols(k).transpose() * s * ev.vectors.rightCols(k)).trace(), ex.max, 1e-9);
    }
  }
}

TEST(MinAdmissibleR, ZooValues) {
  const auto c = s3();
  const auto T = make_clifford_torus(c);
  const auto circ = make_coord_circle(c);
  const auto r1 = min_admissible_r(T, 1);
  EXPECT_NEAR(r1.r, kPi / 4, 1e-7);
  EXPECT_FALSE(r1.sampling_warning);
  EXPECT_NEAR(min_admissible_r(T, 2).r, 0.0, 1e-7);
  EXPECT_NEAR(min_admissible_r(circ, 1).r, 0.0, 1e-7);
  EXPECT_TRUE(min_admissible_r(circ, 2).vacuous);
  EXPECT_THROW(min_admissible_r(T, 0), Error);
}

TEST(Sampling, GridsAreNested) {
  const auto T = make_clifford_torus(s3());
  const auto coarse = parameter_grid(T, 4), fine = parameter_grid(T, 8);
  EXPECT_EQ(coarse.size(), 16u);
  EXPECT_EQ(fine.size(), 64u);
  for (const Vec& u : coarse) {
    bool found = false;
    for (const Vec& w : fine) found = found || (u - w).norm() < 1e-14;
    EXPECT_TRUE(found);
  }
  for (int c = 1; c <= 4; ++c)
    for (const Vec& d : sphere_directions(c, 4)) EXPECT_NEAR(d.norm(), 1.0, 1e-14);
}

TEST(FocalRadius, CliffordTorus) {
  const auto T = make_clifford_torus(s3());
  const auto fr = focal_radius(T);
  EXPECT_NEAR(fr.value, kPi / 4, 1e-4);
  EXPECT_FALSE(fr.beyond_horizon);
  EXPECT_EQ(fr.multiplicity, 1);
  // cot(t) = 1 at the first focal time and the second lies at 3 pi / 4.
  EXPECT_NEAR(1.0 / std::tan(fr.value), 1.0, 1e-5);
  ASSERT_GE(fr.focal_times.size(), 2u);
  EXPECT_NEAR(fr.focal_times[1], 3 * kPi / 4, 1e-4);
}

TEST(FocalRadius, EquatorAndPoint) {
  const auto c = s3();
  const auto eq = focal_radius(make_equator_s2(c));
  EXPECT_NEAR(eq.value, kPi / 2, 1e-4);
  const auto pt = make_point_patch("point", c, default_point(*c));
  const auto fp = focal_radius(pt, {2, 2, 1});
  EXPECT_NEAR(fp.value, kPi, 1e-4);
  EXPECT_EQ(fp.multiplicity, 2);
}

TEST(FocalRadius, HorizonMarkerInFlatSpace) {
  const auto c = chart_by_name("flat_rn", 3);
  const auto pt = make_point_patch("point", c, Vec::Zero(3));
  const auto fr = focal_radius(pt, {2, 2, 1});
  EXPECT_TRUE(fr.beyond_horizon);
  EXPECT_DOUBLE_EQ(fr.value, fr.horizon);
}

TEST(FocalRadius, RefinementDoesNotIncrease) {
  const auto T = make_clifford_torus(s3());
  const Sampling s{4, 4, 1};
  const double coarse = focal_radius(T, s).value;
  const double fine = focal_radius(T, s.refined()).value;
  EXPECT_LE(fine, coarse + 1e-9);
}

TEST(Distance, CliffordToCoordinateCircle) {
  const auto c = s3();
  const auto T = make_clifford_torus(c);
  const auto circ = make_coord_circle(c);
  const auto d = distance(T, circ);
  EXPECT_NEAR(d.distance, kPi / 4, 1e-4);
  EXPECT_TRUE(d.certified);
  EXPECT_LE(d.angle_defect_start, 1e-4);
  EXPECT_LE(d.angle_defect_end, 1e-4);
  EXPECT_LE(d.distance, d.proxy_min + 1e-9);
  const auto back = distance(circ, T);
  EXPECT_NEAR(back.distance, d.distance, 1e-5);
  // The connecting geodesic ends on the circle.
  const auto path = connecting_path(T, d);
  EXPECT_LE((path.back().x - d.end).norm(), 1e-6);
}

TEST(Distance, SelfIsZero) {
  const auto T = make_clifford_torus(s3());
  const auto d = distance(T, T);
  EXPECT_NEAR(d.distance, 0.0, 1e-6);
}

TEST(Distance, AntipodalPoints) {
  const auto c = s3();
  const auto a = make_point_patch("a", c, (Vec(3) << 1.0, 0.0, 0.0).finished());
  const auto b = make_point_patch("b", c, (Vec(3) << -1.0, 0.0, 0.0).finished());
  const auto d = distance(a, b);
  EXPECT_NEAR(d.distance, kPi, 1e-4);
  const auto e = distance(b, a);
  EXPECT_NEAR(e.distance, d.distance, 1e-5);
}

TEST(Distance, FlatPointsMatchEuclidean) {
  const auto c = chart_by_name("flat_rn", 3);
  const auto a = make_point_patch("a", c, (Vec(3) << 0.0, 1.0, 2.0).finished());
  const auto b = make_point_patch("b", c, (Vec(3) << 3.0, -1.0, 0.5).finished());
  const auto d = distance(a, b);
  EXPECT_NEAR(d.distance, std::sqrt(9.0 + 4.0 + 2.25), 1e-8);
  EXPECT_TRUE(d.certified);
}
