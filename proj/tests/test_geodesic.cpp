#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "curvlab/geodesic.hpp"
#include "curvlab/zoo.hpp"
#include "support.hpp"

using namespace curvlab;
using testing_support::random_point;
using testing_support::random_unit;

namespace {

// Closed-form great circle through the unit-sphere point X0 with unit tangent W0.
Vec great_circle(const Vec& X0, const Vec& W0, double t) { return std::cos(t) * X0 + std::sin(t) * W0; }

// Ambient push-forward of a stereographic tangent vector, by central differences.
Vec unstereo_push(const Vec& x, const Vec& w) {
  const double h = 1e-6;
  return (unstereo(x + h * w) - unstereo(x - h * w)) / (2 * h);
}

PathOptions plain() {
  PathOptions o;
  o.frame = false;
  o.jacobi = false;
  return o;
}

}  // namespace

TEST(Geodesic, FlatStraightLine) {
  const auto c = chart_by_name("flat_rn");
  const GeodesicPath p = integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 0), 2.0);
  EXPECT_FALSE(p.truncated);
  for (const auto& s : p.samples) {
    EXPECT_NEAR((s.x - s.t * Vec::Unit(3, 0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((s.v - Vec::Unit(3, 0)).norm(), 0.0, 1e-12);
  }
  EXPECT_NEAR(p.t_max, 2.0, 1e-15);
}

TEST(Geodesic, StepSpacing) {
  const auto c = chart_by_name("s3_unit");
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    const GeodesicPath p = integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 0) / 2.0, 1.0, tol, plain());
    for (size_t i = 1; i < p.samples.size(); ++i)
      EXPECT_LE(p.samples[i].t - p.samples[i - 1].t, std::min(0.01, std::pow(tol, 0.25)) + 1e-15);
  }
}

TEST(Geodesic, MeridianOnPolarSphere) {
  const auto c = std::make_shared<const MetricChart>(
      make_chart("s2_polar", 2, {"theta", "phi"}, {1e-3, -10.0}, {kPi - 1e-3, 10.0}, [](const auto* x, auto* g) {
        using std::sin;
        const auto s = sin(x[0]);
        g[0] = 1.0 + 0.0 * x[0];
        g[1] = 0.0 * x[0];
        g[2] = 0.0 * x[0];
        g[3] = s * s;
      }));
  const Vec x0 = (Vec(2) << kPi / 2, 0.3).finished();
  const Vec v0 = (Vec(2) << -1.0, 0.0).finished();
  const GeodesicPath p = integrate_geodesic(c, x0, v0, kPi / 2 - 0.01);
  EXPECT_NEAR(p.back().x(0), 0.01, 1e-9);
  const GeodesicPath q = integrate_geodesic(c, x0, v0, kPi / 2 + 0.1);
  EXPECT_TRUE(q.truncated);
  EXPECT_NEAR(q.left_domain_at, kPi / 2, 0.01);
}

TEST(Geodesic, ReachesPoleOfStereographicSphere) {
  const auto c = chart_by_name("s2_unit");
  const GeodesicPath p = integrate_geodesic(c, Vec::Unit(2, 0), -Vec::Unit(2, 0), kPi / 2);
  EXPECT_LT(p.back().x.norm(), 1e-9);
}

TEST(Geodesic, AntipodeOnS3) {
  const auto c = chart_by_name("s3_unit");
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x0 = random_point(rng, 3, 0.5);
    const Mat g = metric_at(*c, x0);
    const Vec v0 = random_unit(rng, g);
    const GeodesicPath p = integrate_geodesic(c, x0, v0, kPi);
    if (p.truncated) continue;
    ++checked;
    const Vec X0 = unstereo(x0), W0 = unstereo_push(x0, v0);
    EXPECT_NEAR(W0.norm(), 1.0, 1e-8);
    EXPECT_NEAR((unstereo(p.back().x) + X0).norm(), 0.0, 1e-6);
    for (size_t i = 0; i < p.samples.size(); i += 50) {
      const auto& s = p.samples[i];
      EXPECT_NEAR((unstereo(s.x) - great_circle(X0, W0, s.t)).norm(), 0.0, 1e-8);
      EXPECT_NEAR(std::acos(std::clamp(unstereo(s.x).dot(X0), -1.0, 1.0)), s.t, 1e-6);
    }
  }
  EXPECT_GE(checked, 10);
}

TEST(Geodesic, SpeedAndFrameInvariants) {
  std::mt19937_64 rng(37);
  for (const char* name : {"s3_unit", "s2x2_k3", "cp2_fs"}) {
    const auto c = chart_by_name(name);
    const double tol = 1e-9;
    const Vec x0 = random_point(rng, c->dim, 0.5);
    const Vec v0 = random_unit(rng, metric_at(*c, x0));
    const GeodesicPath p = integrate_geodesic(c, x0, v0, 2.0, tol);
    ASSERT_FALSE(p.truncated) << name;
    const int m = c->dim - 1;
    for (const auto& s : p.samples) {
      const Mat g = metric_at(*c, s.x);
      EXPECT_NEAR(norm(g, s.v), 1.0, 10 * tol) << name;
      const Mat G = s.frame.transpose() * g * s.frame;
      EXPECT_LT((G - Mat::Identity(m, m)).cwiseAbs().maxCoeff(), 10 * tol) << name;
      EXPECT_LT((s.frame.transpose() * g * s.v).cwiseAbs().maxCoeff(), 10 * tol) << name;
    }
    EXPECT_LT(p.richardson_error, 1e-9);
  }
}

TEST(Geodesic, EquationResidual) {
  const auto c = chart_by_name("cp2_fs");
  const Vec x0 = (Vec(4) << 0.5, 0.0, 0.5, 0.0).finished();
  std::mt19937_64 rng(41);
  const Vec v0 = random_unit(rng, metric_at(*c, x0));
  const GeodesicPath p = integrate_geodesic(c, x0, v0, 1.0, 1e-9, plain());
  const double h = p.step;
  for (size_t i = 2; i + 2 < p.samples.size(); i += 25) {
    const auto& s = p.samples;
    const Vec acc = (-s[i + 2].x + 16 * s[i + 1].x - 30 * s[i].x + 16 * s[i - 1].x - s[i - 2].x) / (12 * h * h);
    const Vec res = acc + christoffel(*c, s[i].x).contract(s[i].v, s[i].v);
    EXPECT_LT(res.norm(), 1e-6);
  }
}

TEST(Geodesic, Reversibility) {
  std::mt19937_64 rng(43);
  for (const char* name : {"s3_unit", "cp2_fs", "s2x2_k3"}) {
    const auto c = chart_by_name(name);
    const double tol = 1e-9;
    const Vec x0 = random_point(rng, c->dim, 0.5);
    const Vec v0 = random_unit(rng, metric_at(*c, x0));
    const GeodesicPath p = integrate_geodesic(c, x0, v0, 1.5, tol, plain());
    const GeodesicPath q = integrate_geodesic(c, p.back().x, -p.back().v, 1.5, tol, plain());
    EXPECT_LT((q.back().x - x0).norm(), 100 * tol) << name;
  }
}

TEST(Geodesic, FourthOrderConvergence) {
  const auto c = chart_by_name("s3_unit");
  const Vec x0 = (Vec(3) << 0.2, -0.1, 0.3).finished();
  const Mat g = metric_at(*c, x0);
  const Vec v0 = (Vec(3) << 0.3, 0.5, -0.2).finished() / norm(g, (Vec(3) << 0.3, 0.5, -0.2).finished());
  const Vec X0 = unstereo(x0), W0 = unstereo_push(x0, v0);
  const double T = 1.2;
  auto err = [&](int steps) {
    detail::FlowState s{x0, v0, Mat(), Mat()};
    for (int i = 0; i < steps; ++i) s = detail::rk4_step(*c, s, T / steps, false, false);
    return (unstereo(s.x) - great_circle(X0, W0, T)).norm();
  };
  const double e1 = err(12), e2 = err(24), e3 = err(48);
  EXPECT_GE(e1 / e2, 8.0);
  EXPECT_GE(e2 / e3, 8.0);
}

TEST(Geodesic, EnergyLengthIdentity) {
  const auto c = chart_by_name("cp2_fs");
  const Vec x0 = (Vec(4) << 0.1, 0.2, -0.3, 0.4).finished();
  std::mt19937_64 rng(47);
  const Vec v0 = random_unit(rng, metric_at(*c, x0));
  const GeodesicPath p = integrate_geodesic(c, x0, v0, 1.3, 1e-9, plain());
  std::vector<Vec> pts;
  for (const auto& s : p.samples) pts.push_back(s.x);
  const double L = curve_length(*c, pts);
  EXPECT_NEAR(L, 1.3, 1e-6);
  EXPECT_NEAR(energy_length(*c, pts, 1.3), L, 1e-8);
}

TEST(Geodesic, LeavesDomain) {
  const auto c = chart_by_name("s3_unit");
  const GeodesicPath p = integrate_geodesic(c, Vec::Zero(3), Vec::Unit(3, 0) / 2.0, kPi);
  EXPECT_TRUE(p.truncated);
  EXPECT_GT(p.left_domain_at, kPi / 2);
  EXPECT_LT(p.left_domain_at, kPi);
  EXPECT_TRUE(c->contains(p.back().x));
}

TEST(Geodesic, NonUnitVelocityRejected) {
  const auto c = chart_by_name("flat_rn");
  EXPECT_THROW(integrate_geodesic(c, Vec::Zero(3), Vec::Constant(3, 1.0), 1.0), Error);
}

TEST(Transport, FlatConstant) {
  const auto c = chart_by_name("flat_rn");
  const Vec v0 = Vec::Constant(3, 1.0 / std::sqrt(3.0));
  const GeodesicPath p = integrate_geodesic(c, Vec::Zero(3), v0, 1.0);
  const Vec w0 = (Vec(3) << 1.0, -2.0, 0.5).finished();
  for (const Vec& w : parallel_transport(p, w0)) EXPECT_LT((w - w0).norm(), 1e-12);
}

TEST(Transport, EquatorLoopOnS2) {
  const auto c = chart_by_name("s2_unit");
  const Vec x0 = Vec::Unit(2, 0);  // equator is the unit circle, metric is the identity there
  const Vec v0 = Vec::Unit(2, 1);
  const double tol = 1e-9;
  const GeodesicPath p = integrate_geodesic(c, x0, v0, 2 * kPi, tol);
  ASSERT_FALSE(p.truncated);
  EXPECT_LT((p.back().x - x0).norm(), 1e-8);
  const Vec w0 = Vec::Unit(2, 0);  // normal to the equator
  const auto w = parallel_transport(p, w0);
  EXPECT_LT((w.back() - w0).norm(), 1e-8);
  for (size_t i = 0; i < w.size(); ++i) {
    const Mat g = metric_at(*c, p.samples[i].x);
    EXPECT_NEAR(inner(g, w[i], w[i]), 1.0, 10 * tol);
    EXPECT_NEAR(inner(g, w[i], p.samples[i].v), 0.0, 10 * tol);
  }
}

TEST(Transport, MatchesDirectIntegration) {
  // Independent oracle: integrate the transport ODE W' = -Gamma(v, W) along the stored samples.
  const auto c = chart_by_name("cp2_fs");
  const Vec x0 = (Vec(4) << 0.3, 0.1, 0.2, -0.1).finished();
  std::mt19937_64 rng(53);
  const Vec v0 = random_unit(rng, metric_at(*c, x0));
  const Vec w0 = testing_support::gaussian(rng, 4);
  const GeodesicPath p = integrate_geodesic(c, x0, v0, 1.0);
  const auto w = parallel_transport(p, w0);
  Vec W = w0;
  for (size_t i = 0; i + 1 < p.samples.size(); ++i) {
    const double h = p.samples[i + 1].t - p.samples[i].t;
    const PathSample mid = p.state_at(p.samples[i].t + h / 2);
    auto f = [&](const PathSample& s, const Vec& y) -> Vec { return -christoffel(*c, s.x).contract(s.v, y); };
    const Vec k1 = f(p.samples[i], W);
    const Vec k2 = f(mid, W + h / 2 * k1);
    const Vec k3 = f(mid, W + h / 2 * k2);
    const Vec k4 = f(p.samples[i + 1], W + h * k3);
    W += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  EXPECT_LT((W - w.back()).norm(), 1e-8);
}

TEST(ExpMap, FlatAndSphere) {
  const auto f = chart_by_name("flat_rn");
  const Vec w = (Vec(3) << 0.3, -1.0, 2.0).finished();
  EXPECT_LT((exp_map(*f, Vec::Ones(3), w) - Vec::Ones(3) - w).norm(), 1e-12);
  const auto c = chart_by_name("s3_unit");
  const Vec x0 = (Vec(3) << 0.2, 0.1, -0.4).finished();
  const Vec u = (Vec(3) << 0.5, -0.3, 0.2).finished();
  const Vec X0 = unstereo(x0), U = unstereo_push(x0, u);
  const double len = U.norm();
  EXPECT_LT((unstereo(exp_map(*c, x0, u)) - great_circle(X0, U / len, len)).norm(), 1e-9);
}

TEST(ExpNormal, EquatorOfS2ToPole) {
  const auto c = chart_by_name("s2_unit");
  const SubmanifoldPatch eq = make_patch("equator", c, 1, {0.0}, {2 * kPi}, {true}, [](const auto* u, auto* x) {
    using std::cos;
    using std::sin;
    x[0] = cos(u[0]);
    x[1] = sin(u[0]);
  });
  const Vec u = Vec::Constant(1, 0.7);
  const Vec nu = -(Vec(2) << std::cos(0.7), std::sin(0.7)).finished();
  EXPECT_LT(exp_normal(eq, u, nu, kPi / 2).norm(), 1e-9);
}

TEST(ExpNormal, CliffordTorusChords) {
  const auto c = chart_by_name("s3_unit");
  const SubmanifoldPatch T = make_clifford_torus(c);
  const Vec X = clifford_point(0.0, 0.0);
  const Vec W = (Vec(4) << 1.0, 0.0, -1.0, 0.0).finished() / std::sqrt(2.0);
  const Vec nu = stereo_push(X, W);
  const Vec u = Vec::Zero(2);
  const Vec at_quarter = unstereo(exp_normal(T, u, nu, kPi / 4));
  EXPECT_NEAR(at_quarter(2), 0.0, 1e-9);
  EXPECT_NEAR(at_quarter(3), 0.0, 1e-9);
  const Vec at_half = unstereo(exp_normal(T, u, nu, kPi / 2));
  EXPECT_LT((at_half - clifford_point(0.0, kPi)).norm(), 1e-9);
}

TEST(ExpNormal, RejectsTangentVector) {
  const auto c = chart_by_name("s3_unit");
  const SubmanifoldPatch T = make_clifford_torus(c);
  const PatchFrame pf = patch_frame(T, Vec::Zero(2));
  try {
    exp_normal(T, Vec::Zero(2), pf.tangent_frame.col(0), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}
