#ifndef CURVLAB_AUTODIFF_HPP
#define CURVLAB_AUTODIFF_HPP

#include <cmath>

namespace curvlab {

/// Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0.
///
/// Evaluating a smooth function with the seed x_k -> x_k + e1, x_l -> x_l + e2
/// yields f, df/dx_k, df/dx_l and the mixed second derivative d2f/dx_k dx_l,
/// all exact up to rounding. Charts and submanifold embeddings are written as
/// generic callables so they can be evaluated on doubles and on HyperDuals.
struct HyperDual {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double value) : v(value) {}  // NOLINT: implicit by intent
  constexpr HyperDual(double value, double e1, double e2, double e12)
      : v(value), d1(e1), d2(e2), d12(e12) {}

  HyperDual& operator+=(const HyperDual& o) {
    v += o.v; d1 += o.d1; d2 += o.d2; d12 += o.d12;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    v -= o.v; d1 -= o.d1; d2 -= o.d2; d12 -= o.d12;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    *this = HyperDual(v * o.v, d1 * o.v + v * o.d1, d2 * o.v + v * o.d2,
                      d12 * o.v + d1 * o.d2 + d2 * o.d1 + v * o.d12);
    return *this;
  }
};

// Lifts a scalar function with known first and second derivative.
inline HyperDual chain(const HyperDual& a, double f, double df, double ddf) {
  return {f, df * a.d1, df * a.d2, df * a.d12 + ddf * a.d1 * a.d2};
}

inline HyperDual operator-(const HyperDual& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
inline HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
inline HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
inline HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
inline HyperDual operator+(HyperDual a, double b) { a.v += b; return a; }
inline HyperDual operator+(double b, HyperDual a) { a.v += b; return a; }
inline HyperDual operator-(HyperDual a, double b) { a.v -= b; return a; }
inline HyperDual operator-(double b, const HyperDual& a) { return -a + b; }
inline HyperDual operator*(HyperDual a, double b) {
  a.v *= b; a.d1 *= b; a.d2 *= b; a.d12 *= b;
  return a;
}
inline HyperDual operator*(double b, HyperDual a) { return a * b; }

inline HyperDual reciprocal(const HyperDual& a) {
  const double r = 1.0 / a.v;
  return chain(a, r, -r * r, 2.0 * r * r * r);
}
inline HyperDual operator/(const HyperDual& a, const HyperDual& b) { return a * reciprocal(b); }
inline HyperDual operator/(const HyperDual& a, double b) { return a * (1.0 / b); }
inline HyperDual operator/(double a, const HyperDual& b) { return a * reciprocal(b); }

inline bool operator<(const HyperDual& a, const HyperDual& b) { return a.v < b.v; }
inline bool operator>(const HyperDual& a, const HyperDual& b) { return a.v > b.v; }

inline HyperDual sin(const HyperDual& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, s, c, -s);
}
inline HyperDual cos(const HyperDual& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return chain(a, c, -s, -c);
}
inline HyperDual sqrt(const HyperDual& a) {
  const double r = std::sqrt(a.v);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}
inline HyperDual exp(const HyperDual& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline HyperDual log(const HyperDual& a) {
  return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline HyperDual pow(const HyperDual& a, double p) {
  const double f = std::pow(a.v, p);
  return chain(a, f, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.v; }

}  // namespace curvlab

#endif  // CURVLAB_AUTODIFF_HPP
