#pragma once

#include <cmath>

namespace tubevol {

/// Hyper-dual number a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0.
///
/// Evaluating f(x + e_i e1 + e_j e2) yields f, d_i f, d_j f and d_i d_j f
/// exactly (to rounding), which is how metric and embedding derivatives are
/// obtained for closed-form charts.
struct HyperDual {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double v) : a(v) {}  // NOLINT(google-explicit-constructor)
  constexpr HyperDual(double v, double e1, double e2, double e12) : a(v), b(e1), c(e2), d(e12) {}

  HyperDual& operator+=(const HyperDual& o) {
    a += o.a; b += o.b; c += o.c; d += o.d;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    a -= o.a; b -= o.b; c -= o.c; d -= o.d;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    *this = HyperDual(a * o.a, a * o.b + b * o.a, a * o.c + c * o.a,
                      a * o.d + b * o.c + c * o.b + d * o.a);
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o);
};

/// Applies a scalar function with derivatives f0, f1 = f', f2 = f'' at x.a.
inline HyperDual chain(const HyperDual& x, double f0, double f1, double f2) {
  return {f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
}

inline HyperDual operator+(HyperDual x, const HyperDual& y) { return x += y; }
inline HyperDual operator-(HyperDual x, const HyperDual& y) { return x -= y; }
inline HyperDual operator*(HyperDual x, const HyperDual& y) { return x *= y; }
inline HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b, -x.c, -x.d}; }

inline HyperDual inverse(const HyperDual& x) {
  const double inv = 1.0 / x.a;
  return chain(x, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline HyperDual& HyperDual::operator/=(const HyperDual& o) { return *this *= inverse(o); }
inline HyperDual operator/(HyperDual x, const HyperDual& y) { return x /= y; }

inline HyperDual sin(const HyperDual& x) {
  const double s = std::sin(x.a);
  return chain(x, s, std::cos(x.a), -s);
}
inline HyperDual cos(const HyperDual& x) {
  const double c = std::cos(x.a);
  return chain(x, c, -std::sin(x.a), -c);
}
inline HyperDual sinh(const HyperDual& x) {
  const double s = std::sinh(x.a);
  return chain(x, s, std::cosh(x.a), s);
}
inline HyperDual cosh(const HyperDual& x) {
  const double c = std::cosh(x.a);
  return chain(x, c, std::sinh(x.a), c);
}
inline HyperDual exp(const HyperDual& x) {
  const double e = std::exp(x.a);
  return chain(x, e, e, e);
}
inline HyperDual log(const HyperDual& x) {
  const double inv = 1.0 / x.a;
  return chain(x, std::log(x.a), inv, -inv * inv);
}
inline HyperDual sqrt(const HyperDual& x) {
  const double s = std::sqrt(x.a);
  return chain(x, s, 0.5 / s, -0.25 / (s * x.a));
}
inline HyperDual pow(const HyperDual& x, double p) {
  const double v = std::pow(x.a, p);
  return chain(x, v, p * std::pow(x.a, p - 1.0), p * (p - 1.0) * std::pow(x.a, p - 2.0));
}

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.a; }

}  // namespace tubevol
