#include "tubevol/model_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tubevol::model {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Value of cs + w0 sn, or of sn when w0 is absent.
double denominator(double H, std::optional<double> w0, double t) {
  const SnCs sc = sn_cs(H, t);
  return w0 ? sc.cs + *w0 * sc.sn : sc.sn;
}

// First sign change of f on (0, r], marching with `step`, refined by bisection.
template <class F>
double first_root(F f, double r, double step) {
  double f_lo = f(std::min(step, r) * 1e-9);
  if (f_lo == 0.0) return 0.0;
  double t = 0.0;
  while (t < r) {
    const double hi = std::min(r, t + step);
    const double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    if ((f_hi > 0.0) != (f_lo > 0.0)) {
      double a = t;
      double b = hi;
      while (b - a > 1e-12 * b) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0)) {
          a = mid;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    f_lo = f_hi;
    t = hi;
  }
  return kInf;
}

}  // namespace

SnCs sn_cs(double H, double r) {
  if (std::abs(H) < kFlatThreshold) return {r, 1.0};
  if (H > 0.0) {
    const double w = std::sqrt(H);
    return {std::sin(w * r) / w, std::cos(w * r)};
  }
  const double w = std::sqrt(-H);
  return {std::sinh(w * r) / w, std::cosh(w * r)};
}

double denominator_first_zero(double H, std::optional<double> w0) {
  if (!w0) {
    if (H >= kFlatThreshold) return std::numbers::pi / std::sqrt(H);
    return kInf;
  }
  const double a = *w0;
  if (std::abs(H) < kFlatThreshold) return a < 0.0 ? -1.0 / a : kInf;
  if (H > 0.0) {
    const double w = std::sqrt(H);
    // cos(wt) + (a/w) sin(wt) = R cos(wt - phase)
    const double phase = std::atan2(a / w, 1.0);
    return (0.5 * std::numbers::pi + phase) / w;
  }
  const double w = std::sqrt(-H);
  if (a >= -w) return kInf;
  return std::atanh(-w / a) / w;
}

double model_shape_trace(double H, int k, std::optional<double> w0, double t) {
  if (k < 1) throw ParameterError("model_shape_trace: k must be >= 1");
  if (!(t > 0.0)) throw DomainError("model_shape_trace: t must be positive");
  const double zero = denominator_first_zero(H, w0);
  if (t >= zero) {
    throw DomainError("model_shape_trace: t=" + std::to_string(t) +
                      " at or beyond the first zero " + std::to_string(zero));
  }
  const SnCs sc = sn_cs(H, t);
  if (w0) return k * (*w0 * sc.cs - H * sc.sn) / (sc.cs + *w0 * sc.sn);
  return k * sc.cs / sc.sn;
}

double hk_integrand(double H, int n, int m, double eta_dot_xi, double t) {
  const SnCs sc = sn_cs(H, t);
  return std::pow(sc.cs + eta_dot_xi * sc.sn, m) * std::pow(sc.sn, n - m - 1);
}

double first_zero(double H, int n, int m, double eta_dot_xi, double r) {
  if (!(r > 0.0)) throw ParameterError("first_zero: r must be positive");
  const double scale = std::min(r, std::numbers::pi / std::sqrt(std::max(H, 1e-12)));
  const double step = scale / 256.0;
  double z = r;
  // the integrand vanishes exactly where one of its two factors does
  if (m >= 1) {
    z = std::min(z, first_root([&](double t) { return denominator(H, eta_dot_xi, t); }, r, step));
  }
  if (n - m - 1 >= 1) {
    z = std::min(z, first_root([&](double t) { return denominator(H, std::nullopt, t); }, r, step));
  }
  return z;
}

double sphere_volume(int d) {
  if (d < 0) throw ParameterError("sphere_volume: negative dimension");
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

BoundConstants thm1_constants(int n, int m, double p, double H) {
  if (n < 3) throw ParameterError("thm1_constants: n must be >= 3");
  if (m <= 0 || m >= n - 1) throw ParameterError("thm1_constants: need 0 < m < n-1");
  if (!std::isfinite(H) || H > 0.0) throw ParameterError("thm1_constants: need H <= 0");
  BoundConstants c;
  c.n = n;
  c.m = m;
  c.k = std::min(m, n - m - 1);
  c.p = p;
  c.H = H;
  if (!std::isfinite(p) || p <= n - c.k) {
    throw ParameterError("thm1_constants: need p > n-k = " + std::to_string(n - c.k));
  }
  const double nk = n - c.k;
  c.alpha = (nk - 1.0) / nk;
  c.beta = 1.0 / (n - m - 1) - 1.0 / p;
  c.delta = 4.0 * (nk - 1.0) + (4.0 / c.k) * ((2.0 * p - 1.0) / (p - nk));
  c.kappa = std::pow(c.delta * std::abs(H), c.alpha) / (2.0 * c.alpha);
  return c;
}

double thm1_w(const BoundConstants& c, double vol_sigma, double deficit_norm, double r) {
  const int codim = c.n - c.m - 1;
  const double lead = std::pow(c.alpha / codim, 1.0 / (c.n - c.k - 1));
  const double volume_term =
      std::pow(sphere_volume(codim) * vol_sigma * std::pow(r, c.n - c.m), 1.0 / codim);
  return lead * volume_term + c.delta * std::pow(deficit_norm, 1.0 - c.beta) * r * r;
}

double thm1_bound(const BoundConstants& c, double vol_sigma, double deficit_norm, double r) {
  const double w = thm1_w(c, vol_sigma, deficit_norm, r);
  const double tail =
      std::pow(2.0, c.p / c.alpha) * std::pow(deficit_norm, c.beta * c.p) * std::pow(w, c.p);
  return (std::pow(w, c.n - c.m - 1) + tail) * std::exp(c.kappa * std::pow(r, 2.0 * c.alpha));
}

double cheeger_delta(int n, int m, double p, double H, double v0, double D, double epsilon) {
  if (!(v0 > 0.0) || !(D > 0.0) || !(epsilon >= 0.0)) {
    throw ParameterError("cheeger_delta: need v0 > 0, D > 0, epsilon >= 0");
  }
  const BoundConstants c = thm1_constants(n, m, p, H);
  const auto f = [&](double vol) { return thm1_bound(c, vol, epsilon, D); };
  if (f(0.0) >= v0) {
    throw InfeasibleError("cheeger_delta: epsilon too large, bound at vanishing volume is " +
                          std::to_string(f(0.0)) + " >= v0");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) <= v0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw InfeasibleError("cheeger_delta: no upper bracket");
  }
  // the bound is strictly increasing in vol_sigma
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= v0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace tubevol::model
