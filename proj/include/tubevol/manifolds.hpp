#pragma once

#include "tubevol/geometry.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tubevol {

/// Charts that are open subsets of a hypersurface in R^N (round spheres,
/// Euclidean space itself). Submanifolds written in ambient coordinates are
/// composed with from_ambient to land in the chart.
class AmbientEmbedded {
 public:
  virtual ~AmbientEmbedded() = default;
  virtual int ambient_dim() const = 0;
  virtual int chart_dim() const = 0;
  virtual Vec to_ambient(const Vec& y) const = 0;
  virtual void from_ambient(const HyperDual* X, HyperDual* y) const = 0;

  Vec from_ambient(const Vec& X) const;

  /// Chart components of ambient tangent vectors (columns) at chart point y.
  Mat pushforward(const Vec& y, const Mat& ambient_vectors) const;
};

class Euclidean final : public AnalyticChart<Euclidean>, public AmbientEmbedded {
 public:
  explicit Euclidean(int n);
  std::string kind() const override { return "euclidean"; }

  template <class T>
  void eval_metric(const T*, T (*g)[kMaxDim]) const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g[i][j] = T(i == j ? 1.0 : 0.0);
  }

  int ambient_dim() const override { return n_; }
  int chart_dim() const override { return n_; }
  Vec to_ambient(const Vec& y) const override { return y; }
  void from_ambient(const HyperDual* X, HyperDual* y) const override {
    for (int i = 0; i < n_; ++i) y[i] = X[i];
  }
  using AmbientEmbedded::from_ambient;
};

/// Compactly supported conformal perturbation exp(1 - 1/(1 - q)), q = |x-c|^2/rho^2,
/// with periodic distance on the torus.
struct Bump {
  Vec center;
  double radius = 0.5;
  double amplitude = 0.05;
};

/// Flat torus [0, side)^n, optionally with metric exp(2 sum_b eps_b phi_b) delta.
class FlatTorus final : public AnalyticChart<FlatTorus> {
 public:
  FlatTorus(int n, double side, std::vector<Bump> bumps = {});
  std::string kind() const override { return "flat_torus"; }

  template <class T>
  void eval_metric(const T* x, T (*g)[kMaxDim]) const {
    T f(0.0);
    for (const Bump& b : bumps_) {
      T q(0.0);
      for (int i = 0; i < n_; ++i) {
        const double raw = value_of(x[i]) - b.center(i);
        const double shift = side_ * std::round(raw / side_);
        const T d = x[i] - T(b.center(i) + shift);
        q += d * d;
      }
      q = q * T(1.0 / (b.radius * b.radius));
      if (value_of(q) < 1.0) {
        using std::exp;
        f += T(b.amplitude) * exp(T(1.0) - T(1.0) / (T(1.0) - q));
      }
    }
    using std::exp;
    const T c = exp(T(2.0) * f);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g[i][j] = i == j ? c : T(0.0);
  }

  double side() const { return side_; }
  const std::vector<Bump>& bumps() const { return bumps_; }

  /// Coordinate box enclosing the support of all bumps (unwrapped).
  std::vector<ChartBox> bump_support_boxes() const;

 private:
  double side_;
  std::vector<Bump> bumps_;
};

/// Round sphere of radius a in R^{n+1}.
///
/// The stereographic chart projects from `pole` (the point sent to
/// infinity); chart origin is the antipode of the pole. The angular chart
/// uses hyperspherical coordinates (theta_1..theta_{n-1}, phi).
class Sphere final : public AnalyticChart<Sphere>, public AmbientEmbedded {
 public:
  enum class ChartKind { Stereographic, Angular };

  Sphere(int n, double radius, ChartKind chart = ChartKind::Stereographic, Vec pole = {});
  std::string kind() const override { return "sphere"; }

  template <class T>
  void eval_metric(const T* x, T (*g)[kMaxDim]) const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g[i][j] = T(0.0);
    if (chart_ == ChartKind::Stereographic) {
      T r2(0.0);
      for (int i = 0; i < n_; ++i) r2 += x[i] * x[i];
      const T den = T(1.0) + r2;
      const T c = T(4.0 * a_ * a_) / (den * den);
      for (int i = 0; i < n_; ++i) g[i][i] = c;
      return;
    }
    using std::sin;
    T s(a_ * a_);
    g[0][0] = s;
    for (int i = 1; i < n_; ++i) {
      const T si = sin(x[i - 1]);
      s = s * si * si;
      g[i][i] = s;
    }
  }

  double radius() const { return a_; }
  ChartKind chart() const { return chart_; }
  const Vec& pole() const { return pole_; }

  int ambient_dim() const override { return n_ + 1; }
  int chart_dim() const override { return n_; }
  Vec to_ambient(const Vec& y) const override;
  void from_ambient(const HyperDual* X, HyperDual* y) const override;
  using AmbientEmbedded::from_ambient;

 private:
  double a_;
  ChartKind chart_;
  Vec pole_;
  Mat rot_;  // maps e_{n+1} to pole / a
};

/// Upper half-space model of constant curvature H < 0: g = delta / (|H| x_n^2).
class Hyperbolic final : public AnalyticChart<Hyperbolic> {
 public:
  Hyperbolic(int n, double H);
  std::string kind() const override { return "hyperbolic"; }

  template <class T>
  void eval_metric(const T* x, T (*g)[kMaxDim]) const {
    const T c = T(1.0 / std::abs(H_)) / (x[n_ - 1] * x[n_ - 1]);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g[i][j] = i == j ? c : T(0.0);
  }

  double curvature() const { return H_; }

 private:
  double H_;
};

/// Riemannian product; coordinates are those of the first factor followed
/// by those of the second.
class Product final : public ChartManifold {
 public:
  Product(std::shared_ptr<const ChartManifold> first, std::shared_ptr<const ChartManifold> second);
  std::string kind() const override { return "product"; }
  Mat metric(const Vec& x) const override;
  MetricJet jet(const Vec& x, int order) const override;
  bool analytic_derivatives() const override;

  const ChartManifold& first() const { return *a_; }
  const ChartManifold& second() const { return *b_; }
  std::shared_ptr<const ChartManifold> first_ptr() const { return a_; }
  std::shared_ptr<const ChartManifold> second_ptr() const { return b_; }

 private:
  std::shared_ptr<const ChartManifold> a_;
  std::shared_ptr<const ChartManifold> b_;
};

/// Warping function of dr^2 + f(r)^2 (flat torus metric).
struct Warp {
  enum class Kind { Exp, Cosh, Linear, Sampled };
  Kind kind = Kind::Cosh;
  double c0 = 1.0;  // exp: f = c0 e^{c1 r}; cosh: f = c0 cosh(c1 r); linear: f = c0 + c1 r
  double c1 = 1.0;
  // sampled: natural cubic spline through (r_lo + i h, values[i])
  double r_lo = 0.0;
  double r_hi = 1.0;
  std::vector<double> values;
};

/// Warped product (r_lo, r_hi) x_f T^{n-1}, fiber side length `side`.
/// Closed-form warps use hyper-dual derivatives; sampled warps use finite
/// differences of the metric.
class WarpedProduct final : public AnalyticChart<WarpedProduct> {
 public:
  WarpedProduct(int n, Warp warp, double r_lo, double r_hi, double side);
  std::string kind() const override { return "warped_product"; }

  template <class T>
  void eval_metric(const T* x, T (*g)[kMaxDim]) const {
    const T f = warp_value(x[0]);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) g[i][j] = T(0.0);
    g[0][0] = T(1.0);
    for (int i = 1; i < n_; ++i) g[i][i] = f * f;
  }

  MetricJet jet(const Vec& x, int order) const override;
  bool analytic_derivatives() const override { return warp_.kind != Warp::Kind::Sampled; }

  double f(double r) const { return warp_value(r); }
  const Warp& warp() const { return warp_; }

 private:
  double spline_value(double r) const;
  template <class T>
  T warp_value(const T& r) const {
    using std::cosh;
    using std::exp;
    switch (warp_.kind) {
      case Warp::Kind::Exp: return T(warp_.c0) * exp(T(warp_.c1) * r);
      case Warp::Kind::Cosh: return T(warp_.c0) * cosh(T(warp_.c1) * r);
      case Warp::Kind::Linear: return T(warp_.c0) + T(warp_.c1) * r;
      case Warp::Kind::Sampled: break;
    }
    return T(spline_value(value_of(r)));
  }

  Warp warp_;
  std::vector<double> second_;  // spline second derivatives
  double h_ = 0.0;
};

}  // namespace tubevol
