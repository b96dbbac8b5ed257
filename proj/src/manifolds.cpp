#include "tubevol/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tubevol {

Vec AmbientEmbedded::from_ambient(const Vec& X) const {
  HyperDual Xs[kMaxDim + 1];
  HyperDual ys[kMaxDim];
  for (int i = 0; i < X.size(); ++i) Xs[i] = HyperDual(X(i));
  from_ambient(Xs, ys);
  Vec y(chart_dim());
  for (int i = 0; i < y.size(); ++i) y(i) = ys[i].a;
  return y;
}

Mat AmbientEmbedded::pushforward(const Vec& y, const Mat& ambient_vectors) const {
  const Vec X = to_ambient(y);
  const int N = static_cast<int>(X.size());
  const int n = static_cast<int>(y.size());
  Mat out(n, ambient_vectors.cols());
  HyperDual Xs[kMaxDim + 1];
  HyperDual ys[kMaxDim];
  for (int c = 0; c < ambient_vectors.cols(); ++c) {
    for (int i = 0; i < N; ++i) Xs[i] = HyperDual(X(i), ambient_vectors(i, c), 0.0, 0.0);
    from_ambient(Xs, ys);
    for (int i = 0; i < n; ++i) out(i, c) = ys[i].b;
  }
  return out;
}

Euclidean::Euclidean(int n) : AnalyticChart<Euclidean>(n) {}

FlatTorus::FlatTorus(int n, double side, std::vector<Bump> bumps)
    : AnalyticChart<FlatTorus>(n), side_(side), bumps_(std::move(bumps)) {
  if (!(side > 0.0)) throw std::invalid_argument("flat_torus: side must be positive");
  for (const Bump& b : bumps_) {
    if (b.center.size() != n) throw std::invalid_argument("flat_torus: bump center has wrong size");
    if (!(b.radius > 0.0) || 2.0 * b.radius >= side) {
      throw std::invalid_argument("flat_torus: bump radius must lie in (0, side/2)");
    }
  }
  domain_.lower = Vec::Zero(n);
  domain_.upper = Vec::Constant(n, side);
  domain_.periodic.assign(n, true);
}

std::vector<ChartBox> FlatTorus::bump_support_boxes() const {
  std::vector<ChartBox> boxes;
  for (const Bump& b : bumps_) {
    ChartBox box;
    box.lower = b.center.array() - b.radius;
    box.upper = b.center.array() + b.radius;
    box.periodic.assign(n_, false);
    boxes.push_back(box);
  }
  return boxes;
}

Sphere::Sphere(int n, double radius, ChartKind chart, Vec pole)
    : AnalyticChart<Sphere>(n), a_(radius), chart_(chart) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be positive");
  if (n + 1 > kMaxDim) throw std::invalid_argument("sphere: ambient dimension too large");
  Vec north = Vec::Zero(n + 1);
  north(n) = 1.0;
  if (pole.size() == 0) pole = north;
  if (pole.size() != n + 1) throw std::invalid_argument("sphere: pole must have n+1 components");
  pole_ = pole / pole.norm();
  rot_ = Mat::Identity(n + 1, n + 1);
  const Vec v = north - pole_;
  if (v.norm() > 1e-14) rot_ -= 2.0 * v * v.transpose() / v.squaredNorm();
  if (chart == ChartKind::Angular) {
    domain_.lower = Vec::Zero(n);
    domain_.upper = Vec::Constant(n, std::numbers::pi);
    domain_.upper(n - 1) = 2.0 * std::numbers::pi;
    domain_.periodic.assign(n, false);
    domain_.periodic[n - 1] = true;
  }
}

Vec Sphere::to_ambient(const Vec& y) const {
  Vec Z(n_ + 1);
  if (chart_ == ChartKind::Stereographic) {
    const double r2 = y.squaredNorm();
    for (int i = 0; i < n_; ++i) Z(i) = 2.0 * y(i) / (1.0 + r2);
    Z(n_) = (r2 - 1.0) / (1.0 + r2);
    return a_ * (rot_ * Z);
  }
  double s = 1.0;
  for (int i = 0; i < n_ - 1; ++i) {
    Z(i) = s * std::cos(y(i));
    s *= std::sin(y(i));
  }
  Z(n_ - 1) = s * std::cos(y(n_ - 1));
  Z(n_) = s * std::sin(y(n_ - 1));
  return a_ * Z;
}

void Sphere::from_ambient(const HyperDual* X, HyperDual* y) const {
  if (chart_ != ChartKind::Stereographic) {
    throw std::logic_error("sphere: ambient composition requires the stereographic chart");
  }
  HyperDual Z[kMaxDim + 1];
  for (int i = 0; i <= n_; ++i) {
    Z[i] = HyperDual(0.0);
    for (int j = 0; j <= n_; ++j) Z[i] += HyperDual(rot_(j, i) / a_) * X[j];
  }
  const HyperDual den = HyperDual(1.0) - Z[n_];
  for (int i = 0; i < n_; ++i) y[i] = Z[i] / den;
}

Hyperbolic::Hyperbolic(int n, double H) : AnalyticChart<Hyperbolic>(n), H_(H) {
  if (!(H < 0.0)) throw std::invalid_argument("hyperbolic: curvature must be negative");
  domain_.lower(n - 1) = 0.0;
}

Product::Product(std::shared_ptr<const ChartManifold> first, std::shared_ptr<const ChartManifold> second)
    : ChartManifold(first->dim() + second->dim()), a_(std::move(first)), b_(std::move(second)) {
  const int na = a_->dim();
  for (int i = 0; i < n_; ++i) {
    const ChartBox& src = i < na ? a_->domain() : b_->domain();
    const int j = i < na ? i : i - na;
    domain_.lower(i) = src.lower(j);
    domain_.upper(i) = src.upper(j);
    domain_.periodic[i] = src.periodic[j];
  }
}

Mat Product::metric(const Vec& x) const {
  const int na = a_->dim();
  const int nb = b_->dim();
  Mat g = Mat::Zero(n_, n_);
  g.topLeftCorner(na, na) = a_->metric(x.head(na));
  g.bottomRightCorner(nb, nb) = b_->metric(x.tail(nb));
  return g;
}

MetricJet Product::jet(const Vec& x, int order) const {
  const int na = a_->dim();
  const int nb = b_->dim();
  const MetricJet ja = a_->jet(x.head(na), order);
  const MetricJet jb = b_->jet(x.tail(nb), order);
  MetricJet jet;
  jet.n = n_;
  jet.order = order;
  jet.g = Mat::Zero(n_, n_);
  jet.g.topLeftCorner(na, na) = ja.g;
  jet.g.bottomRightCorner(nb, nb) = jb.g;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      for (int c = 0; c < na; ++c) {
        jet.dg[i][j][c] = ja.dg[i][j][c];
        if (order >= 2)
          for (int d = 0; d < na; ++d) jet.ddg[i][j][c][d] = ja.ddg[i][j][c][d];
      }
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int c = 0; c < nb; ++c) {
        jet.dg[na + i][na + j][na + c] = jb.dg[i][j][c];
        if (order >= 2)
          for (int d = 0; d < nb; ++d) jet.ddg[na + i][na + j][na + c][na + d] = jb.ddg[i][j][c][d];
      }
  finish_jet(jet);
  return jet;
}

bool Product::analytic_derivatives() const {
  return a_->analytic_derivatives() && b_->analytic_derivatives();
}

WarpedProduct::WarpedProduct(int n, Warp warp, double r_lo, double r_hi, double side)
    : AnalyticChart<WarpedProduct>(n), warp_(std::move(warp)) {
  if (!(r_hi > r_lo)) throw std::invalid_argument("warped_product: need r_lo < r_hi");
  if (!(side > 0.0)) throw std::invalid_argument("warped_product: side must be positive");
  domain_.lower = Vec::Zero(n);
  domain_.upper = Vec::Constant(n, side);
  domain_.periodic.assign(n, true);
  domain_.lower(0) = r_lo;
  domain_.upper(0) = r_hi;
  domain_.periodic[0] = false;
  if (warp_.kind == Warp::Kind::Sampled) {
    const int count = static_cast<int>(warp_.values.size());
    if (count < 4) throw std::invalid_argument("warped_product: need at least 4 warp samples");
    if (!(warp_.r_hi > warp_.r_lo)) throw std::invalid_argument("warped_product: bad sample range");
    h_ = (warp_.r_hi - warp_.r_lo) / (count - 1);
    // natural cubic spline, tridiagonal solve for the second derivatives
    second_.assign(count, 0.0);
    std::vector<double> c(count, 0.0), d(count, 0.0);
    for (int i = 1; i < count - 1; ++i) {
      const double rhs = 6.0 * (warp_.values[i + 1] - 2.0 * warp_.values[i] + warp_.values[i - 1]) / (h_ * h_);
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      d[i] = (rhs - d[i - 1]) / denom;
    }
    for (int i = count - 2; i >= 1; --i) second_[i] = d[i] - c[i] * second_[i + 1];
    for (double v : warp_.values) {
      if (!(v > 0.0)) throw std::invalid_argument("warped_product: warp samples must be positive");
    }
  }
}

double WarpedProduct::spline_value(double r) const {
  const int count = static_cast<int>(warp_.values.size());
  const double u = (r - warp_.r_lo) / h_;
  int i = static_cast<int>(std::floor(u));
  i = std::clamp(i, 0, count - 2);
  const double t = u - i;
  const double a = 1.0 - t;
  const double y0 = warp_.values[i];
  const double y1 = warp_.values[i + 1];
  return a * y0 + t * y1 +
         ((a * a * a - a) * second_[i] + (t * t * t - t) * second_[i + 1]) * h_ * h_ / 6.0;
}

MetricJet WarpedProduct::jet(const Vec& x, int order) const {
  if (warp_.kind == Warp::Kind::Sampled) return finite_difference_jet(x, order);
  return AnalyticChart<WarpedProduct>::jet(x, order);
}

}  // namespace tubevol
