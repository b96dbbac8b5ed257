#include "tubevol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace tubevol::quad {

namespace {

constexpr double pi = std::numbers::pi;

// Legendre polynomial P_order(x) and its derivative.
std::pair<double, double> legendre(int order, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= order; ++k) {
    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, order * (x * p1 - p0) / (x * x - 1.0)};
}

Rule make_gauss_legendre(int order) {
  Rule rule;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(order, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(order, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

// Polar-angle rule on [0, pi] for the density sin^power: Gauss-Jacobi in
// x = cos(theta) with alpha = beta = (power - 1) / 2 (Golub-Welsch).
Rule polar_rule(int order, int power) {
  const double a = 0.5 * (power - 1);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(std::max(0, order - 1));
  for (int k = 1; k < order; ++k) {
    const double s = 2.0 * k + 2.0 * a;
    off(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + a) * (k + 2.0 * a) / (s * s * (s + 1.0) * (s - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  const double mu0 = std::pow(2.0, 2.0 * a + 1.0) * std::tgamma(a + 1.0) * std::tgamma(a + 1.0) / std::tgamma(2.0 * a + 2.0);
  Rule r;
  for (int i = 0; i < order; ++i) {
    const double v = eig.eigenvectors()(0, i);
    r.nodes.push_back(std::acos(std::clamp(eig.eigenvalues()(i), -1.0, 1.0)));
    r.weights.push_back(mu0 * v * v);
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
  return it->second;
}

Rule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be >= 1");
  const Rule& gl = gauss_legendre(order);
  Rule out;
  out.nodes.reserve(static_cast<std::size_t>(panels) * order);
  out.weights.reserve(out.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      out.nodes.push_back(lo + 0.5 * h * (gl.nodes[i] + 1.0));
      out.weights.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return out;
}

SphereGrid product_angle_grid(int d, int resolution, double phase) {
  if (d < 0) throw std::invalid_argument("product_angle_grid: negative dimension");
  if (resolution < 1) throw std::invalid_argument("product_angle_grid: resolution must be >= 1");
  SphereGrid grid;
  grid.dim = d;
  if (d == 0) {
    Vec a(1), b(1);
    a << 1.0;
    b << -1.0;
    grid.points = {a, b};
    grid.weights = {1.0, 1.0};
    return grid;
  }
  const double dphi = 2.0 * pi / resolution;
  if (d == 1) {
    for (int i = 0; i < resolution; ++i) {
      const double phi = (i + phase) * dphi;
      Vec p(2);
      p << std::cos(phi), std::sin(phi);
      grid.points.push_back(p);
      grid.weights.push_back(dphi);
    }
    return grid;
  }
  // polar angles theta_1..theta_{d-1}, azimuth phi
  const int polar_order = std::max(4, resolution / 2);
  std::vector<Rule> polar;
  for (int j = 0; j < d - 1; ++j) polar.push_back(polar_rule(polar_order, d - 1 - j));
  std::vector<int> idx(d - 1, 0);
  while (true) {
    double w = 1.0;
    Vec p(d + 1);
    double s = 1.0;
    for (int j = 0; j < d - 1; ++j) {
      const double th = polar[j].nodes[idx[j]];
      w *= polar[j].weights[idx[j]];
      p(j) = s * std::cos(th);
      s *= std::sin(th);
    }
    for (int i = 0; i < resolution; ++i) {
      const double phi = (i + phase) * dphi;
      Vec q = p;
      q(d - 1) = s * std::cos(phi);
      q(d) = s * std::sin(phi);
      grid.points.push_back(q);
      grid.weights.push_back(w * dphi);
    }
    int j = d - 2;
    while (j >= 0 && ++idx[j] == polar_order) idx[j--] = 0;
    if (j < 0) break;
  }
  return grid;
}

SphereGrid fibonacci_sphere(int count) {
  SphereGrid grid;
  grid.dim = 2;
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double w = 4.0 * pi / count;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * pi * std::fmod(i / golden, 1.0);
    Vec p(3);
    p << rho * std::cos(phi), rho * std::sin(phi), z;
    grid.points.push_back(p);
    grid.weights.push_back(w);
  }
  return grid;
}

SphereGrid super_fibonacci(int count) {
  SphereGrid grid;
  grid.dim = 3;
  const double phi = std::sqrt(2.0);
  const double psi = 1.533751168755204288118041;
  const double w = 2.0 * pi * pi / count;
  for (int i = 0; i < count; ++i) {
    const double s = i + 0.5;
    const double r = std::sqrt(s / count);
    const double big_r = std::sqrt(1.0 - s / count);
    const double alpha = 2.0 * pi * s / phi;
    const double beta = 2.0 * pi * s / psi;
    Vec p(4);
    p << r * std::sin(alpha), r * std::cos(alpha), big_r * std::sin(beta), big_r * std::cos(beta);
    grid.points.push_back(p);
    grid.weights.push_back(w);
  }
  return grid;
}

SphereGrid direction_grid(int n, int min_count) {
  if (n < 2) throw std::invalid_argument("direction_grid: n must be >= 2");
  if (n == 2) return product_angle_grid(1, min_count);
  if (n == 3) return fibonacci_sphere(min_count);
  if (n == 4) return super_fibonacci(min_count);
  // smallest azimuth resolution whose product grid reaches min_count
  int res = 4;
  while (true) {
    const long long polar = std::max(4, res / 2);
    long long total = res;
    for (int j = 0; j < n - 2; ++j) total *= polar;
    if (total >= min_count) break;
    res += 2;
  }
  return product_angle_grid(n - 1, res);
}

Vec uniform_sphere_point(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec p(d + 1);
  double norm = 0.0;
  do {
    for (int i = 0; i <= d; ++i) p(i) = normal(rng);
    norm = p.norm();
  } while (norm < 1e-12);
  return p / norm;
}

}  // namespace tubevol::quad
