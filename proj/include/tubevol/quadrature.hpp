#pragma once

#include "tubevol/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace tubevol::quad {

/// Nodes and weights of a one-dimensional rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [-1, 1]; cached per order.
const Rule& gauss_legendre(int order);

/// Composite Gauss-Legendre on [a, b] with equal panels.
Rule composite_gauss_legendre(double a, double b, int panels, int order);

/// Points on the unit sphere S^d in R^{d+1} with weights summing to vol(S^d).
struct SphereGrid {
  int dim = 0;  // d
  std::vector<Vec> points;
  std::vector<double> weights;
};

/// Product-angle rule on S^d. d = 0 gives {-1, +1} with unit weights,
/// d = 1 an equispaced trapezoid with `resolution` points, and d >= 2
/// hyperspherical angles with Gauss-Legendre in each polar angle (weighted
/// by the sine power) and a `resolution`-point trapezoid in the azimuth.
/// `phase` rotates the azimuth grid by phase * 2 pi / resolution.
SphereGrid product_angle_grid(int d, int resolution, double phase = 0.0);

/// Spherical Fibonacci lattice on S^2 with equal weights.
SphereGrid fibonacci_sphere(int count);

/// Super-Fibonacci lattice on S^3 with equal weights.
SphereGrid super_fibonacci(int count);

/// Direction set on S^{n-1} used for minimizations over unit vectors:
/// a circle for n = 2, Fibonacci for n = 3, super-Fibonacci for n = 4 and
/// product-angle grids for n >= 5. At least `min_count` nodes.
SphereGrid direction_grid(int n, int min_count);

/// Uniform random point on S^d.
Vec uniform_sphere_point(int d, std::mt19937_64& rng);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running mean and standard error of Monte Carlo samples.
struct MonteCarloAccumulator {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double standard_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

}  // namespace tubevol::quad
