#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubevol::ode {

using State = Eigen::VectorXd;
using Rhs = std::function<void(double t, const State& y, State& dy)>;

struct StepCollapseError : std::runtime_error {
  StepCollapseError(const std::string& what, double t) : std::runtime_error(what), t(t) {}
  double t;
};

struct Options {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Leading components under error control; -1 means all.
  int controlled = -1;
  double initial_step = 0.0;  // 0 chooses automatically
  double max_step = 0.0;      // 0 means unbounded
  double min_step = 1e-13;
  int max_steps = 200000;
};

/// An accepted point with its derivative (for Hermite interpolation).
struct Point {
  double t = 0.0;
  State y;
  State dy;
};

/// Observer called after each accepted step; returning false stops.
using Observer = std::function<bool(const Point& prev, const Point& cur)>;

/// Dormand-Prince 5(4) with FSAL and a PI-free standard step controller.
/// Integration lands exactly on every time in `stops` (sorted, inside
/// (t0, t1]) and on t1. Returns every accepted point, starting with t0.
std::vector<Point> integrate(const Rhs& f, double t0, const State& y0, double t1, const std::vector<double>& stops,
                             const Options& opts, const Observer& observer = {});

/// Cubic Hermite interpolation between two accepted points.
State hermite(const Point& a, const Point& b, double t);

}  // namespace tubevol::ode
