#include "tubevol/ode.hpp"

#include <algorithm>
#include <cmath>

namespace tubevol::ode {

namespace {

// Dormand-Prince coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const State& err, const State& y0, const State& y1, int controlled, const Options& o) {
  double worst = 0.0;
  for (int i = 0; i < controlled; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    worst = std::max(worst, std::abs(err(i)) / sc);
  }
  return worst;
}

}  // namespace

std::vector<Point> integrate(const Rhs& f, double t0, const State& y0, double t1, const std::vector<double>& stops,
                             const Options& opts, const Observer& observer) {
  const int dim = static_cast<int>(y0.size());
  const int controlled = opts.controlled < 0 ? dim : std::min(opts.controlled, dim);
  std::vector<double> targets;
  for (double s : stops) {
    if (s > t0 && s < t1) targets.push_back(s);
  }
  targets.push_back(t1);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  std::vector<Point> out;
  Point cur{t0, y0, State(dim)};
  f(t0, cur.y, cur.dy);
  out.push_back(cur);
  if (!(t1 > t0)) return out;

  double h = opts.initial_step;
  if (h <= 0.0) {
    // Hairer-Wanner starting step
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < controlled; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(cur.y(i));
      d0 = std::max(d0, std::abs(cur.y(i)) / sc);
      d1 = std::max(d1, std::abs(cur.dy(i)) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 0.1 * (t1 - t0));
  }
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

  State k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim), y5(dim), err(dim);
  std::size_t target = 0;
  int steps = 0;
  while (target < targets.size()) {
    const double goal = targets[target];
    bool land = false;
    const double natural = h;
    if (cur.t + h >= goal - 1e-14 * std::max(1.0, std::abs(goal))) {
      h = goal - cur.t;
      land = true;
    }
    if (++steps > opts.max_steps) throw StepCollapseError("ode: too many steps", cur.t);
    const State& y = cur.y;
    const State& k1 = cur.dy;
    ytmp = y + h * a21 * k1;
    f(cur.t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(cur.t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(cur.t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(cur.t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(cur.t + h, ytmp, k6);
    y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double tn = land ? goal : cur.t + h;
    f(tn, y5, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = error_norm(err, y, y5, controlled, opts);
    if (!std::isfinite(en)) en = 1e10;
    if (en <= 1.0) {
      Point next{tn, y5, k7};
      out.push_back(next);
      if (observer && !observer(cur, next)) return out;
      cur = std::move(next);
      if (land) ++target;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = land ? std::max(natural, h * fac) : h * fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
    if (h < opts.min_step) throw StepCollapseError("ode: step size collapsed", cur.t);
  }
  return out;
}

State hermite(const Point& a, const Point& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * a.y + h10 * h * a.dy + h01 * b.y + h11 * h * b.dy;
}

}  // namespace tubevol::ode
