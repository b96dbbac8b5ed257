#include "doctest.h"

#include "tubevol/model_kernels.hpp"
#include "tubevol/ray_transport.hpp"

#include <cmath>
#include <memory>
#include <numbers>

using namespace tubevol;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vec unit(double angle) { return vec({std::cos(angle), std::sin(angle)}); }

std::vector<double> grid(double a, double b, int count) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(a + (b - a) * i / (count - 1));
  return t;
}

RayResult run(const ChartManifold& M, const BaseNode& b, const Vec& p, const std::vector<double>& times,
              double t_max) {
  NormalRay ray{&b, p, t_max, 1e-10};
  RayOptions o;
  o.output_times = times;
  return integrate_ray(M, ray, o);
}

// S^3 with the stereographic pole on the circle dual to the great circle.
std::shared_ptr<Sphere> s3_dual_pole() {
  return std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic,
                                  vec({0.0, 0.0, std::cos(0.123), std::sin(0.123)}));
}

}  // namespace

TEST_CASE("flat torus rays") {
  FlatTorus t4(4, 2 * pi);
  auto circle = submanifolds::closed_geodesic(vec({0.0, 1.0, 2.0, 3.0}), 0, 2 * pi, 4);
  const auto node = make_base_node(circle, t4, vec({1.0}), 1.0);
  const auto res = run(t4, node, vec({0.0, 0.6, 0.8}), grid(0.1, 3.0, 8), 3.0);
  REQUIRE(res.outputs.size() == 8);
  CHECK_FALSE(res.focal_time);
  for (const auto& s : res.outputs) {
    Mat J = Mat::Identity(3, 3);
    J(1, 1) = J(2, 2) = s.t;
    CHECK((s.J - J).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(volume_density(s) == Approx(s.t * s.t).epsilon(1e-12));
    Mat S = Mat::Zero(3, 3);
    S(1, 1) = S(2, 2) = 1.0 / s.t;
    CHECK((shape_operator(s) - S).cwiseAbs().maxCoeff() < 1e-10);
    const auto pp = split_mean_curvature(s);
    CHECK(std::abs(pp.phi) < 1e-12);
    CHECK(pp.psi == Approx(2.0 / s.t).epsilon(1e-10));
    const auto jy = jy_factors(s);
    CHECK(jy.J == Approx(1.0).epsilon(1e-12));
    CHECK(jy.Y == Approx(s.t).epsilon(1e-10));
  }
  NormalRay ray{&node, vec({0.0, 0.6, 0.8}), 10.0, 1e-9};
  CHECK_FALSE(focal_distance(t4, ray, 10.0));
}

TEST_CASE("great circle rays in S^3") {
  auto s3 = s3_dual_pole();
  auto gc = submanifolds::great_circle(s3, 8);
  const auto node = make_base_node(gc, *s3, vec({0.7}), 1.0);
  for (double ang : {0.3, 2.0, 4.1}) {
    const auto res = run(*s3, node, unit(ang), grid(0.05, 1.5, 12), 1.5);
    REQUIRE(res.outputs.size() == 12);
    for (const auto& s : res.outputs) {
      CHECK(volume_density(s) == Approx(std::cos(s.t) * std::sin(s.t)).epsilon(1e-8));
      CHECK(std::abs(s.J(0, 0) - std::cos(s.t)) < 1e-8);
      CHECK(std::abs(std::abs(s.J(1, 1)) - std::sin(s.t)) < 1e-8);
      const Mat S = shape_operator(s);
      CHECK(S(0, 0) == Approx(-std::tan(s.t)).epsilon(1e-7));
      CHECK(S(1, 1) == Approx(1.0 / std::tan(s.t)).epsilon(1e-7));
      const auto jy = jy_factors(s);
      CHECK(jy.J == Approx(std::cos(s.t)).epsilon(1e-8));
      CHECK(jy.Y == Approx(std::sin(s.t)).epsilon(1e-8));
      CHECK(std::pow(jy.J, 1) * jy.Y == Approx(volume_density(s)).epsilon(1e-7));
    }
    const auto mid = run(*s3, node, unit(ang), {pi / 4}, pi / 4).outputs.at(0);
    const auto pp = split_mean_curvature(mid);
    CHECK(pp.phi == Approx(-1.0).epsilon(1e-8));
    CHECK(pp.psi == Approx(1.0).epsilon(1e-8));
    NormalRay ray{&node, unit(ang), 3.0, 1e-9};
    const auto f = focal_distance(*s3, ray, 3.0);
    REQUIRE(f);
    CHECK(std::abs(*f - pi / 2) < 1e-9);
  }
}

TEST_CASE("hyperbolic space from a point") {
  Hyperbolic h3(3, -1.0);
  auto pt = submanifolds::point(vec({0.2, -0.1, 1.5}));
  const auto node = make_base_node(pt, h3, Vec(0), 1.0);
  const Vec p = vec({0.48, 0.6, 0.64});
  const auto res = run(h3, node, p / p.norm(), grid(0.1, 2.0, 20), 2.0);
  REQUIRE(res.outputs.size() == 20);
  CHECK_FALSE(res.focal_time);
  for (const auto& s : res.outputs) {
    CHECK((s.J - std::sinh(s.t) * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8 * std::cosh(s.t));
    const Mat S = shape_operator(s);
    CHECK((S - Mat::Identity(2, 2) / std::tanh(s.t)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(S.trace() == Approx(model::model_shape_trace(-1.0, 2, std::nullopt, s.t)).epsilon(1e-8));
    Mat W(2, 1);
    W << 0.6, 0.8;
    CHECK(partial_trace_shape(s, W) == Approx(1.0 / std::tanh(s.t)).epsilon(1e-8));
    const auto pp = split_mean_curvature(s);
    CHECK(pp.phi == 0.0);
    CHECK(pp.psi == Approx(2.0 / std::tanh(s.t)).epsilon(1e-8));
  }
}

TEST_CASE("space form with totally geodesic submanifold: phi and psi") {
  // equator S^1 of S^2 x ... use a great circle in S^3 with curvature 1/4
  auto s3 = std::make_shared<Sphere>(3, 2.0, Sphere::ChartKind::Stereographic,
                                     vec({0.0, 0.0, 2 * std::cos(0.4), 2 * std::sin(0.4)}));
  auto gc = submanifolds::great_circle(s3, 8);
  const auto node = make_base_node(gc, *s3, vec({0.2}), 1.0);
  const double H = 0.25;
  const auto res = run(*s3, node, unit(1.0), grid(0.2, 2.5, 6), 2.5);
  for (const auto& s : res.outputs) {
    const auto sc = model::sn_cs(H, s.t);
    const auto pp = split_mean_curvature(s);
    CHECK(pp.phi == Approx(-H * sc.sn / sc.cs).epsilon(1e-7));
    CHECK(pp.psi == Approx(sc.cs / sc.sn).epsilon(1e-7));
    const auto jy = jy_factors(s);
    CHECK(jy.J == Approx(sc.cs).epsilon(1e-8));
    CHECK(jy.Y == Approx(sc.sn).epsilon(1e-8));
  }
}

TEST_CASE("focal distances with double roots") {
  auto s3 = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic,
                                     vec({0.3, -0.2, 0.5, std::sqrt(1 - 0.09 - 0.04 - 0.25)}));
  auto eq = submanifolds::equator(s3, 8);
  const auto enode = make_base_node(eq, *s3, vec({1.0, 2.0}), 1.0);
  for (double sgn : {1.0, -1.0}) {
    NormalRay ray{&enode, vec({sgn}), 3.0, 1e-9};
    const auto f = focal_distance(*s3, ray, 3.0);
    REQUIRE(f);
    CHECK(std::abs(*f - pi / 2) < 1e-9);
  }
  // point: conjugate point at pi, det J = sin^2 t
  const Vec P = vec({0.0, 0.0, 0.0, -1.0});
  const double tau = 2.0;
  Vec pole = std::cos(tau) * P + std::sin(tau) * vec({0.36, 0.48, 0.8, 0.0});
  auto s3b = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic, pole);
  auto pt = submanifolds::point(s3b->from_ambient(P));
  const auto pnode = make_base_node(pt, *s3b, Vec(0), 1.0);
  for (const Vec& p : {vec({1.0, 0.0, 0.0}), vec({0.0, 0.6, 0.8})}) {
    NormalRay ray{&pnode, p, 3.5, 1e-10};
    RayOptions o;
    const auto res = integrate_ray(*s3b, ray, o);
    REQUIRE(res.focal_time);
    CHECK(res.focal_double_root);
    CHECK(std::abs(*res.focal_time - pi) < 1e-6);
  }
}

TEST_CASE("small sphere focal distances") {
  auto s3 = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic,
                                     vec({0.0, std::sin(0.2), 0.0, -std::cos(0.2)}));
  auto sph = submanifolds::round_sphere(s3, 0.8, Vec(), 8);
  const auto node = make_base_node(sph, *s3, vec({1.0, 0.5}), 1.0);
  const double rho = std::asin(0.8);
  for (double sgn : {1.0, -1.0}) {
    NormalRay ray{&node, vec({sgn}), 3.0, 1e-10};
    const auto f = focal_distance(*s3, ray, 3.0);
    REQUIRE(f);
    const double want = node.eta_dot(vec({sgn})) < 0.0 ? rho : pi - rho;
    CHECK(std::abs(*f - want) < 1e-8);
  }
}

TEST_CASE("structural invariants along rays") {
  auto bump = std::make_shared<FlatTorus>(3, 2 * pi, std::vector<Bump>{{vec({3.0, 3.0, 3.0}), 0.6, 0.1}});
  auto line = submanifolds::closed_geodesic(vec({0.0, 3.0, 3.0}), 0, 2 * pi, 8);
  const auto node = make_base_node(line, *bump, vec({2.9}), 1.0);
  for (double ang : {0.1, 1.3}) {
    const double h = 5e-4;
    std::vector<double> times;
    for (double t : {0.3, 0.6, 1.0})
      for (int j = -2; j <= 2; ++j) times.push_back(t + j * h);
    const auto res = run(*bump, node, unit(ang), times, 1.1);
    REQUIRE(res.outputs.size() == times.size());
    for (int c = 0; c < 3; ++c) {
      const auto& o = res.outputs;
      const int i = 5 * c + 2;
      // fourth-order central differences
      auto d1 = [&](auto f) {
        return (f(o[i - 2]) - 8 * f(o[i - 1]) + 8 * f(o[i + 1]) - f(o[i + 2])) / (12 * h);
      };
      const Mat S = shape_operator(o[i]);
      const Mat dS = (shape_operator(o[i - 2]) - 8 * shape_operator(o[i - 1]) + 8 * shape_operator(o[i + 1]) -
                      shape_operator(o[i + 2])) /
                     (12 * h);
      CHECK((dS + S * S + o[i].curvature).norm() < 1e-5);
      const double dlogA = d1([](const TransportState& s) { return std::log(volume_density(s)); });
      CHECK(std::abs(dlogA - S.trace()) < 1e-6);
      CHECK(wronskian(o[i]).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(std::abs(g_norm(o[i].g, o[i].v) - 1.0) < 1e-8);
      CHECK(gram_residual(o[i].g, o[i].E) < 1e-8);
      CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
}

TEST_CASE("Taylor law near the submanifold") {
  auto s3 = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic,
                                     vec({0.0, std::sin(0.2), 0.0, -std::cos(0.2)}));
  auto sph = submanifolds::round_sphere(s3, 0.8, Vec(), 8);
  auto s4 = std::make_shared<Sphere>(4, 1.0);
  auto gc = submanifolds::great_circle(s4, 8);
  const auto n1 = make_base_node(sph, *s3, vec({1.0, 0.5}), 1.0);
  const auto n2 = make_base_node(gc, *s4, vec({0.5}), 1.0);
  struct Case {
    const ChartManifold* M;
    const BaseNode* b;
    Vec p;
  };
  for (const Case& c : {Case{s3.get(), &n1, vec({1.0})}, Case{s4.get(), &n2, vec({0.0, 0.6, 0.8})}}) {
    const double t = 1e-3;
    const auto res = run(*c.M, *c.b, c.p, {t, 2 * t}, 2 * t);
    const auto& s = res.outputs.at(0);
    const int m = s.m;
    const int q = static_cast<int>(s.J.rows());
    const Mat S = shape_operator(s);
    Mat P = Mat::Zero(q, q);
    P.bottomRightCorner(q - m, q - m) = Mat::Identity(q - m, q - m);
    CHECK((t * S - P).cwiseAbs().maxCoeff() < 1e-2);
    CHECK((S.topLeftCorner(m, m) - c.b->weingarten(c.p)).cwiseAbs().maxCoeff() < 1e-2);
    const int d = q - m;
    const double r1 = volume_density(s) / std::pow(t, d);
    const double r2 = volume_density(res.outputs.at(1)) / std::pow(2 * t, d);
    CHECK(std::abs(2 * r1 - r2 - 1.0) < 1e-3);
  }
}
