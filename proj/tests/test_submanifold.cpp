#include "doctest.h"

#include "tubevol/model_kernels.hpp"
#include "tubevol/submanifold.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

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

}  // namespace

TEST_CASE("sub-torus frames and weights") {
  FlatTorus t4(4, 2 * pi);
  auto circle = submanifolds::closed_geodesic(vec({0.0, 1.0, 2.0, 3.0}), 0, 2 * pi, 8);
  const auto f = frames_at(circle, t4, vec({0.4}));
  CHECK(std::abs(std::abs(f.tangent(0, 0)) - 1.0) < 1e-14);
  CHECK(f.tangent.col(0).tail(3).norm() < 1e-14);
  CHECK(f.normal.row(0).norm() < 1e-14);
  CHECK(std::abs(std::abs(f.normal.bottomRows(3).determinant()) - 1.0) < 1e-14);

  const auto grid = unit_normal_grid(circle, t4, 16);
  CHECK(grid.total_weight() == Approx(2 * pi * 4 * pi).epsilon(1e-8));
  CHECK(grid.volume_sigma() == Approx(2 * pi).epsilon(1e-14));
  CHECK(grid.max_mean_curvature() < 1e-14);
  for (const auto& b : grid.base) CHECK(b.weingarten(vec({0.0, 0.6, 0.8})).norm() < 1e-14);

  auto torus2 = submanifolds::sub_torus(vec({0.0, 0.0, 1.0, 2.0, 3.0}), {0, 1}, 2 * pi, 4);
  FlatTorus t5(5, 2 * pi);
  CHECK(unit_normal_grid(torus2, t5, 16).total_weight() == Approx(4 * pi * pi * 4 * pi).epsilon(1e-8));
  auto longer = submanifolds::sub_torus(vec({0.0, 0.0, 1.0, 2.0, 3.0}), {0, 1}, 4 * pi, 4);
  CHECK(unit_normal_grid(longer, t5, 16).volume_sigma() == Approx(16 * pi * pi).epsilon(1e-14));
}

TEST_CASE("points and hypersurfaces") {
  Euclidean r3(3);
  auto p = submanifolds::point(vec({0.1, 0.2, 0.3}));
  const auto g = unit_normal_grid(p, r3, 16);
  CHECK(g.base.size() == 1);
  CHECK(g.total_weight() == Approx(4 * pi).epsilon(1e-8));
  CHECK(g.base[0].eta.norm() == 0.0);
  CHECK(mean_curvature_vector(p, r3, Vec(0)).norm() == 0.0);

  auto s3 = std::make_shared<Sphere>(3, 1.0);
  auto eq = submanifolds::equator(s3, 16);
  const auto ge = unit_normal_grid(eq, *s3, 16);
  CHECK(ge.fiber.points.size() == 2);
  CHECK(ge.total_weight() == Approx(2 * 4 * pi).epsilon(1e-6));
  CHECK(ge.max_gram_residual() < 1e-10);
  for (const auto& b : ge.base) {
    CHECK(b.weingarten(vec({1.0})).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(frames_at(eq, *s3, vec({0.0, 1.0})), RankDeficiencyError);
}

TEST_CASE("great circle in S^3") {
  auto s3 = std::make_shared<Sphere>(3, 1.0);
  auto gc = submanifolds::great_circle(s3, 12);
  const auto grid = unit_normal_grid(gc, *s3, 16);
  CHECK(grid.max_gram_residual() < 1e-10);
  CHECK(grid.max_mean_curvature() < 1e-8);
  CHECK(grid.volume_sigma() == Approx(2 * pi).epsilon(1e-12));
  CHECK(grid.total_weight() == Approx(4 * pi * pi).epsilon(1e-8));
  for (const auto& b : grid.base) {
    CHECK(b.frames.tangent.cols() == 1);
    CHECK(b.frames.normal.cols() == 2);
    CHECK(std::abs(b.weingarten(vec({0.6, 0.8}))(0, 0)) < 1e-8);
  }
}

TEST_CASE("round sphere sign convention") {
  const double a = 1.7;
  auto r3 = std::make_shared<Euclidean>(3);
  const Vec c = vec({0.3, -0.2, 0.5});
  auto sph = submanifolds::round_sphere(r3, a, c, 12);
  for (const Vec& s : {vec({0.7, 1.1}), vec({2.0, 4.0})}) {
    const Vec x = sph.point(s);
    const Vec out = (x - c) / a;
    const Mat S = weingarten(sph, *r3, s, out);
    CHECK((S - Mat::Identity(2, 2) / a).cwiseAbs().maxCoeff() < 1e-12);
    const Mat Sin = weingarten(sph, *r3, s, -out);
    CHECK((Sin + Mat::Identity(2, 2) / a).cwiseAbs().maxCoeff() < 1e-12);
    const Vec eta = mean_curvature_vector(sph, *r3, s);
    CHECK(eta.norm() == Approx(1.0 / a).epsilon(1e-12));
    CHECK(eta.dot(out) == Approx(1.0 / a).epsilon(1e-12));
  }
  CHECK_THROWS_AS(weingarten(sph, *r3, vec({0.7, 1.1}), vec({1.0, 0.0, 0.0})), NonNormalVectorError);
  CHECK(unit_normal_grid(submanifolds::round_sphere(r3, a, c, 24), *r3, 4).volume_sigma() == Approx(4 * pi * a * a).epsilon(1e-10));
}

TEST_CASE("small sphere in S^3") {
  auto s3 = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic, vec({0.0, 0.0, 0.0, -1.0}));
  auto sph = submanifolds::round_sphere(s3, 0.8, Vec(), 24);
  const auto grid = unit_normal_grid(sph, *s3, 4);
  CHECK(grid.volume_sigma() == Approx(4 * pi * 0.64).epsilon(1e-10));
  for (const auto& b : grid.base) {
    const Vec X = s3->to_ambient(b.frames.x);
    Vec u = X.head(3) / 0.8;
    Vec out_amb(4);
    out_amb << 0.6 * u, -0.8;
    Mat V(4, 1);
    V.col(0) = out_amb;
    const Vec xi = s3->pushforward(b.frames.x, V).col(0);
    CHECK(g_norm(b.frames.g, xi) == Approx(1.0).epsilon(1e-12));
    const Mat S = weingarten(sph, *s3, b.frames.s, xi);
    CHECK((S - 0.75 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(g_dot(b.frames.g, b.eta, xi) == Approx(0.75).epsilon(1e-10));
  }
}

TEST_CASE("eta against Weingarten traces for random normals") {
  auto s3 = std::make_shared<Sphere>(3, 1.0, Sphere::ChartKind::Stereographic, vec({0.0, 0.0, 0.0, -1.0}));
  auto bump = std::make_shared<FlatTorus>(3, 2 * pi, std::vector<Bump>{{vec({3.0, 3.3, 3.0}), 0.6, 0.1}});
  auto line = submanifolds::closed_geodesic(vec({0.0, 3.0, 3.0}), 0, 2 * pi, 16);
  auto sph = submanifolds::round_sphere(s3, 0.5, Vec(), 8);
  std::mt19937_64 rng(3);
  struct Case {
    const EmbeddedSubmanifold* s;
    const ChartManifold* M;
  };
  for (const Case& c : {Case{&line, bump.get()}, Case{&sph, s3.get()}}) {
    const auto grid = unit_normal_grid(*c.s, *c.M, 8);
    for (const auto& b : grid.base) {
      const Vec p = quad::uniform_sphere_point(static_cast<int>(b.frames.normal.cols()) - 1, rng);
      const Vec xi = b.normal_vector(p);
      const Mat S = weingarten(*c.s, *c.M, b.frames.s, xi);
      CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(std::abs(b.eta_dot(p) - S.trace() / c.s->dim()) < 1e-9);
      CHECK((b.weingarten(p) - S).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  // the bump center is off the line, so the line is not minimal there
  const auto g = unit_normal_grid(line, *bump, 8);
  CHECK(g.max_mean_curvature() > 1e-3);
}

TEST_CASE("factor sphere in S^2 x S^2") {
  auto a = std::make_shared<Sphere>(2, 1.0);
  auto b = std::make_shared<Sphere>(2, 1.0, Sphere::ChartKind::Angular);
  Product M(a, b);
  auto f = submanifolds::product_factor(M, vec({0.0, 0.0}), 16);
  const auto grid = unit_normal_grid(f, M, 16);
  CHECK(grid.volume_sigma() == Approx(4 * pi).epsilon(1e-10));
  CHECK(grid.total_weight() == Approx(8 * pi * pi).epsilon(1e-10));
  CHECK(grid.max_gram_residual() < 1e-10);
  CHECK(grid.max_mean_curvature() < 1e-12);
  for (const auto& n : grid.base) CHECK(n.frames.normal.bottomRows(2).norm() < 1e-14);
}
