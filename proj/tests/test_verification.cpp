#include "doctest.h"

#include "tubevol/model_kernels.hpp"
#include "tubevol/verification.hpp"

#include <cmath>
#include <numbers>

using namespace tubevol;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

Scenario builtin(const std::string& name, int rays = 16) {
  auto s = find_builtin(name);
  REQUIRE(s.has_value());
  s->ray_samples = rays;
  return *s;
}

const BoundReport& find_variant(const std::vector<BoundReport>& reports, const std::string& variant) {
  for (const BoundReport& r : reports)
    if (r.variant == variant) return r;
  FAIL("missing variant " << variant);
  return reports.front();
}

}  // namespace

TEST_CASE("Laplacian comparison is an equality around a point in hyperbolic space") {
  const auto reports = check_hessian_comparison(builtin("h3_point"));
  REQUIRE(reports.size() == 2);  // normal and generic k-frames, k = n-1
  for (const BoundReport& r : reports) {
    CHECK(r.status == CheckStatus::Evaluated);
    CHECK(r.passed);
    CHECK(std::abs(r.slack) < 1e-5);
    CHECK(r.equality);
    // the model is 2 coth t
    const double t = r.constants.at("t");
    CHECK(r.bound == Approx(2.0 / std::tanh(t)).epsilon(1e-12));
  }
}

TEST_CASE("tangential comparison along a great circle") {
  const auto reports = check_hessian_comparison(builtin("s3_great_circle"));
  const BoundReport& tan = find_variant(reports, "tangential");
  CHECK(tan.constants.at("w0") == Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(tan.bound == Approx(-std::tan(tan.constants.at("t"))).epsilon(1e-12));
  CHECK(std::abs(tan.slack) < 1e-6);
  CHECK(tan.equality);
  const BoundReport& generic = find_variant(reports, "generic");
  CHECK(generic.passed);
  CHECK(generic.slack > 1e-4);  // mixed frames sit strictly below cot t
}

TEST_CASE("comparison on the bump torus uses a sampled lower bound") {
  const auto reports = check_hessian_comparison(builtin("bump_torus_mild", 24));
  REQUIRE(reports.size() == 3);
  for (const BoundReport& r : reports) {
    CHECK(r.passed);
    CHECK(r.slack >= -1e-5);
    CHECK(r.constants.at("H") < 0.0);
  }
}

TEST_CASE("Hessian certification failure is a precondition violation") {
  Scenario s = builtin("s3_point");
  s.hessian_H = 1.5;  // sec = 1 < 1.5
  const auto reports = check_hessian_comparison(s);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].status == CheckStatus::PreconditionViolation);
  CHECK_FALSE(reports[0].is_failure());
}

TEST_CASE("focal radius") {
  const BoundReport eq = check_focal_radius(builtin("sn_equator"));
  CHECK(eq.measured == Approx(pi / 2).epsilon(1e-6));
  CHECK(std::abs(eq.measured - pi / 2) < 1e-6);
  CHECK(eq.equality);

  const BoundReport small = check_focal_radius(builtin("s3_small_sphere"));
  CHECK(small.passed);
  CHECK(small.measured < pi / 2 - 1e-3);
  CHECK(small.measured == Approx(std::asin(0.8)).epsilon(1e-7));
  CHECK_FALSE(small.equality);

  Scenario flat = builtin("flat_t4_circle");
  const BoundReport v = check_focal_radius(flat);
  CHECK(v.status == CheckStatus::PreconditionViolation);
  CHECK_FALSE(v.is_failure());
}

TEST_CASE("comparison-density bound") {
  const BoundReport s3 = check_hk_bound(builtin("s3_great_circle"), pi / 4);
  CHECK(s3.measured == Approx(pi * pi).epsilon(1e-5));
  CHECK(s3.bound == Approx(pi * pi).epsilon(1e-5));
  CHECK(s3.equality);

  const BoundReport flat = check_hk_bound(builtin("flat_t4_circle"), 0.5);
  CHECK(std::abs(flat.measured - pi * pi / 3) < 1e-6);
  CHECK(std::abs(flat.bound - pi * pi / 3) < 1e-6);
  CHECK(flat.equality);

  const BoundReport prod = check_hk_bound(builtin("s2xs2_factor"), 0.4);
  CHECK(prod.status == CheckStatus::Evaluated);
  CHECK(prod.slack > 0.0);
  CHECK_FALSE(prod.equality);
  // vol(S^2) * geodesic disk of radius 0.4 in S^2, against 4 pi * 2 pi r^2 / 2
  CHECK(prod.measured == Approx(4 * pi * 2 * pi * (1 - std::cos(0.4))).epsilon(1e-6));
  CHECK(prod.bound == Approx(4 * pi * pi * 0.16).epsilon(1e-9));

  const BoundReport point = check_hk_bound(builtin("h3_point"), 1.0);
  CHECK(point.status == CheckStatus::PreconditionViolation);
}

TEST_CASE("integral-curvature bound") {
  const auto flat = check_integral_bound(builtin("flat_t4_circle"), 0.5);
  const BoundReport& g = find_variant(flat, "global_norm,r=0.5");
  CHECK(std::abs(g.measured - pi * pi / 3) < 1e-5);
  CHECK(std::abs(g.bound - pi * pi / 3) < 1e-5);
  CHECK(g.equality);
  CHECK(g.enforced);
  CHECK_FALSE(find_variant(flat, "tube_norm,r=0.5").enforced);
  CHECK_FALSE(find_variant(flat, "global_norm_safety,r=0.5").enforced);

  const auto t5 = check_integral_bound(builtin("flat_t5_torus2"), 0.4);
  const BoundReport& g5 = find_variant(t5, "global_norm,r=0.40000000000000002");
  const double expected = 4 * pi * pi * 4 * pi * std::pow(0.4, 3) / 3;
  CHECK(g5.measured == Approx(expected).epsilon(1e-9));
  CHECK(std::abs(g5.slack) < 1e-5);

  const auto pos = check_integral_bound(builtin("s3_great_circle"), 0.5);
  REQUIRE(pos.size() == 1);
  CHECK(pos[0].status == CheckStatus::PreconditionViolation);

  Scenario hypersurface = builtin("s3_small_sphere");
  hypersurface.H = 0.0;
  const auto nm = check_integral_bound(hypersurface, 0.3);
  REQUIRE(nm.size() == 1);
  CHECK(nm[0].status == CheckStatus::PreconditionViolation);
  CHECK(nm[0].note.find("m < n-1") != std::string::npos);
}

TEST_CASE("integral bound with curvature deficit") {
  Scenario s = builtin("bump_torus");
  s.quadrature.monte_carlo_samples = 1500;
  const auto reports = check_integral_bound(s, 0.4);
  const BoundReport& g = find_variant(reports, "global_norm,r=0.40000000000000002");
  CHECK(g.passed);
  CHECK(g.slack > 0.0);
  CHECK(g.constants.at("deficit_norm") > 0.0);
  const BoundReport& t = find_variant(reports, "tube_norm,r=0.40000000000000002");
  CHECK(t.constants.at("deficit_norm") > 0.0);
  CHECK(t.constants.at("deficit_norm") <= g.constants.at("deficit_norm") * (1 + 1e-3));
  const BoundReport& mc = find_variant(reports, "monte_carlo,r=0.40000000000000002");
  CHECK(mc.passed);
}

TEST_CASE("growth lemmas") {
  const auto flat = check_lemma_51_52(builtin("flat_t4_circle"));
  for (const BoundReport& r : flat) {
    CHECK(r.status == CheckStatus::Evaluated);
    CHECK(std::abs(r.slack) < 1e-8);
  }
  CHECK(std::abs(find_variant(flat, "J_growth").measured) < 1e-8);

  const auto s3 = check_lemma_51_52(builtin("s3_great_circle"));
  const BoundReport& j = find_variant(s3, "J_growth");
  // J' Y = -sin^3 t <= 0
  CHECK(j.measured <= 0.0);
  for (const BoundReport& r : s3) CHECK_FALSE(r.is_failure());

  const auto bump = check_lemma_51_52(builtin("bump_torus", 24));
  for (const BoundReport& r : bump) {
    CHECK_FALSE(r.is_failure());
    if (r.enforced) CHECK(r.slack >= -1e-5);
  }

  const auto point = check_lemma_51_52(builtin("h3_point"));
  REQUIRE(point.size() == 1);
  CHECK(point[0].status == CheckStatus::PreconditionViolation);
}

TEST_CASE("structural residuals") {
  for (const char* name : {"s3_small_sphere", "bump_torus_mild", "h3_point"}) {
    const auto reports = check_structural(builtin(name));
    REQUIRE(reports.size() == 4);
    for (const BoundReport& r : reports) CHECK_MESSAGE(r.passed, name << " " << r.variant);
  }
}

TEST_CASE("rho_k on the product of spheres") {
  const auto reports = check_rho_k(builtin("s2xs2_factor"));
  for (const BoundReport& r : reports) CHECK_MESSAGE(r.passed, r.variant);
  CHECK(find_variant(reports, "search_vs_declared,k=2").constants.at("refined") == Approx(0.0).scale(1.0).epsilon(1e-3));
  CHECK(find_variant(reports, "search_vs_declared,k=3").constants.at("refined") == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("suites") {
  const SuiteReport empty = run_suite("empty", {});
  CHECK(empty.reports.empty());
  CHECK(empty.success());

  Scenario bad = builtin("flat_t4_circle");
  bad.name = "flat_focal";
  bad.checks = {Check::Focal};
  const SuiteReport one = run_suite("one", {bad});
  CHECK(one.precondition_violations() == 1);
  CHECK(one.reports.size() == 1);
  CHECK(one.success());

  Scenario inflated = builtin("flat_t4_circle");
  inflated.checks = {Check::HkBound};
  inflated.radii = {0.5};
  inflated.volume_inflation = 1.1;
  const SuiteReport fail = run_suite("inflated", {inflated});
  CHECK(fail.failures() == 1);
  CHECK_FALSE(fail.success());

  // sorted by scenario name and deterministic
  Scenario a = builtin("h3_point", 4), b = builtin("s3_point", 4);
  const SuiteReport r1 = run_suite("pair", {b, a});
  const SuiteReport r2 = run_suite("pair", {a, b});
  CHECK(r1.reports.front().scenario == "h3_point");
  CHECK(to_json(r1) == to_json(r2));
  CHECK(to_csv(r1) == to_csv(r2));
  CHECK(to_csv(r1).rfind("scenario,check,variant,status", 0) == 0);
}

TEST_CASE("volume table") {
  const auto rows = volume_table(builtin("flat_t4_circle"), {0.0, 0.5});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 0.0);
  CHECK(rows[1].value == Approx(pi * pi / 3).epsilon(1e-8));
  REQUIRE(rows[1].comparison_bound.has_value());
  REQUIRE(rows[1].integral_bound.has_value());
  CHECK(*rows[1].integral_bound == Approx(pi * pi / 3).epsilon(1e-8));
  const auto point = volume_table(builtin("h3_point"), {0.5});
  CHECK_FALSE(point[0].comparison_bound.has_value());
  CHECK_FALSE(point[0].integral_bound.has_value());
  CHECK(point[0].value == Approx(pi * (std::sinh(1.0) - 1.0)).epsilon(1e-7));
}
