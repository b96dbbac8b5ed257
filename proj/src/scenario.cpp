#include "tubevol/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#ifndef TUBEVOL_BUILTIN_SCENARIOS
#define TUBEVOL_BUILTIN_SCENARIOS 1
#endif

namespace tubevol {

namespace {

constexpr double pi = std::numbers::pi;

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = v[i];
  return out;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

const char* to_string(Check check) {
  switch (check) {
    case Check::Hessian: return "hessian";
    case Check::Focal: return "focal";
    case Check::HkBound: return "hk_bound";
    case Check::IntegralBound: return "integral_bound";
    case Check::Lemmas: return "lemmas";
    case Check::Structural: return "structural";
    case Check::RhoK: return "rho_k";
  }
  return "unknown";
}

std::optional<Check> check_from_string(const std::string& name) {
  for (Check c : {Check::Hessian, Check::Focal, Check::HkBound, Check::IntegralBound, Check::Lemmas,
                  Check::Structural, Check::RhoK})
    if (name == to_string(c)) return c;
  return std::nullopt;
}

bool Scenario::enabled(Check check) const { return std::find(checks.begin(), checks.end(), check) != checks.end(); }

std::shared_ptr<ChartManifold> build_manifold(const ManifoldSpec& spec, const std::string& path) {
  require(spec.dim >= 1 && spec.dim <= kMaxDim, path + ".dim", "out of range");
  if (spec.type == "euclidean") return std::make_shared<Euclidean>(spec.dim);
  if (spec.type == "flat_torus") {
    require(spec.side > 0.0, path + ".side", "must be positive");
    std::vector<Bump> bumps;
    for (std::size_t i = 0; i < spec.bumps.size(); ++i) {
      const BumpSpec& b = spec.bumps[i];
      const std::string bp = path + ".bumps[" + std::to_string(i) + "]";
      require(static_cast<int>(b.center.size()) == spec.dim, bp + ".center", "needs dim entries");
      require(b.radius > 0.0, bp + ".radius", "must be positive");
      bumps.push_back({to_vec(b.center), b.radius, b.amplitude});
    }
    return std::make_shared<FlatTorus>(spec.dim, spec.side, bumps);
  }
  if (spec.type == "sphere") {
    require(spec.radius > 0.0, path + ".radius", "must be positive");
    Sphere::ChartKind kind;
    if (spec.chart == "stereographic") kind = Sphere::ChartKind::Stereographic;
    else if (spec.chart == "angular") kind = Sphere::ChartKind::Angular;
    else throw ConfigError(path + ".chart", "unknown chart '" + spec.chart + "'");
    Vec pole;
    if (!spec.pole.empty()) {
      require(static_cast<int>(spec.pole.size()) == spec.dim + 1, path + ".pole", "needs dim + 1 entries");
      pole = to_vec(spec.pole);
    }
    return std::make_shared<Sphere>(spec.dim, spec.radius, kind, pole);
  }
  if (spec.type == "hyperbolic") {
    require(spec.curvature < 0.0, path + ".curvature", "must be negative");
    return std::make_shared<Hyperbolic>(spec.dim, spec.curvature);
  }
  if (spec.type == "product") {
    require(spec.factors.size() == 2, path + ".factors", "needs exactly two factors");
    auto a = build_manifold(spec.factors[0], path + ".factors[0]");
    auto b = build_manifold(spec.factors[1], path + ".factors[1]");
    require(a->dim() + b->dim() <= kMaxDim, path + ".factors", "total dimension too large");
    return std::make_shared<Product>(a, b);
  }
  if (spec.type == "warped_product") {
    require(spec.dim >= 2, path + ".dim", "needs at least 2");
    require(spec.r_lo < spec.r_hi, path + ".r_hi", "must exceed r_lo");
    require(spec.side > 0.0, path + ".side", "must be positive");
    Warp w;
    w.c0 = spec.warp.c0;
    w.c1 = spec.warp.c1;
    w.r_lo = spec.r_lo;
    w.r_hi = spec.r_hi;
    if (spec.warp.kind == "exp") w.kind = Warp::Kind::Exp;
    else if (spec.warp.kind == "cosh") w.kind = Warp::Kind::Cosh;
    else if (spec.warp.kind == "linear") w.kind = Warp::Kind::Linear;
    else if (spec.warp.kind == "sampled") {
      w.kind = Warp::Kind::Sampled;
      require(spec.warp.values.size() >= 4, path + ".warp.values", "needs at least 4 samples");
      for (double v : spec.warp.values) require(v > 0.0, path + ".warp.values", "must be positive");
      w.values = spec.warp.values;
    } else {
      throw ConfigError(path + ".warp.kind", "unknown warp '" + spec.warp.kind + "'");
    }
    return std::make_shared<WarpedProduct>(spec.dim, w, spec.r_lo, spec.r_hi, spec.side);
  }
  throw ConfigError(path + ".type", "unknown manifold type '" + spec.type + "'");
}

BuiltScenario build(const Scenario& sc) {
  BuiltScenario out;
  out.manifold = build_manifold(sc.manifold);
  out.manifold->volume_validity_radius = sc.validity_radius;
  const SubmanifoldSpec& s = sc.submanifold;
  const int n = out.manifold->dim();
  require(s.resolution >= 1, "submanifold.resolution", "must be >= 1");
  auto sphere = std::dynamic_pointer_cast<Sphere>(out.manifold);
  if (s.type == "point") {
    Vec x;
    if (!s.ambient.empty()) {
      require(sphere != nullptr, "submanifold.ambient", "only for sphere manifolds");
      require(static_cast<int>(s.ambient.size()) == n + 1, "submanifold.ambient", "needs dim + 1 entries");
      x = sphere->from_ambient(to_vec(s.ambient));
    } else {
      require(static_cast<int>(s.base.size()) == n, "submanifold.base", "needs dim entries");
      x = to_vec(s.base);
    }
    require(out.manifold->in_domain(x), "submanifold.base", "point outside the chart domain");
    out.submanifold = std::make_shared<EmbeddedSubmanifold>(submanifolds::point(x));
  } else if (s.type == "closed_geodesic" || s.type == "sub_torus") {
    const std::string kind = out.manifold->kind();
    require(kind == "flat_torus" || kind == "euclidean" || kind == "warped_product", "submanifold.type",
            "needs a flat torus, Euclidean or warped product manifold");
    require(static_cast<int>(s.base.size()) == n, "submanifold.base", "needs dim entries");
    require(!s.axes.empty(), "submanifold.axes", "must not be empty");
    for (int a : s.axes) require(a >= 0 && a < n, "submanifold.axes", "axis out of range");
    if (s.type == "closed_geodesic") {
      require(s.axes.size() == 1, "submanifold.axes", "closed_geodesic takes one axis");
      out.submanifold = std::make_shared<EmbeddedSubmanifold>(
          submanifolds::closed_geodesic(to_vec(s.base), s.axes[0], s.side, s.resolution));
    } else {
      require(static_cast<int>(s.axes.size()) < n, "submanifold.axes", "too many axes");
      out.submanifold = std::make_shared<EmbeddedSubmanifold>(
          submanifolds::sub_torus(to_vec(s.base), s.axes, s.side, s.resolution));
    }
  } else if (s.type == "great_circle" || s.type == "equator") {
    require(sphere != nullptr, "submanifold.type", "needs a sphere manifold");
    require(sphere->chart() == Sphere::ChartKind::Stereographic, "manifold.chart",
            "great circles and equators need the stereographic chart");
    out.submanifold = std::make_shared<EmbeddedSubmanifold>(
        s.type == "great_circle" ? submanifolds::great_circle(sphere, s.resolution)
                                 : submanifolds::equator(sphere, s.resolution));
  } else if (s.type == "round_sphere") {
    require(s.radius > 0.0, "submanifold.radius", "must be positive");
    Vec center;
    if (!s.base.empty()) center = to_vec(s.base);
    out.submanifold = std::make_shared<EmbeddedSubmanifold>(
        submanifolds::round_sphere(out.manifold, s.radius, center, s.resolution));
  } else if (s.type == "product_factor") {
    auto prod = std::dynamic_pointer_cast<Product>(out.manifold);
    require(prod != nullptr, "submanifold.type", "needs a product manifold");
    require(static_cast<int>(s.base.size()) == prod->first().dim(), "submanifold.base",
            "needs the first factor's dimension");
    out.submanifold =
        std::make_shared<EmbeddedSubmanifold>(submanifolds::product_factor(*prod, to_vec(s.base), s.resolution));
  } else {
    throw ConfigError("submanifold.type", "unknown submanifold type '" + s.type + "'");
  }
  if (sc.minimal_declared) out.submanifold->is_minimal_declared = *sc.minimal_declared;
  if (sc.totally_geodesic_declared) out.submanifold->is_totally_geodesic_declared = *sc.totally_geodesic_declared;
  return out;
}

namespace {

Scenario base_scenario(std::string name, std::string description) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  return s;
}

ManifoldSpec sphere3(std::vector<double> pole, double radius = 1.0) {
  ManifoldSpec m;
  m.type = "sphere";
  m.dim = 3;
  m.radius = radius;
  m.pole = std::move(pole);
  return m;
}

std::vector<Scenario> catalogue() {
  std::vector<Scenario> out;
  const double inf = std::numeric_limits<double>::infinity();

  for (double eps : {0.1, 0.05}) {
    Scenario s = base_scenario(eps == 0.1 ? "bump_torus" : "bump_torus_mild",
                               "closed geodesic through a conformal bump on the flat 3-torus");
    s.manifold.type = "flat_torus";
    s.manifold.dim = 3;
    s.manifold.side = 2 * pi;
    s.manifold.bumps = {{{3.0, 3.0, 3.0}, 0.6, eps}};
    s.submanifold.type = "closed_geodesic";
    s.submanifold.base = {0.0, 3.0, 3.0};
    s.submanifold.axes = {0};
    s.submanifold.side = 2 * pi;
    s.submanifold.resolution = 48;
    s.k = 1;
    s.H = -0.1;
    s.p = 3.0;
    s.radii = {0.4, 0.8};
    s.validity_radius = 1.0;
    s.quadrature.fiber_resolution = 16;
    s.lemma_powers = {3.0, 4.0};
    if (eps == 0.1) {
      s.quadrature.monte_carlo_samples = 4000;
      s.checks = {Check::Hessian, Check::IntegralBound, Check::Lemmas, Check::Structural};
    } else {
      s.checks = {Check::Hessian, Check::Lemmas, Check::Structural};
    }
    s.ray_samples = 64;
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("flat_t4_circle", "coordinate circle in the flat 4-torus");
    s.manifold.type = "flat_torus";
    s.manifold.dim = 4;
    s.submanifold.type = "closed_geodesic";
    s.submanifold.base = {0.0, 1.0, 2.0, 3.0};
    s.submanifold.axes = {0};
    s.submanifold.resolution = 4;
    s.k = 1;
    s.H = 0.0;
    s.p = 4.0;
    s.radii = {0.25, 0.5};
    s.validity_radius = pi;
    s.known_rho = {{1, 0.0}, {2, 0.0}, {3, 0.0}};
    s.hessian_H = 0.0;
    s.lemma_powers = {4.0, 6.0};
    s.ray_samples = 64;
    s.checks = {Check::Hessian, Check::HkBound, Check::IntegralBound, Check::Lemmas, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("flat_t5_torus2", "coordinate 2-torus in the flat 5-torus");
    s.manifold.type = "flat_torus";
    s.manifold.dim = 5;
    s.submanifold.type = "sub_torus";
    s.submanifold.base = {0.0, 0.0, 1.0, 2.0, 3.0};
    s.submanifold.axes = {0, 1};
    s.submanifold.resolution = 4;
    s.k = 2;
    s.H = 0.0;
    s.p = 4.0;
    s.radii = {0.4};
    s.validity_radius = pi;
    s.known_rho = {{1, 0.0}, {2, 0.0}, {3, 0.0}, {4, 0.0}};
    s.lemma_powers = {4.0, 6.0};
    s.ray_samples = 64;
    s.checks = {Check::HkBound, Check::IntegralBound, Check::Lemmas, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("h3_point", "distance from a point in hyperbolic 3-space");
    s.manifold.type = "hyperbolic";
    s.manifold.dim = 3;
    s.manifold.curvature = -1.0;
    s.submanifold.type = "point";
    s.submanifold.base = {0.0, 0.0, 1.0};
    s.k = 2;
    s.H = -1.0;
    s.radii = {2.0};
    s.validity_radius = inf;
    s.known_rho = {{1, -1.0}, {2, -2.0}};
    s.hessian_H = -1.0;
    s.checks = {Check::Hessian, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("s2xs2_factor", "factor sphere {p} x S^2 in S^2 x S^2");
    s.manifold.type = "product";
    s.manifold.dim = 4;
    ManifoldSpec a = sphere3({});
    a.dim = 2;
    ManifoldSpec b = a;
    b.chart = "angular";
    s.manifold.factors = {a, b};
    s.submanifold.type = "product_factor";
    s.submanifold.base = {0.0, 0.0};
    s.submanifold.resolution = 16;
    s.k = 1;
    s.H = 0.0;
    s.radii = {0.4};
    s.validity_radius = pi;
    s.known_rho = {{1, 0.0}, {2, 0.0}, {3, 1.0}};
    s.checks = {Check::HkBound, Check::RhoK, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("s3_great_circle", "great circle in the unit 3-sphere");
    s.manifold = sphere3({0.0, 0.0, std::cos(0.123), std::sin(0.123)});
    s.submanifold.type = "great_circle";
    s.k = 1;
    s.H = 1.0;
    s.radii = {pi / 4, pi / 2};
    s.validity_radius = pi / 2;
    s.known_rho = {{1, 1.0}, {2, 2.0}};
    s.hessian_H = 1.0;
    s.lemma_powers = {3.0, 4.0};
    s.ray_samples = 64;
    s.checks = {Check::Hessian, Check::Focal, Check::HkBound, Check::Lemmas, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("s3_point", "distance from a point in the unit 3-sphere");
    const double P[4] = {0.6, 0.0, 0.0, 0.8};
    const double w[4] = {0.0, 1.0, 0.0, 0.0};
    std::vector<double> pole(4);
    for (int i = 0; i < 4; ++i) pole[i] = std::cos(2.0) * P[i] + std::sin(2.0) * w[i];
    s.manifold = sphere3(pole);
    s.submanifold.type = "point";
    s.submanifold.ambient = {P[0], P[1], P[2], P[3]};
    s.k = 2;
    s.H = 1.0;
    s.radii = {1.0, 2.5};
    s.validity_radius = pi;
    s.known_rho = {{1, 1.0}, {2, 2.0}};
    s.hessian_H = 1.0;
    s.checks = {Check::Hessian, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("s3_small_sphere", "round sphere of radius 0.8 in the unit 3-sphere");
    s.manifold = sphere3({0.0, std::sin(0.2), 0.0, -std::cos(0.2)});
    s.submanifold.type = "round_sphere";
    s.submanifold.radius = 0.8;
    s.k = 2;
    s.H = 1.0;
    s.radii = {0.5};
    s.validity_radius = std::asin(0.8);
    s.known_rho = {{1, 1.0}, {2, 2.0}};
    s.hessian_H = 1.0;
    s.checks = {Check::Hessian, Check::Focal, Check::Structural};
    out.push_back(s);
  }
  {
    Scenario s = base_scenario("sn_equator", "totally geodesic equator in the unit 3-sphere");
    s.manifold = sphere3({0.3, -0.2, 0.5, std::sqrt(1 - 0.09 - 0.04 - 0.25)});
    s.submanifold.type = "equator";
    s.submanifold.resolution = 8;
    s.k = 2;
    s.H = 1.0;
    s.radii = {1.0};
    s.validity_radius = pi / 2;
    s.known_rho = {{1, 1.0}, {2, 2.0}};
    s.hessian_H = 1.0;
    s.checks = {Check::Hessian, Check::Focal, Check::Structural};
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.name < b.name; });
  return out;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() {
  if (!TUBEVOL_BUILTIN_SCENARIOS) return {};
  return catalogue();
}

std::optional<Scenario> find_builtin(const std::string& name) {
  for (Scenario& s : builtin_scenarios())
    if (s.name == name) return s;
  return std::nullopt;
}

std::vector<std::string> suite_names() { return {"all", "spaceforms"}; }

std::vector<Scenario> suite(const std::string& name) {
  if (name == "all") return builtin_scenarios();
  if (name == "spaceforms") {
    std::vector<Scenario> out;
    for (Scenario& s : builtin_scenarios())
      if (s.name.rfind("flat_", 0) == 0 || s.name.rfind("s3_", 0) == 0 || s.name == "h3_point" ||
          s.name == "sn_equator")
        out.push_back(s);
    return out;
  }
  throw ConfigError("suite", "unknown suite '" + name + "'");
}

}  // namespace tubevol
