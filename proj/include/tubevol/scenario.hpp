#pragma once

#include "tubevol/geometry.hpp"
#include "tubevol/manifolds.hpp"
#include "tubevol/submanifold.hpp"
#include "tubevol/tube.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubevol {

/// Invalid scenario or configuration; `field` is the offending path
/// (for example "manifold.bumps[0].radius").
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field(field) {}
  std::string field;
};

struct BumpSpec {
  std::vector<double> center;
  double radius = 0.5;
  double amplitude = 0.05;
};

struct WarpSpec {
  std::string kind = "cosh";  // exp | cosh | linear | sampled
  double c0 = 1.0;
  double c1 = 1.0;
  std::vector<double> values;  // sampled on [r_lo, r_hi]
};

struct ManifoldSpec {
  /// flat_torus | euclidean | sphere | hyperbolic | product | warped_product
  std::string type = "flat_torus";
  int dim = 3;
  double side = 6.283185307179586;  // flat_torus
  double radius = 1.0;              // sphere
  double curvature = -1.0;          // hyperbolic
  std::string chart = "stereographic";  // sphere: stereographic | angular
  std::vector<double> pole;             // sphere, ambient coordinates
  std::vector<BumpSpec> bumps;          // flat_torus
  std::vector<ManifoldSpec> factors;    // product: exactly two
  WarpSpec warp;                        // warped_product; side is the fiber side
  double r_lo = 0.5;
  double r_hi = 2.0;
};

struct SubmanifoldSpec {
  /// point | closed_geodesic | sub_torus | great_circle | equator | round_sphere | product_factor
  std::string type = "point";
  std::vector<double> base;     // chart coordinates (point, sub-torus base, factor point)
  std::vector<double> ambient;  // point on a sphere given in ambient coordinates
  std::vector<int> axes;        // closed_geodesic (one axis) and sub_torus
  double side = 6.283185307179586;
  double radius = 0.5;  // round_sphere
  int resolution = 8;
};

enum class Check { Hessian, Focal, HkBound, IntegralBound, Lemmas, Structural, RhoK };

const char* to_string(Check check);
std::optional<Check> check_from_string(const std::string& name);

struct Scenario {
  std::string name;
  std::string description;
  ManifoldSpec manifold;
  SubmanifoldSpec submanifold;
  int k = 1;
  double H = 0.0;
  double p = 4.0;
  std::vector<double> radii;
  QuadratureSpec quadrature;
  std::optional<double> validity_radius;  // +inf allowed
  std::map<int, double> known_rho;        // declared rho_k on homogeneous spaces
  std::vector<Check> checks;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
  int ray_samples = 32;
  int certification_samples = 512;
  std::vector<double> lemma_powers;
  /// Constant for the Hessian comparison; empty uses the sampled lower bound.
  std::optional<double> hessian_H;
  /// Declared facts that override the submanifold factory's flags.
  std::optional<bool> minimal_declared;
  std::optional<bool> totally_geodesic_declared;
  /// Test hook: multiplies every measured tube volume.
  double volume_inflation = 1.0;

  bool enabled(Check check) const;
};

struct BuiltScenario {
  std::shared_ptr<ChartManifold> manifold;
  std::shared_ptr<EmbeddedSubmanifold> submanifold;
};

std::shared_ptr<ChartManifold> build_manifold(const ManifoldSpec& spec, const std::string& path = "manifold");
BuiltScenario build(const Scenario& scenario);

/// Built-in catalogue sorted by name (empty when built without it).
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

/// Named suites: "spaceforms" and "all"; throws ConfigError otherwise.
std::vector<Scenario> suite(const std::string& name);
std::vector<std::string> suite_names();

}  // namespace tubevol
