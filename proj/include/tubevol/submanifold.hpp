#pragma once

#include "tubevol/geometry.hpp"
#include "tubevol/manifolds.hpp"
#include "tubevol/quadrature.hpp"

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace tubevol {

struct NonNormalVectorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Chart-valued embedding s -> x(s); evaluated on hyper-dual numbers so
/// first and second parameter derivatives are exact.
using Embedding = std::function<void(const HyperDual* s, HyperDual* x)>;

/// A closed embedded submanifold of dimension m given by a parameterization
/// over a box. Periodic parameter axes use trapezoid rules, the others
/// Gauss-Legendre rules, both with `resolution[a]` nodes.
class EmbeddedSubmanifold {
 public:
  EmbeddedSubmanifold(std::string name, int m, int n, ChartBox parameters, Embedding embedding,
                      std::vector<int> resolution);

  const std::string& name() const { return name_; }
  int dim() const { return m_; }
  int ambient_dim() const { return n_; }
  const ChartBox& parameters() const { return params_; }
  const std::vector<int>& resolution() const { return resolution_; }
  void set_resolution(std::vector<int> resolution);

  bool is_minimal_declared = false;
  bool is_totally_geodesic_declared = false;

  Vec point(const Vec& s) const;
  /// n x m matrix of d x / d s_a.
  Mat differential(const Vec& s) const;
  /// Coordinate second derivatives d_a d_b x, indexed [a * m + b].
  std::vector<Vec> second_derivatives(const Vec& s) const;

  /// Parameter nodes and weights (weights without the area element).
  struct ParameterNode {
    Vec s;
    double weight = 0.0;
  };
  std::vector<ParameterNode> parameter_nodes() const;

 private:
  std::string name_;
  int m_;
  int n_;
  ChartBox params_;
  Embedding embedding_;
  std::vector<int> resolution_;
};

/// Orthonormal frames at one point of the submanifold.
struct LocalFrames {
  Vec s;
  Vec x;
  Mat g;
  Mat tangent;  // n x m
  Mat normal;   // n x (n - m)
};

LocalFrames frames_at(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s);

/// Weingarten map S_xi(X) = (nabla_X xi)^T in the orthonormal tangent frame,
/// so that <eta, xi> = tr(S_xi) / m. For the round sphere of radius a in
/// Euclidean space the outward normal gives +I / a.
Mat weingarten(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s, const Vec& xi);

/// Mean curvature vector in chart components; zero for points.
Vec mean_curvature_vector(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s);

/// Per-node data for normal rays: frames, area weight and the Weingarten
/// maps of the normal frame vectors (S_xi is linear in xi).
struct BaseNode {
  LocalFrames frames;
  double weight = 0.0;             // parameter weight times the induced area element
  std::vector<Mat> shape;          // shape[c] = S_{normal.col(c)}
  Vec eta;                         // mean curvature vector, chart components

  /// Unit normal with fiber coordinates `p` (unit vector in R^{n-m}).
  Vec normal_vector(const Vec& p) const { return frames.normal * p; }
  Mat weingarten(const Vec& p) const;
  double eta_dot(const Vec& p) const;
};

BaseNode make_base_node(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s,
                        double param_weight);

/// Product quadrature over the unit normal bundle.
struct NormalFiberGrid {
  std::vector<BaseNode> base;
  quad::SphereGrid fiber;  // points in R^{n-m}, weights summing to vol(S^{n-m-1})

  double volume_sigma() const;
  double total_weight() const;
  double max_gram_residual() const;
  double max_mean_curvature() const;
};

/// Fiber grid: product-angle rule of the given resolution on S^{n-m-1};
/// the azimuth is offset by `phase` grid cells.
NormalFiberGrid unit_normal_grid(const EmbeddedSubmanifold& sigma, const ChartManifold& M,
                                 int fiber_resolution, double phase = 0.5);

/// Uniform random point of the unit normal bundle: base node chosen with
/// probability proportional to its weight and a uniform fiber direction.
struct NormalSample {
  int base = 0;
  Vec p;
};
NormalSample sample_unit_normal(const NormalFiberGrid& grid, std::mt19937_64& rng);

namespace submanifolds {

/// A single point (m = 0).
EmbeddedSubmanifold point(const Vec& x);

/// Coordinate sub-torus through `base` along the given axes of a flat
/// (possibly perturbed) torus of side `side`.
EmbeddedSubmanifold sub_torus(const Vec& base, const std::vector<int>& axes, double side,
                              int resolution);

/// Closed geodesic along one coordinate axis of a torus.
EmbeddedSubmanifold closed_geodesic(const Vec& base, int axis, double side, int resolution);

/// Great circle (cos s, sin s, 0, ...) of a round sphere.
EmbeddedSubmanifold great_circle(std::shared_ptr<const Sphere> sphere, int resolution);

/// Equator {X_{n+1} = 0} of S^n.
EmbeddedSubmanifold equator(std::shared_ptr<const Sphere> sphere, int resolution);

/// Round (n-1)-sphere of intrinsic radius a: in Euclidean space centered at
/// `center`, in S^n(R) the level set X_{n+1} = sqrt(R^2 - a^2).
EmbeddedSubmanifold round_sphere(std::shared_ptr<const ChartManifold> ambient, double a,
                                 const Vec& center, int resolution);

/// {p} x N inside a product whose second factor N is covered by its chart box.
EmbeddedSubmanifold product_factor(const Product& product, const Vec& p, int resolution);

}  // namespace submanifolds

}  // namespace tubevol
