#pragma once

#include "tubevol/hyperdual.hpp"
#include "tubevol/linalg.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubevol {

/// Metric, inverse metric and coordinate derivatives at one chart point.
/// dg[a][b][c] = d_c g_ab and ddg[a][b][c][d] = d_c d_d g_ab.
struct MetricJet {
  int n = 0;
  int order = 0;
  Mat g;
  Mat ginv;
  double dg[kMaxDim][kMaxDim][kMaxDim] = {};
  double ddg[kMaxDim][kMaxDim][kMaxDim][kMaxDim] = {};
};

/// Gamma^i_{jk}, stored as v[i][j][k].
struct Christoffel {
  int n = 0;
  double v[kMaxDim][kMaxDim][kMaxDim] = {};
  double operator()(int i, int j, int k) const { return v[i][j][k]; }
};

/// All-lowered curvature tensor with sec(X, Y) = R_ijkl X^i Y^j X^k Y^l for
/// g-orthonormal X, Y, so that <R(X,u)u, Y> = R_ijkl X^i u^j Y^k u^l.
struct Riemann {
  int n = 0;
  double v[kMaxDim][kMaxDim][kMaxDim][kMaxDim] = {};
  double operator()(int i, int j, int k, int l) const { return v[i][j][k][l]; }
};

/// Coordinate box with optional periodic identification per axis.
struct ChartBox {
  Vec lower;
  Vec upper;
  std::vector<bool> periodic;
};

/// A Riemannian metric on one coordinate chart.
///
/// Subclasses provide metric(x); derivatives come either from an override
/// of jet() (closed forms, hyper-dual evaluation) or from central finite
/// differences with steps fd_first and fd_second.
class ChartManifold {
 public:
  explicit ChartManifold(int n);
  virtual ~ChartManifold() = default;

  int dim() const { return n_; }
  virtual std::string kind() const = 0;

  virtual Mat metric(const Vec& x) const = 0;

  /// order 1: g, ginv, dg; order 2 additionally ddg.
  virtual MetricJet jet(const Vec& x, int order) const;

  virtual bool analytic_derivatives() const { return false; }

  /// Canonical box of the chart; unbounded axes carry +-inf.
  const ChartBox& domain() const { return domain_; }

  /// Reduces periodic coordinates into the canonical box.
  Vec wrap(const Vec& x) const;

  /// False when x leaves a non-periodic axis of the box.
  bool in_domain(const Vec& x) const;

  double volume_element(const Vec& x) const;

  /// Radius within which normal exponential maps of the built-in
  /// submanifolds are declared injective.
  std::optional<double> volume_validity_radius;

  double fd_first = 1e-5;
  double fd_second = 1e-4;

 protected:
  MetricJet finite_difference_jet(const Vec& x, int order) const;
  void finish_jet(MetricJet& jet) const;

  int n_;
  ChartBox domain_;
};

/// Chart whose metric is written once as a template over the scalar type;
/// derivatives are exact through hyper-dual evaluation.
template <class Derived>
class AnalyticChart : public ChartManifold {
 public:
  using ChartManifold::ChartManifold;

  Mat metric(const Vec& x) const override {
    double xs[kMaxDim];
    double g[kMaxDim][kMaxDim];
    for (int i = 0; i < n_; ++i) xs[i] = x(i);
    static_cast<const Derived*>(this)->eval_metric(xs, g);
    Mat out(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) out(i, j) = g[i][j];
    return out;
  }

  MetricJet jet(const Vec& x, int order) const override {
    MetricJet jet;
    jet.n = n_;
    jet.order = order;
    jet.g.resize(n_, n_);
    HyperDual xs[kMaxDim];
    HyperDual g[kMaxDim][kMaxDim];
    for (int a = 0; a < n_; ++a) {
      const int b_end = order >= 2 ? n_ : a + 1;
      for (int b = a; b < b_end; ++b) {
        for (int i = 0; i < n_; ++i) {
          xs[i] = HyperDual(x(i), i == a ? 1.0 : 0.0, i == b ? 1.0 : 0.0, 0.0);
        }
        static_cast<const Derived*>(this)->eval_metric(xs, g);
        for (int i = 0; i < n_; ++i) {
          for (int j = 0; j < n_; ++j) {
            if (a == 0 && b == 0) jet.g(i, j) = g[i][j].a;
            if (b == a) jet.dg[i][j][a] = g[i][j].b;
            if (order >= 2) {
              jet.ddg[i][j][a][b] = g[i][j].d;
              jet.ddg[i][j][b][a] = g[i][j].d;
            }
          }
        }
      }
    }
    finish_jet(jet);
    return jet;
  }

  bool analytic_derivatives() const override { return true; }
};

Christoffel christoffel_from_jet(const MetricJet& jet);
Riemann riemann_from_jet(const MetricJet& jet);

/// Levi-Civita connection coefficients Gamma^i_jk.
Christoffel christoffel_at(const ChartManifold& M, const Vec& x);

/// All-lowered curvature tensor (see Riemann for the sign convention).
Riemann curvature_tensor_at(const ChartManifold& M, const Vec& x);

/// Bilinear form (X, Y) -> <R(X,u)u, Y> in coordinates.
Mat curvature_form(const Riemann& R, const Vec& u);

/// R_u = R(., u)u restricted to u^perp in a g-orthonormal frame of u^perp.
struct CurvatureOperatorAt {
  Vec x;
  Vec u;
  Mat frame;  // n x (n-1), coordinate components of the frame
  Mat op;     // (n-1) x (n-1), symmetric
};

struct NonUnitVectorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

CurvatureOperatorAt directional_curvature_operator(const ChartManifold& M, const Vec& x,
                                                   const Vec& u);

/// Partial trace of R_u over span(V); V holds coordinate vectors in u^perp.
double ric_k(const ChartManifold& M, const Vec& x, const Vec& u, const Mat& V);

/// Curvature tensor expressed in a g-orthonormal frame at x.
Riemann orthonormal_curvature(const ChartManifold& M, const Vec& x);

/// Sum of the k smallest eigenvalues of R_u on u^perp for a unit vector u
/// given in orthonormal-frame components.
double ric_k_min_over_subspaces(const Riemann& Rhat, const Vec& u, int k);

struct RhoSearchOptions {
  int min_directions = 2048;
  int refine_starts = 3;
  int refine_rounds = 3;
};

struct RhoSearchResult {
  double grid_value = 0.0;
  double refined_value = 0.0;
  Vec argmin;  // orthonormal-frame components
};

/// Grid search over unit directions plus coordinate-descent refinement.
RhoSearchResult rho_k_search(const Riemann& Rhat, int k, const RhoSearchOptions& opts = {});

/// Exact characterizations, when available: k = n-1 (smallest Ricci
/// eigenvalue) and n = 3, k = 1 (smallest eigenvalue of the curvature
/// operator on 2-vectors); an identically zero tensor gives 0 and a
/// constant-curvature tensor gives k K.
std::optional<double> rho_k_exact(const Riemann& Rhat, int k);

/// Pointwise minimum of Ric_k(u, V) over unit u and k-planes V.
double rho_k_at(const ChartManifold& M, const Vec& x, int k, const RhoSearchOptions& opts = {});

struct QuadratureValue {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// (integral over the box of (rho_k - H)_-^p dvol_g)^(1/p) by a tensor
/// Gauss-Legendre rule with `panels` panels of `order` nodes per axis; the
/// error estimate compares against the rule with half the panels.
QuadratureValue lp_deficit_norm(const ChartManifold& M, const ChartBox& region, int k, double H,
                                double p, int panels = 4, int order = 8,
                                const RhoSearchOptions& opts = {});

}  // namespace tubevol
