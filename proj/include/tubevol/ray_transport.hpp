#pragma once

#include "tubevol/geometry.hpp"
#include "tubevol/ode.hpp"
#include "tubevol/submanifold.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tubevol {

struct FocalSingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure of a single ray (metric singularity, step collapse).
struct RayIntegrationError : std::runtime_error {
  RayIntegrationError(const std::string& what, double t) : std::runtime_error(what), t(t) {}
  double t;
};

/// Pointwise rho_k(x) used by the ray integrals; see rho_k_at.
using RhoProvider = std::function<double(const Vec& x, int k)>;

struct NormalRay {
  const BaseNode* base = nullptr;
  Vec p;  // fiber coordinates of xi in the node's normal frame (unit)
  double t_max = 1.0;
  double rtol = 1e-9;
};

/// Indices of the ray integrals carried along with the transport state.
/// All are integrals over [0, t] along the ray.
enum RayIntegral : int {
  kLogJ = 0,          // phi / m
  kLogYReg = 1,       // (psi - d/s) / d,  d = n - m - 1
  kRhoM = 2,          // (rho_m)_- A^{1/m}
  kRicHM = 3,         // (Ric_m(gamma', H_s) / m)_- A^{1/m}
  kPhiPsiM = 4,       // phi_+ psi_+ A^{1/m}
  kRhoD = 5,          // (rho_d)_- A^{1/d}
  kRicVD = 6,         // (Ric_d(gamma', V_s) / d)_- A^{1/d}
  kPhiPsiD = 7,       // phi_+ psi_+ A^{1/d}
  kFirstPower = 8     // then pairs ((phi_+ psi_+)^p A, (rho_k)_-^p A) per exponent
};

struct RayOptions {
  std::vector<double> output_times;
  bool detect_focal = true;
  /// Accumulate the lemma integrals; needs 1 <= m <= n-2 and `rho`.
  bool lemma_integrals = false;
  std::vector<double> powers;  // exponents p for the power integrals
  RhoProvider rho;
};

struct TransportState {
  double t = 0.0;
  int m = 0;
  Vec x;
  Vec v;
  Mat E;  // n x (n-1) parallel frame, first m columns start tangent to the submanifold
  Mat J;  // (n-1) x (n-1)
  Mat K;  // J'
  Eigen::VectorXd integrals;
  double det_scale = 1.0;  // max |det J| over [0, t]
  Mat g;                   // metric at x
  Mat curvature;           // R_{gamma'} in the frame E
};

struct RayResult {
  std::vector<TransportState> outputs;  // at requested times before the focal time
  std::optional<double> focal_time;
  bool focal_double_root = false;
  int steps = 0;
};

/// Integrates geodesic, parallel frame and Jacobi system from the base node
/// in direction xi = N p up to t_max (or the first focal time).
RayResult integrate_ray(const ChartManifold& M, const NormalRay& ray, const RayOptions& opts = {});

/// State at a single time (re-integrates from 0).
TransportState state_at(const ChartManifold& M, const NormalRay& ray, double t, const RayOptions& opts = {});

double volume_density(const TransportState& s);

/// S = J' J^{-1}.
Mat shape_operator(const TransportState& s);

struct PhiPsi {
  double phi = 0.0;
  double psi = 0.0;
};
PhiPsi split_mean_curvature(const TransportState& s);

/// Trace of S over span(W); W holds orthonormal frame-coefficient vectors.
double partial_trace_shape(const TransportState& s, const Mat& W);

/// First focal time in (0, t_max], if any.
std::optional<double> focal_distance(const ChartManifold& M, const NormalRay& ray, double t_max);

struct JY {
  double J = 1.0;
  double Y = 1.0;
};
JY jy_factors(const TransportState& s);

/// Wronskian K^T J - J^T K (zero for the block initial data).
Mat wronskian(const TransportState& s);

}  // namespace tubevol
