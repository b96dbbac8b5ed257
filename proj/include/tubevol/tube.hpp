#pragma once

#include "tubevol/geometry.hpp"
#include "tubevol/ray_transport.hpp"
#include "tubevol/submanifold.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tubevol {

struct QuadratureSpec {
  int t_order = 16;   // Gauss-Legendre nodes per radial panel
  int t_panels = 2;
  int fiber_resolution = 8;
  std::vector<int> base_resolution;  // empty keeps the submanifold's own
  std::optional<int> monte_carlo_samples;
  std::uint64_t seed = 0;
  double ray_rtol = 1e-9;
  int threads = 0;  // 0 uses the hardware concurrency

  void validate() const;
};

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  int samples = 0;
};

struct TubeVolumeResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int rays_used = 0;
  std::vector<bool> truncated_at_focal;  // per ray, in grid order
  bool over_estimate = false;            // r beyond the declared validity radius
  std::optional<MonteCarloEstimate> monte_carlo;

  int truncated_count() const;
};

/// Volume of the tube of radius r: the integral of A over [0, r] x unit
/// normal bundle, with A = 0 past each ray's first focal time.
TubeVolumeResult tube_volume(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double r,
                             const QuadratureSpec& spec = {});

/// Tube volumes on a grid of radii.
std::vector<TubeVolumeResult> tube_volume_profile(const ChartManifold& M, const EmbeddedSubmanifold& sigma,
                                                  const std::vector<double>& radii,
                                                  const QuadratureSpec& spec = {});

/// Area of the level set at distance t: the fiber and base integral of A(t, .).
QuadratureValue equidistant_area(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double t,
                                 const QuadratureSpec& spec = {});

/// (integral over the tube of radius t of (rho_k - H)_-^p dvol)^(1/p), with
/// rho_k evaluated pointwise along the rays.
QuadratureValue tube_lp_deficit(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double t, int k,
                                double H, double p, const QuadratureSpec& spec = {},
                                const RhoSearchOptions& rho_opts = {});

/// Plain Monte Carlo estimates over uniform (s, xi, t); the base point is
/// drawn uniformly from the parameter box.
MonteCarloEstimate tube_volume_monte_carlo(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double r,
                                           int samples, std::uint64_t seed, double ray_rtol = 1e-9);

/// Monte Carlo estimate of the integral (not its p-th root) of
/// (rho_k - H)_-^p over the tube.
MonteCarloEstimate tube_lp_deficit_monte_carlo(const ChartManifold& M, const EmbeddedSubmanifold& sigma,
                                               double t, int k, double H, double p, int samples,
                                               std::uint64_t seed, double ray_rtol = 1e-9,
                                               const RhoSearchOptions& rho_opts = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace tubevol
