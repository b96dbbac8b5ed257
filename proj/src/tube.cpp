#include "tubevol/tube.hpp"

#include "tubevol/model_kernels.hpp"
#include "tubevol/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace tubevol {

namespace {

struct RadialSums {
  double fine = 0.0;
  double coarse = 0.0;
  bool truncated = false;
};

using StateFunction = std::function<double(const TransportState&)>;

quad::Rule coarse_rule(double a, double b, int panels, int order) {
  if (panels >= 2) return quad::composite_gauss_legendre(a, b, panels / 2, order);
  return quad::composite_gauss_legendre(a, b, 1, std::max(1, order / 2));
}

std::string describe_ray(const BaseNode& node, const Vec& p) {
  std::ostringstream os;
  os.precision(17);
  os << " (s = [";
  for (int i = 0; i < node.frames.s.size(); ++i) os << (i ? ", " : "") << node.frames.s(i);
  os << "], xi = [";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
  os << "])";
  return os.str();
}

RayResult run_ray(const ChartManifold& M, const BaseNode& node, const Vec& p, double t_max,
                  std::vector<double> times, bool detect_focal, double rtol) {
  NormalRay ray{&node, p, t_max, rtol};
  RayOptions opts;
  opts.output_times = std::move(times);
  opts.detect_focal = detect_focal;
  try {
    return integrate_ray(M, ray, opts);
  } catch (const RayIntegrationError& e) {
    throw RayIntegrationError(std::string(e.what()) + describe_ray(node, p), e.t);
  }
}

// Integral of f(state) over [0, T] along one ray with the nested radial
// rules; the ray is cut at its first focal time.
RadialSums radial_integral(const ChartManifold& M, const BaseNode& node, const Vec& p, double T,
                           const QuadratureSpec& spec, const StateFunction& f) {
  RadialSums out;
  if (!(T > 0.0)) return out;
  auto evaluate = [&](double end, bool detect, RayResult* first) -> bool {
    const quad::Rule fine = quad::composite_gauss_legendre(0.0, end, spec.t_panels, spec.t_order);
    const quad::Rule coarse = coarse_rule(0.0, end, spec.t_panels, spec.t_order);
    std::vector<double> times = fine.nodes;
    times.insert(times.end(), coarse.nodes.begin(), coarse.nodes.end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    RayResult res = run_ray(M, node, p, end, times, detect, spec.ray_rtol);
    if (res.focal_time && *res.focal_time < end) {
      if (first) *first = std::move(res);
      return false;
    }
    std::vector<double> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) values[i] = f(res.outputs.at(i));
    auto value_at = [&](double t) {
      const auto it = std::lower_bound(times.begin(), times.end(), t);
      return values[static_cast<std::size_t>(it - times.begin())];
    };
    quad::CompensatedSum a, b;
    for (std::size_t i = 0; i < fine.nodes.size(); ++i) a.add(fine.weights[i] * value_at(fine.nodes[i]));
    for (std::size_t i = 0; i < coarse.nodes.size(); ++i) b.add(coarse.weights[i] * value_at(coarse.nodes[i]));
    out.fine = a.value();
    out.coarse = b.value();
    return true;
  };
  RayResult first;
  if (evaluate(T, true, &first)) return out;
  out.truncated = true;
  const double tf = *first.focal_time;
  if (!(tf > 0.0)) return out;
  evaluate(tf, false, nullptr);
  return out;
}

struct RayItem {
  int base = 0;
  int fiber = 0;
  double weight = 0.0;
};

struct PreparedGrid {
  NormalFiberGrid grid;
  std::vector<RayItem> rays;
};

PreparedGrid prepare(const ChartManifold& M, const EmbeddedSubmanifold& sigma, const QuadratureSpec& spec,
                     int fiber_resolution) {
  spec.validate();
  EmbeddedSubmanifold s = sigma;
  if (!spec.base_resolution.empty()) s.set_resolution(spec.base_resolution);
  PreparedGrid out{unit_normal_grid(s, M, fiber_resolution), {}};
  for (int b = 0; b < static_cast<int>(out.grid.base.size()); ++b)
    for (int j = 0; j < static_cast<int>(out.grid.fiber.points.size()); ++j)
      out.rays.push_back({b, j, out.grid.base[b].weight * out.grid.fiber.weights[j]});
  return out;
}

double positive_part_power(double x, double p) { return x < 0.0 ? std::pow(-x, p) : 0.0; }

void check_radius(double r, const char* what) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument(std::string(what) + ": radius must be >= 0");
}

}  // namespace

void QuadratureSpec::validate() const {
  if (t_order < 1 || t_panels < 1 || fiber_resolution < 1)
    throw std::invalid_argument("QuadratureSpec: counts must be >= 1");
  for (int r : base_resolution)
    if (r < 1) throw std::invalid_argument("QuadratureSpec: base resolution must be >= 1");
  if (monte_carlo_samples && *monte_carlo_samples < 1)
    throw std::invalid_argument("QuadratureSpec: monte_carlo samples must be >= 1");
  if (!(ray_rtol > 0.0)) throw std::invalid_argument("QuadratureSpec: ray tolerance must be > 0");
}

int TubeVolumeResult::truncated_count() const {
  return static_cast<int>(std::count(truncated_at_focal.begin(), truncated_at_focal.end(), true));
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

TubeVolumeResult tube_volume(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double r,
                             const QuadratureSpec& spec) {
  check_radius(r, "tube_volume");
  const PreparedGrid pg = prepare(M, sigma, spec, spec.fiber_resolution);
  const int count = static_cast<int>(pg.rays.size());
  std::vector<RadialSums> sums(count);
  const StateFunction density = [](const TransportState& s) { return volume_density(s); };
  parallel_for(count, spec.threads, [&](int i) {
    const RayItem& ray = pg.rays[i];
    sums[i] = radial_integral(M, pg.grid.base[ray.base], pg.grid.fiber.points[ray.fiber], r, spec, density);
  });
  TubeVolumeResult out;
  quad::CompensatedSum fine, coarse;
  for (int i = 0; i < count; ++i) {
    fine.add(pg.rays[i].weight * sums[i].fine);
    coarse.add(pg.rays[i].weight * sums[i].coarse);
    out.truncated_at_focal.push_back(sums[i].truncated);
  }
  out.value = std::max(0.0, fine.value());
  out.error_estimate = std::abs(fine.value() - coarse.value());
  out.rays_used = count;
  out.over_estimate = !M.volume_validity_radius || r > *M.volume_validity_radius;
  if (spec.monte_carlo_samples)
    out.monte_carlo = tube_volume_monte_carlo(M, sigma, r, *spec.monte_carlo_samples, spec.seed, spec.ray_rtol);
  return out;
}

std::vector<TubeVolumeResult> tube_volume_profile(const ChartManifold& M, const EmbeddedSubmanifold& sigma,
                                                  const std::vector<double>& radii,
                                                  const QuadratureSpec& spec) {
  std::vector<TubeVolumeResult> out;
  for (double r : radii) out.push_back(tube_volume(M, sigma, r, spec));
  return out;
}

QuadratureValue equidistant_area(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double t,
                                 const QuadratureSpec& spec) {
  check_radius(t, "equidistant_area");
  auto area = [&](int fiber_resolution) {
    const PreparedGrid pg = prepare(M, sigma, spec, fiber_resolution);
    const int count = static_cast<int>(pg.rays.size());
    std::vector<double> values(count, 0.0);
    if (t > 0.0) {
      parallel_for(count, spec.threads, [&](int i) {
        const RayItem& ray = pg.rays[i];
        const RayResult res =
            run_ray(M, pg.grid.base[ray.base], pg.grid.fiber.points[ray.fiber], t, {t}, true, spec.ray_rtol);
        if (res.focal_time && *res.focal_time < t) return;
        values[i] = volume_density(res.outputs.at(0));
      });
    }
    quad::CompensatedSum sum;
    for (int i = 0; i < count; ++i) sum.add(pg.rays[i].weight * values[i]);
    return sum.value();
  };
  QuadratureValue out;
  out.value = area(spec.fiber_resolution);
  if (spec.fiber_resolution >= 4) out.error_estimate = std::abs(out.value - area(spec.fiber_resolution / 2));
  return out;
}

QuadratureValue tube_lp_deficit(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double t, int k,
                                double H, double p, const QuadratureSpec& spec, const RhoSearchOptions& rho_opts) {
  check_radius(t, "tube_lp_deficit");
  if (!(p >= 1.0)) throw std::invalid_argument("tube_lp_deficit: p must be >= 1");
  if (k < 1 || k > M.dim() - 1) throw std::invalid_argument("tube_lp_deficit: k out of range");
  const PreparedGrid pg = prepare(M, sigma, spec, spec.fiber_resolution);
  const int count = static_cast<int>(pg.rays.size());
  std::vector<RadialSums> sums(count);
  const StateFunction integrand = [&](const TransportState& s) {
    const double A = volume_density(s);
    const double deficit = positive_part_power(rho_k_at(M, s.x, k, rho_opts) - H, p);
    return deficit == 0.0 ? 0.0 : deficit * A;
  };
  parallel_for(count, spec.threads, [&](int i) {
    const RayItem& ray = pg.rays[i];
    sums[i] = radial_integral(M, pg.grid.base[ray.base], pg.grid.fiber.points[ray.fiber], t, spec, integrand);
  });
  quad::CompensatedSum fine, coarse;
  for (int i = 0; i < count; ++i) {
    fine.add(pg.rays[i].weight * sums[i].fine);
    coarse.add(pg.rays[i].weight * sums[i].coarse);
  }
  const double a = std::max(0.0, fine.value());
  const double b = std::max(0.0, coarse.value());
  QuadratureValue out;
  out.value = std::pow(a, 1.0 / p);
  out.error_estimate = std::abs(out.value - std::pow(b, 1.0 / p));
  return out;
}

namespace {

struct McDraw {
  Vec s;
  Vec p;
  double t = 0.0;
};

// Draws are generated serially so the sample set depends only on the seed.
std::vector<McDraw> draw_samples(const EmbeddedSubmanifold& sigma, double t_max, int samples, std::uint64_t seed,
                                 double& box_volume) {
  std::mt19937_64 rng(seed);
  const ChartBox& box = sigma.parameters();
  const int m = sigma.dim();
  const int d = sigma.ambient_dim() - m - 1;
  box_volume = 1.0;
  for (int a = 0; a < m; ++a) box_volume *= box.upper(a) - box.lower(a);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<McDraw> draws(samples);
  for (auto& dr : draws) {
    dr.s = Vec(m);
    for (int a = 0; a < m; ++a) dr.s(a) = box.lower(a) + unit(rng) * (box.upper(a) - box.lower(a));
    dr.p = quad::uniform_sphere_point(d, rng);
    dr.t = unit(rng) * t_max;
  }
  return draws;
}

MonteCarloEstimate monte_carlo(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double t_max, int samples,
                               std::uint64_t seed, double rtol, const StateFunction& f) {
  if (samples < 2) throw std::invalid_argument("monte carlo: need at least 2 samples");
  double box_volume = 1.0;
  const std::vector<McDraw> draws = draw_samples(sigma, t_max, samples, seed, box_volume);
  const double fiber_volume = model::sphere_volume(sigma.ambient_dim() - sigma.dim() - 1);
  std::vector<double> values(samples, 0.0);
  parallel_for(samples, 0, [&](int i) {
    const McDraw& dr = draws[i];
    if (!(dr.t > 0.0)) return;
    const BaseNode node = make_base_node(sigma, M, dr.s, box_volume);
    const RayResult res = run_ray(M, node, dr.p, dr.t, {dr.t}, true, rtol);
    if (res.focal_time && *res.focal_time < dr.t) return;
    values[i] = node.weight * fiber_volume * t_max * f(res.outputs.at(0));
  });
  quad::MonteCarloAccumulator acc;
  for (double v : values) acc.add(v);
  return {acc.mean, acc.standard_error(), samples};
}

}  // namespace

MonteCarloEstimate tube_volume_monte_carlo(const ChartManifold& M, const EmbeddedSubmanifold& sigma, double r,
                                           int samples, std::uint64_t seed, double ray_rtol) {
  check_radius(r, "tube_volume_monte_carlo");
  return monte_carlo(M, sigma, r, samples, seed, ray_rtol,
                     [](const TransportState& s) { return volume_density(s); });
}

MonteCarloEstimate tube_lp_deficit_monte_carlo(const ChartManifold& M, const EmbeddedSubmanifold& sigma,
                                               double t, int k, double H, double p, int samples,
                                               std::uint64_t seed, double ray_rtol,
                                               const RhoSearchOptions& rho_opts) {
  check_radius(t, "tube_lp_deficit_monte_carlo");
  return monte_carlo(M, sigma, t, samples, seed, ray_rtol, [&](const TransportState& s) {
    const double deficit = positive_part_power(rho_k_at(M, s.x, k, rho_opts) - H, p);
    return deficit == 0.0 ? 0.0 : deficit * volume_density(s);
  });
}

}  // namespace tubevol
