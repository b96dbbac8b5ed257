#include "tubevol/verification.hpp"

#include "tubevol/model_kernels.hpp"
#include "tubevol/quadrature.hpp"
#include "tubevol/ray_transport.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace tubevol {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double kMinimalTol = 1e-6;

struct Context {
  const Scenario& sc;
  BuiltScenario built;
  NormalFiberGrid grid;
  int n = 0;
  int m = 0;
  int d = 0;  // n - m - 1
  double r_max = 0.0;

  const ChartManifold& M() const { return *built.manifold; }
  const EmbeddedSubmanifold& sigma() const { return *built.submanifold; }
};

Context make_context(const Scenario& sc) {
  Context c{sc, build(sc), {}};
  if (!sc.quadrature.base_resolution.empty()) c.built.submanifold->set_resolution(sc.quadrature.base_resolution);
  c.grid = unit_normal_grid(c.sigma(), c.M(), sc.quadrature.fiber_resolution);
  c.n = c.M().dim();
  c.m = c.sigma().dim();
  c.d = c.n - c.m - 1;
  for (double r : sc.radii) c.r_max = std::max(c.r_max, r);
  if (c.r_max <= 0.0) c.r_max = 1.0;
  return c;
}

std::mt19937_64 rng_for(const Scenario& sc, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(sc.seed & 0xffffffffu), static_cast<std::uint32_t>(sc.seed >> 32),
                    salt};
  return std::mt19937_64(seq);
}

std::vector<NormalSample> sample_rays(const Context& c, int count, std::uint32_t salt) {
  auto rng = rng_for(c.sc, salt);
  std::vector<NormalSample> out;
  for (int i = 0; i < count; ++i) out.push_back(sample_unit_normal(c.grid, rng));
  return out;
}

NormalRay make_ray(const Context& c, const NormalSample& s, double t_max, double rtol) {
  return NormalRay{&c.grid.base[s.base], s.p, t_max, rtol};
}

BoundReport tag(BoundReport r, const Scenario& sc, Check check, std::string variant, double error) {
  r.scenario = sc.name;
  r.check = to_string(check);
  r.variant = std::move(variant);
  r.error_estimate = error;
  r.equality = r.status == CheckStatus::Evaluated && std::abs(r.slack) <= 10.0 * error;
  return r;
}

BoundReport violation(const Scenario& sc, Check check, std::string variant, std::string note) {
  BoundReport r = BoundReport::precondition_violation(to_string(check), std::move(note));
  r.scenario = sc.name;
  r.variant = std::move(variant);
  return r;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  if (!(b > a)) return 0.0;
  const quad::Rule rule = quad::composite_gauss_legendre(a, b, panels, order);
  quad::CompensatedSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s.add(rule.weights[i] * f(rule.nodes[i]));
  return s.value();
}

bool bounded(const ChartBox& box) {
  return box.lower.allFinite() && box.upper.allFinite();
}

/// Riemannian volume of a chart box by a tensor Gauss-Legendre rule.
double region_volume(const ChartManifold& M, const ChartBox& box) {
  const int n = M.dim();
  const int per_axis = std::clamp(static_cast<int>(std::pow(4.0e4, 1.0 / n)), 2, 32);
  std::vector<quad::Rule> rules;
  for (int i = 0; i < n; ++i) rules.push_back(quad::composite_gauss_legendre(box.lower(i), box.upper(i), 1, per_axis));
  quad::CompensatedSum s;
  std::vector<int> idx(n, 0);
  Vec x(n);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      x(i) = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
    }
    s.add(w * M.volume_element(x));
    int a = 0;
    while (a < n && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == n) break;
  }
  return s.value();
}

struct GlobalNorm {
  QuadratureValue norm;
  double region_volume = inf;
  std::string source;
};

GlobalNorm global_deficit_norm(const Context& c, int k, double H, double p) {
  GlobalNorm out;
  const ChartManifold& M = c.M();
  const auto it = c.sc.known_rho.find(k);
  if (it != c.sc.known_rho.end()) {
    out.source = "declared";
    if (bounded(M.domain())) out.region_volume = region_volume(M, M.domain());
    const double deficit = std::max(0.0, H - it->second);
    if (deficit > 0.0) {
      if (!std::isfinite(out.region_volume)) throw ConfigError("known_rho", "nonzero deficit on an unbounded chart");
      out.norm.value = deficit * std::pow(out.region_volume, 1.0 / p);
    }
    return out;
  }
  if (const auto* torus = dynamic_cast<const FlatTorus*>(&M); torus && !torus->bump_support_boxes().empty()) {
    // flat outside the supports, where (rho_k - H)_- = 0 for H <= 0
    out.source = "bump_support";
    double power = 0.0, power_hi = 0.0, vol = 0.0;
    for (const ChartBox& box : torus->bump_support_boxes()) {
      const QuadratureValue q = lp_deficit_norm(M, box, k, H, p);
      power += std::pow(q.value, p);
      power_hi += std::pow(q.value + q.error_estimate, p);
      vol += region_volume(M, box);
    }
    out.norm.value = std::pow(power, 1.0 / p);
    out.norm.error_estimate = std::pow(power_hi, 1.0 / p) - out.norm.value;
    out.region_volume = vol;
    return out;
  }
  if (!bounded(M.domain())) throw ConfigError("known_rho", "global deficit norm needs a bounded chart or a declared rho_k");
  out.source = "domain";
  out.norm = lp_deficit_norm(M, M.domain(), k, H, p);
  out.region_volume = region_volume(M, M.domain());
  return out;
}

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

QuadratureSpec tube_spec(const Scenario& sc) { return sc.quadrature; }

/// Quadrature error of a tube volume plus the ray integration tolerance.
double integration_error(const Scenario& sc, const TubeVolumeResult& tube) {
  return (tube.error_estimate + 10.0 * sc.quadrature.ray_rtol * std::abs(tube.value)) * sc.volume_inflation;
}

/// Integral of the comparison density over the unit normal bundle, each
/// ray cut at the density's first zero; error from the nested radial rule.
QuadratureValue comparison_integral(const Context& c, double H, double r) {
  const QuadratureSpec& spec = c.sc.quadrature;
  const int panels = spec.t_panels, order = spec.t_order;
  const int coarse_panels = panels > 1 ? panels / 2 : 1;
  const int coarse_order = panels > 1 ? order : std::max(1, order / 2);
  quad::CompensatedSum fine, coarse;
  for (const BaseNode& node : c.grid.base)
    for (std::size_t j = 0; j < c.grid.fiber.points.size(); ++j) {
      const Vec& p = c.grid.fiber.points[j];
      const double eta = node.eta_dot(p);
      const double z = model::first_zero(H, c.n, c.m, eta, r);
      auto f = [&](double t) { return model::hk_integrand(H, c.n, c.m, eta, t); };
      const double w = node.weight * c.grid.fiber.weights[j];
      fine.add(w * integrate_gl(f, 0.0, z, panels, order));
      coarse.add(w * integrate_gl(f, 0.0, z, coarse_panels, coarse_order));
    }
  return {fine.value(), std::abs(fine.value() - coarse.value()) + 1e-14 * std::abs(fine.value())};
}

/// Empty when the integral bound's structural preconditions hold.
std::optional<std::string> integral_bound_obstruction(const Context& c) {
  const int n = c.n, m = c.m;
  const int k = std::min(m, c.d);
  if (!(m > 0 && m < n - 1)) return "needs 0 < m < n-1";
  if (c.sc.H > 0.0) return "needs H <= 0";
  if (!(c.sc.p > n - k)) return "needs p > n-k";
  const double eta = c.grid.max_mean_curvature();
  if (eta > kMinimalTol) return "submanifold is not minimal (|eta| = " + fmt(eta) + ")";
  return std::nullopt;
}

Mat random_frame(int rows, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat G(rows, k);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < k; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  return qr.householderQ() * Mat::Identity(rows, k);
}

std::vector<double> uniform_times(double t_hi, int count) {
  std::vector<double> t;
  for (int j = 1; j <= count; ++j) t.push_back(t_hi * j / count);
  return t;
}

}  // namespace

Certification certify_rho_k(const Scenario& sc, const BuiltScenario& built, int k, double H, double t_max) {
  const ChartManifold& M = *built.manifold;
  NormalFiberGrid grid = unit_normal_grid(*built.submanifold, M, sc.quadrature.fiber_resolution);
  auto rng = rng_for(sc, 101);
  constexpr int per_ray = 16;
  std::vector<double> times;
  for (int j = 0; j < per_ray; ++j) times.push_back(t_max * (j + 0.5) / per_ray);
  RayOptions opts;
  opts.output_times = times;
  Certification out;
  out.min_rho = inf;
  const int target = std::max(sc.certification_samples, 1);
  const int max_rays = 4 * (target / per_ray + 1);
  for (int ray = 0; ray < max_rays && out.points < target; ++ray) {
    const NormalSample s = sample_unit_normal(grid, rng);
    const NormalRay r{&grid.base[s.base], s.p, t_max, sc.quadrature.ray_rtol};
    const RayResult res = integrate_ray(M, r, opts);
    if (res.outputs.empty() || ray % 8 == 0) {
      // the base point itself
      out.min_rho = std::min(out.min_rho, rho_k_at(M, grid.base[s.base].frames.x, k));
      ++out.points;
    }
    for (const TransportState& st : res.outputs) {
      out.min_rho = std::min(out.min_rho, rho_k_at(M, st.x, k));
      ++out.points;
    }
  }
  out.margin = out.min_rho - k * H;
  out.ok = out.points >= target && out.margin >= -sc.tolerance;
  return out;
}

std::vector<BoundReport> check_hessian_comparison(const Scenario& sc) {
  const Check check = Check::Hessian;
  Context c = make_context(sc);
  const int k = sc.k;
  if (k < 1 || k > c.n - 1) return {violation(sc, check, "", "k must lie in [1, n-1]")};

  const double t_hi = c.r_max;
  const double rtol = sc.quadrature.ray_rtol;
  std::optional<Certification> cert;
  if (sc.hessian_H) {
    cert = certify_rho_k(sc, c.built, k, *sc.hessian_H, t_hi);
    if (!cert->ok)
      return {violation(sc, check, "",
                        "Ric_k >= k H not certified on samples (margin " + fmt(cert->margin) + ")")};
  }

  struct Variant {
    std::string name;
    bool tangential;
  };
  std::vector<Variant> variants;
  if (c.m >= k) variants.push_back({"tangential", true});
  if (c.d >= k) variants.push_back({"normal", false});
  variants.push_back({"generic", false});

  const auto samples = sample_rays(c, sc.ray_samples, 1);
  auto frame_rng = rng_for(sc, 2);
  const std::vector<double> times = uniform_times(t_hi, 80);
  RayOptions opts;
  opts.output_times = times;

  struct RayData {
    RayResult res;
    std::vector<Mat> W;  // per variant
  };
  std::vector<RayData> rays;
  double min_ric = inf;
  const int q = c.n - 1;
  for (const NormalSample& s : samples) {
    RayData rd;
    rd.res = integrate_ray(c.M(), make_ray(c, s, 1.05 * t_hi, rtol), opts);
    for (const Variant& v : variants) {
      if (v.name == "tangential") rd.W.push_back(Mat::Identity(q, q).leftCols(k));
      else if (v.name == "normal") rd.W.push_back(Mat::Identity(q, q).middleCols(c.m, k));
      else rd.W.push_back(random_frame(q, k, frame_rng));
    }
    for (const TransportState& st : rd.res.outputs)
      for (const Mat& W : rd.W) min_ric = std::min(min_ric, (W.transpose() * st.curvature * W).trace() / k);
    rays.push_back(std::move(rd));
  }

  // sampled lower bound, lowered by a safety margin between samples
  constexpr double kSampleMargin = 1e-3;
  const double H = sc.hessian_H ? *sc.hessian_H : min_ric - kSampleMargin;
  const double certified_margin = sc.hessian_H ? cert->margin : kSampleMargin;

  std::vector<BoundReport> out;
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    const Variant& v = variants[vi];
    double worst = inf, worst_value = 0.0, worst_model = 0.0, worst_t = 0.0;
    int worst_ray = -1, points = 0;
    std::optional<double> worst_w0;
    for (std::size_t ri = 0; ri < rays.size(); ++ri) {
      const RayData& rd = rays[ri];
      const BaseNode& node = c.grid.base[samples[ri].base];
      std::optional<double> w0;
      if (v.tangential) w0 = node.weingarten(samples[ri].p).topLeftCorner(k, k).trace() / k;
      const double z = model::denominator_first_zero(H, w0);
      for (const TransportState& st : rd.res.outputs) {
        if (st.t >= 0.98 * z) continue;
        if (rd.res.focal_time && st.t >= 0.98 * *rd.res.focal_time) continue;
        const double value = partial_trace_shape(st, rd.W[vi]);
        const double model = model::model_shape_trace(H, k, w0, st.t);
        ++points;
        if (model - value < worst) {
          worst = model - value;
          worst_value = value;
          worst_model = model;
          worst_t = st.t;
          worst_ray = static_cast<int>(ri);
          worst_w0 = w0;
        }
      }
    }
    if (worst_ray < 0) {
      out.push_back(violation(sc, check, v.name, "no ray points before the model singularity"));
      continue;
    }
    // integration error from the worst ray at a tighter tolerance
    RayOptions one;
    one.output_times = {worst_t};
    const RayResult fine = integrate_ray(c.M(), make_ray(c, samples[worst_ray], worst_t, rtol * 1e-2), one);
    double err = 10.0 * rtol * std::max(1.0, std::abs(worst_value));
    if (!fine.outputs.empty()) err += std::abs(partial_trace_shape(fine.outputs[0], rays[worst_ray].W[vi]) - worst_value);

    BoundReport r = tag(BoundReport::compare(worst_value, worst_model, sc.tolerance), sc, check, v.name, err);
    r.constants = {{"H", H}, {"k", k}, {"t", worst_t}, {"points", points}, {"rays", static_cast<double>(rays.size())},
                   {"certified_margin", certified_margin}};
    if (worst_w0) r.constants["w0"] = *worst_w0;
    if (!sc.hessian_H) r.note = "H is the sampled minimum of Ric_k(gamma', W)/k along the rays minus 1e-3";
    out.push_back(r);
  }
  return out;
}

BoundReport check_focal_radius(const Scenario& sc) {
  const Check check = Check::Focal;
  Context c = make_context(sc);
  const int k = sc.k;
  const double H = sc.H;
  if (!(H > 0.0)) return violation(sc, check, "", "needs H > 0");
  if (c.m < k) return violation(sc, check, "", "needs dim Sigma >= k");
  const double bound = pi / (2.0 * std::sqrt(H));
  const Certification cert = certify_rho_k(sc, c.built, k, H, bound);
  if (!cert.ok)
    return violation(sc, check, "", "Ric_k >= k H not certified on samples (margin " + fmt(cert.margin) + ")");

  const double t_search = 1.5 * bound;
  const double rtol = sc.quadrature.ray_rtol;
  auto samples = sample_rays(c, sc.ray_samples, 3);
  double measured = -inf;
  int worst = -1;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    NormalSample& s = samples[i];
    if (c.grid.base[s.base].eta_dot(s.p) > 0.0) s.p = -s.p;
    const auto f = focal_distance(c.M(), make_ray(c, s, t_search, rtol), t_search);
    const double value = f ? *f : inf;
    if (value > measured) {
      measured = value;
      worst = static_cast<int>(i);
    }
  }
  double err = 10.0 * rtol * bound;
  if (worst >= 0 && std::isfinite(measured)) {
    const auto fine = focal_distance(c.M(), make_ray(c, samples[worst], t_search, rtol * 1e-2), t_search);
    if (fine) err += std::abs(*fine - measured);
  }
  BoundReport r = tag(BoundReport::compare(measured, bound, sc.tolerance), sc, check, "max_over_rays", err);
  r.equality = std::abs(r.slack) <= 1e-6 && c.sigma().is_totally_geodesic_declared;
  r.constants = {{"H", H}, {"k", k}, {"rays", static_cast<double>(samples.size())},
                 {"certified_margin", cert.margin}};
  if (!std::isfinite(measured)) r.note = "a sampled ray has no focal point before 1.5 times the bound";
  return r;
}

BoundReport check_hk_bound(const Scenario& sc, double r) {
  const Check check = Check::HkBound;
  Context c = make_context(sc);
  const std::string variant = "r=" + fmt(r);
  const int k = std::min(c.m, c.d);
  if (k < 1) return violation(sc, check, variant, "comparison density needs 1 <= m <= n-2");
  const double H = sc.H;
  const Certification cert = certify_rho_k(sc, c.built, k, H, r);
  if (!cert.ok)
    return violation(sc, check, variant, "Ric_k >= k H not certified on samples (margin " + fmt(cert.margin) + ")");

  const QuadratureSpec spec = tube_spec(sc);
  const TubeVolumeResult tube = tube_volume(c.M(), c.sigma(), r, spec);
  const double measured = tube.value * sc.volume_inflation;

  const QuadratureValue hk = comparison_integral(c, H, r);
  const double bound = hk.value;
  const double err = integration_error(sc, tube) + hk.error_estimate;
  BoundReport rep = tag(BoundReport::compare(measured, bound, sc.tolerance), sc, check, variant, err);
  rep.constants = {{"r", r}, {"H", H}, {"k", k}, {"certified_margin", cert.margin},
                   {"vol_sigma", c.grid.volume_sigma()}, {"truncated_rays", tube.truncated_count()}};
  if (tube.over_estimate) {
    rep.note = "radius beyond the declared validity radius; measured value over-estimates the volume";
    rep.enforced = rep.passed;
  }
  return rep;
}

std::vector<BoundReport> check_integral_bound(const Scenario& sc, double r) {
  const Check check = Check::IntegralBound;
  Context c = make_context(sc);
  const std::string suffix = "r=" + fmt(r);
  const int n = c.n, m = c.m;
  const int k = std::min(m, c.d);
  const double H = sc.H, p = sc.p;
  if (const auto why = integral_bound_obstruction(c)) return {violation(sc, check, suffix, *why)};

  const model::BoundConstants constants = model::thm1_constants(n, m, p, H);
  const double vol_sigma = c.grid.volume_sigma();
  const QuadratureSpec spec = tube_spec(sc);
  const TubeVolumeResult tube = tube_volume(c.M(), c.sigma(), r, spec);
  const double measured = tube.value * sc.volume_inflation;
  const double tube_err = integration_error(sc, tube);

  auto bound_report = [&](const std::string& variant, double norm, double norm_err) {
    const double bound = model::thm1_bound(constants, vol_sigma, norm, r);
    const double bound_err =
        std::abs(model::thm1_bound(constants, vol_sigma, norm + norm_err, r) - bound) + 1e-14 * std::abs(bound);
    BoundReport rep =
        tag(BoundReport::compare(measured, bound, sc.tolerance), sc, check, variant + "," + suffix, tube_err + bound_err);
    rep.constants = {{"r", r},         {"n", n},           {"m", m},           {"k", k},
                     {"p", p},         {"H", H},           {"alpha", constants.alpha},
                     {"beta", constants.beta}, {"delta", constants.delta}, {"kappa", constants.kappa},
                     {"vol_sigma", vol_sigma}, {"deficit_norm", norm}};
    if (tube.over_estimate) rep.note = "radius beyond the declared validity radius";
    return rep;
  };

  std::vector<BoundReport> out;
  const GlobalNorm global = global_deficit_norm(c, k, H, p);
  BoundReport g = bound_report("global_norm", global.norm.value, global.norm.error_estimate);
  g.note = g.note.empty() ? "norm source: " + global.source : g.note + "; norm source: " + global.source;
  if (tube.over_estimate) g.enforced = g.passed;
  out.push_back(g);

  if (std::isfinite(global.region_volume)) {
    constexpr double kSafety = 1e-3;
    const double inflated = global.norm.value + kSafety * std::pow(global.region_volume, 1.0 / p);
    BoundReport s = bound_report("global_norm_safety", inflated, global.norm.error_estimate);
    s.enforced = false;
    s.constants["region_volume"] = global.region_volume;
    s.note = "(rho_k - H)_- inflated by 1e-3 over the norm region";
    out.push_back(s);
  }

  const QuadratureValue tn = tube_lp_deficit(c.M(), c.sigma(), r, k, H, p, spec);
  BoundReport t = bound_report("tube_norm", tn.value, tn.error_estimate);
  t.enforced = false;
  out.push_back(t);

  if (sc.quadrature.monte_carlo_samples) {
    const MonteCarloEstimate mc =
        tube_volume_monte_carlo(c.M(), c.sigma(), r, *sc.quadrature.monte_carlo_samples,
                                sc.seed ^ 0x9e3779b97f4a7c15ULL, sc.quadrature.ray_rtol);
    const double mc_value = mc.value * sc.volume_inflation;
    const double se = mc.standard_error * sc.volume_inflation;
    BoundReport rep = tag(BoundReport::compare(std::abs(measured - mc_value), 3.0 * se, 0.0), sc, check,
                          "monte_carlo," + suffix, 0.0);
    rep.equality = false;
    rep.constants = {{"quadrature", measured}, {"monte_carlo", mc_value}, {"standard_error", se},
                     {"samples", mc.samples}};
    rep.note = "|quadrature - Monte Carlo| against 3 standard errors";
    out.push_back(rep);
  }
  return out;
}

std::vector<BoundReport> check_lemma_51_52(const Scenario& sc) {
  const Check check = Check::Lemmas;
  Context c = make_context(sc);
  const int n = c.n, m = c.m, d = c.d;
  if (!(m >= 1 && d >= 1)) return {violation(sc, check, "", "needs 1 <= m <= n-2")};
  const double eta = c.grid.max_mean_curvature();
  if (eta > kMinimalTol) return {violation(sc, check, "", "submanifold is not minimal (|eta| = " + fmt(eta) + ")")};
  const int k = std::min(m, d);
  std::vector<double> powers = sc.lemma_powers;
  if (powers.empty()) powers = {static_cast<double>(n - k + 1), 2.0 * (n - k)};

  // tight tolerance for the finite-difference spot check
  const double rtol = std::min(sc.quadrature.ray_rtol, 1e-10);
  const double t_hi = c.r_max;
  const double h = 2e-4;
  const std::vector<double> centers = uniform_times(t_hi, 20);
  std::vector<double> times;
  for (double t : centers)
    for (int j = -2; j <= 2; ++j) times.push_back(t + j * h);
  RayOptions opts;
  opts.output_times = times;
  opts.lemma_integrals = true;
  opts.powers = powers;
  const ChartManifold& M = c.M();
  opts.rho = [&M](const Vec& x, int kk) { return rho_k_at(M, x, kk); };

  struct Worst {
    double slack = inf;
    double measured = 0.0;
    double bound = 0.0;
    double t = 0.0;
    double scale = 1.0;
    int points = 0;
    void add(double lhs, double rhs, double time) {
      ++points;
      if (rhs - lhs < slack) {
        slack = rhs - lhs;
        measured = lhs;
        bound = rhs;
        t = time;
        scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      }
    }
  };
  const int np = static_cast<int>(powers.size());
  Worst j_lit, j_loc, y_lit, y_loc, second;
  std::vector<Worst> pow_lit(np), pow_norm(np);

  const auto samples = sample_rays(c, sc.ray_samples, 4);
  for (const NormalSample& s : samples) {
    const RayResult res = integrate_ray(M, make_ray(c, s, t_hi + 3 * h, rtol), opts);
    const auto& o = res.outputs;
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      const std::size_t i = 5 * ci + 2;
      if (i + 2 >= o.size()) break;
      const TransportState& st = o[i];
      const JY jy = jy_factors(st);
      const PhiPsi pp = split_mean_curvature(st);
      const Eigen::VectorXd& I = st.integrals;
      const double Jp = jy.J * pp.phi / m;
      const double Yp = jy.Y * pp.psi / d;
      const double lhs_j = Jp * std::pow(jy.Y, static_cast<double>(d) / m);
      const double lhs_y = Yp * std::pow(jy.J, static_cast<double>(m) / d);
      j_lit.add(lhs_j, I(kRhoM) + I(kPhiPsiM) / (m * m), st.t);
      j_loc.add(lhs_j, I(kRicHM) + I(kPhiPsiM) / (m * m), st.t);
      y_lit.add(lhs_y, 1.0 + I(kRhoD) + I(kPhiPsiD) / (d * d), st.t);
      y_loc.add(lhs_y, 1.0 + I(kRicVD) + I(kPhiPsiD) / (d * d), st.t);
      for (int j = 0; j < np; ++j) {
        const double p = powers[j];
        if (!(p > n - k)) continue;
        const double lhs = std::pow(std::max(I(kFirstPower + 2 * j), 0.0), 1.0 / p);
        const double rhs =
            (2 * p - 1) / (p - (n - k)) * std::pow(std::max(I(kFirstPower + 2 * j + 1), 0.0), 1.0 / p);
        pow_lit[j].add(lhs, rhs, st.t);
        pow_norm[j].add(lhs / (m * d), rhs, st.t);
      }
      // J''/J = (phi/m)' + (phi/m)^2, with (phi/m)' by five-point differences
      auto phi = [&](std::size_t a) { return split_mean_curvature(o[a]).phi / m; };
      const double dphi = (phi(i - 2) - 8 * phi(i - 1) + 8 * phi(i + 1) - phi(i + 2)) / (12 * h);
      const double jpp = jy.J * (dphi + (pp.phi / m) * (pp.phi / m));
      const double ric_h = st.curvature.topLeftCorner(m, m).trace() / m;
      second.add(jpp, -ric_h * jy.J, st.t);
    }
  }

  std::vector<BoundReport> out;
  auto emit = [&](const Worst& w, const std::string& variant, double tol, bool enforced, const std::string& note) {
    if (w.points == 0) {
      out.push_back(violation(sc, check, variant, "no ray points evaluated"));
      return;
    }
    BoundReport r = tag(BoundReport::compare(w.measured, w.bound, tol), sc, check, variant, 10.0 * rtol * w.scale);
    r.enforced = enforced;
    r.constants = {{"t", w.t}, {"points", w.points}, {"rays", static_cast<double>(samples.size())}};
    r.note = note;
    out.push_back(r);
  };
  emit(j_lit, "J_growth", sc.tolerance, true, "");
  emit(j_loc, "J_growth_ray_local", sc.tolerance, true, "rho_m replaced by Ric_m(gamma', H_t)/m");
  emit(y_lit, "Y_growth", sc.tolerance, true, "");
  emit(y_loc, "Y_growth_ray_local", sc.tolerance, true, "rho_d replaced by Ric_d(gamma', V_t)/d");
  for (int j = 0; j < np; ++j) {
    const std::string tagp = "power_p=" + fmt(powers[j]);
    if (!(powers[j] > n - k)) {
      out.push_back(violation(sc, check, tagp, "needs p > n-k"));
      continue;
    }
    emit(pow_lit[j], tagp, sc.tolerance, false, "left side as stated; informational");
    emit(pow_norm[j], tagp + "_normalized", sc.tolerance, true, "left side divided by m (n-m-1)");
  }
  emit(second, "J_second_derivative", 1e-4, true, "finite-difference J'' against -Ric_m(gamma', H_t)/m J");
  return out;
}

std::vector<BoundReport> check_structural(const Scenario& sc) {
  const Check check = Check::Structural;
  Context c = make_context(sc);
  constexpr double rtol = 1e-10;
  const double h = 2.5e-4;
  const double t0 = 1e-3;
  const double t_hi = c.r_max;
  std::vector<double> times = {t0, 2 * t0};
  for (double f : {0.25, 0.5, 0.75})
    for (int j = -2; j <= 2; ++j) times.push_back(f * t_hi + j * h);
  std::sort(times.begin(), times.end());
  RayOptions opts;
  opts.output_times = times;

  double riccati = 0.0, logA = 0.0, wr = 0.0, taylor = 0.0;
  int stencils = 0;
  const auto samples = sample_rays(c, sc.ray_samples, 5);
  for (const NormalSample& s : samples) {
    const RayResult res = integrate_ray(c.M(), make_ray(c, s, t_hi, rtol), opts);
    const auto& o = res.outputs;
    auto find = [&](double t) -> int {
      for (std::size_t i = 0; i < o.size(); ++i)
        if (o[i].t == t) return static_cast<int>(i);
      return -1;
    };
    const int a = find(t0), b = find(2 * t0);
    if (a >= 0 && b >= 0) {
      const double r1 = volume_density(o[a]) / std::pow(t0, c.d);
      const double r2 = volume_density(o[b]) / std::pow(2 * t0, c.d);
      taylor = std::max(taylor, std::abs(2 * r1 - r2 - 1.0));
    }
    for (double f : {0.25, 0.5, 0.75}) {
      const int i = find(f * t_hi - 2 * h);
      if (i < 0 || i + 4 >= static_cast<int>(o.size())) continue;
      ++stencils;
      const TransportState& st = o[i + 2];
      auto d1 = [&](auto g) { return (g(o[i]) - 8 * g(o[i + 1]) + 8 * g(o[i + 3]) - g(o[i + 4])) / (12 * h); };
      const Mat S = shape_operator(st);
      const Mat dS = (shape_operator(o[i]) - 8 * shape_operator(o[i + 1]) + 8 * shape_operator(o[i + 3]) -
                      shape_operator(o[i + 4])) /
                     (12 * h);
      riccati = std::max(riccati, (dS + S * S + st.curvature).norm() / std::max(1.0, S.squaredNorm()));
      const double dlog = d1([](const TransportState& x) { return std::log(std::abs(volume_density(x))); });
      logA = std::max(logA, std::abs(dlog - S.trace()) / std::max(1.0, std::abs(S.trace())));
      wr = std::max(wr, wronskian(st).cwiseAbs().maxCoeff() / std::max(1.0, st.J.norm() * st.K.norm()));
    }
  }
  std::vector<BoundReport> out;
  auto emit = [&](const std::string& variant, double measured, double bound) {
    BoundReport r = tag(BoundReport::compare(measured, bound, 0.0), sc, check, variant, 0.0);
    r.equality = false;
    r.constants = {{"rays", static_cast<double>(samples.size())}, {"stencils", stencils}, {"rtol", rtol}};
    out.push_back(r);
  };
  emit("riccati_residual", riccati, 1e-5);
  emit("log_density_derivative", logA, 1e-6);
  emit("wronskian", wr, 1e-8);
  emit("small_t_density", taylor, 1e-3);
  out.back().note = "|2 r(t) - r(2t) - 1| with r(t) = A(t) / t^(n-m-1), t = 1e-3";
  return out;
}

std::vector<BoundReport> check_rho_k(const Scenario& sc) {
  const Check check = Check::RhoK;
  Context c = make_context(sc);
  const int n = c.n;
  std::vector<Vec> points;
  for (std::size_t i = 0; i < c.grid.base.size() && points.size() < 3; i += std::max<std::size_t>(1, c.grid.base.size() / 3))
    points.push_back(c.grid.base[i].frames.x);
  auto rng = rng_for(sc, 6);
  constexpr int kOracleDirections = 20000;

  std::vector<int> ks;
  for (int k = 1; k <= n - 1; ++k) ks.push_back(k);
  std::vector<BoundReport> out;
  for (int k : ks) {
    double dev_declared = 0.0, dev_oracle = 0.0, order = -inf;
    double refined_min = inf, oracle_min = inf;
    for (const Vec& x : points) {
      const Riemann Rhat = orthonormal_curvature(c.M(), x);
      const RhoSearchResult sr = rho_k_search(Rhat, k);
      double oracle = inf;
      for (int i = 0; i < kOracleDirections; ++i)
        oracle = std::min(oracle, ric_k_min_over_subspaces(Rhat, quad::uniform_sphere_point(n - 1, rng), k));
      refined_min = std::min(refined_min, sr.refined_value);
      oracle_min = std::min(oracle_min, oracle);
      dev_oracle = std::max(dev_oracle, std::abs(sr.refined_value - oracle));
      order = std::max(order, sr.refined_value - sr.grid_value);
      const auto it = sc.known_rho.find(k);
      if (it != sc.known_rho.end()) dev_declared = std::max(dev_declared, std::abs(sr.refined_value - it->second));
    }
    const std::string kk = "k=" + std::to_string(k);
    const auto it = sc.known_rho.find(k);
    if (it != sc.known_rho.end()) {
      BoundReport r = tag(BoundReport::compare(dev_declared, 1e-3, 0.0), sc, check, "search_vs_declared," + kk, 0.0);
      r.equality = false;
      r.constants = {{"declared", it->second}, {"refined", refined_min}, {"points", static_cast<double>(points.size())}};
      out.push_back(r);
    }
    BoundReport o = tag(BoundReport::compare(dev_oracle, 1e-3, 0.0), sc, check, "search_vs_oracle," + kk, 0.0);
    o.equality = false;
    o.constants = {{"refined", refined_min}, {"oracle", oracle_min}, {"directions", kOracleDirections}};
    out.push_back(o);
    BoundReport g = tag(BoundReport::compare(order, 0.0, 1e-12), sc, check, "refined_below_grid," + kk, 0.0);
    g.equality = false;
    out.push_back(g);
  }
  return out;
}

std::vector<BoundReport> run_checks(const Scenario& sc) {
  std::vector<BoundReport> out;
  auto guarded = [&](Check check, const std::string& variant, const std::function<std::vector<BoundReport>()>& fn) {
    if (!sc.enabled(check)) return;
    try {
      for (BoundReport& r : fn()) out.push_back(std::move(r));
    } catch (const std::exception& e) {
      BoundReport r;
      r.scenario = sc.name;
      r.check = to_string(check);
      r.variant = variant;
      r.status = CheckStatus::Error;
      r.measured = r.bound = r.slack = std::numeric_limits<double>::quiet_NaN();
      r.note = e.what();
      out.push_back(r);
    }
  };
  guarded(Check::Hessian, "", [&] { return check_hessian_comparison(sc); });
  guarded(Check::Focal, "", [&] { return std::vector<BoundReport>{check_focal_radius(sc)}; });
  for (double r : sc.radii) {
    guarded(Check::HkBound, "r=" + fmt(r), [&] { return std::vector<BoundReport>{check_hk_bound(sc, r)}; });
    guarded(Check::IntegralBound, "r=" + fmt(r), [&] { return check_integral_bound(sc, r); });
  }
  guarded(Check::Lemmas, "", [&] { return check_lemma_51_52(sc); });
  guarded(Check::Structural, "", [&] { return check_structural(sc); });
  guarded(Check::RhoK, "", [&] { return check_rho_k(sc); });
  return out;
}

std::vector<VolumeRow> volume_table(const Scenario& sc, const std::vector<double>& radii) {
  Context c = make_context(sc);
  const int k = std::min(c.m, c.d);
  std::optional<GlobalNorm> global;
  std::optional<model::BoundConstants> constants;
  if (!integral_bound_obstruction(c)) {
    constants = model::thm1_constants(c.n, c.m, sc.p, sc.H);
    global = global_deficit_norm(c, k, sc.H, sc.p);
  }
  std::vector<VolumeRow> rows;
  for (double r : radii) {
    const TubeVolumeResult tube = tube_volume(c.M(), c.sigma(), r, tube_spec(sc));
    VolumeRow row;
    row.r = r;
    row.value = tube.value * sc.volume_inflation;
    row.error_estimate = tube.error_estimate * sc.volume_inflation;
    row.truncated_rays = tube.truncated_count();
    row.rays = tube.rays_used;
    row.over_estimate = tube.over_estimate;
    if (k >= 1) row.comparison_bound = r > 0.0 ? comparison_integral(c, sc.H, r).value : 0.0;
    if (constants) row.integral_bound = model::thm1_bound(*constants, c.grid.volume_sigma(), global->norm.value, r);
    rows.push_back(row);
  }
  return rows;
}

std::string volume_csv(const std::string& scenario, const std::vector<VolumeRow>& rows) {
  std::ostringstream os;
  os << "scenario,r,value,error_estimate,rays,truncated_rays,over_estimate,comparison_bound,integral_bound\n";
  for (const VolumeRow& row : rows) {
    os << csv_field(scenario) << ',' << fmt(row.r) << ',' << fmt(row.value) << ',' << fmt(row.error_estimate) << ','
       << row.rays << ',' << row.truncated_rays << ',' << (row.over_estimate ? 1 : 0) << ','
       << (row.comparison_bound ? fmt(*row.comparison_bound) : "") << ','
       << (row.integral_bound ? fmt(*row.integral_bound) : "") << '\n';
  }
  return os.str();
}

std::string volume_json(const std::string& scenario, const std::vector<VolumeRow>& rows) {
  nlohmann::ordered_json doc;
  doc["scenario"] = scenario;
  auto& list = doc["rows"] = nlohmann::ordered_json::array();
  for (const VolumeRow& row : rows) {
    nlohmann::ordered_json j;
    j["r"] = number(row.r);
    j["value"] = number(row.value);
    j["error_estimate"] = number(row.error_estimate);
    j["rays"] = row.rays;
    j["truncated_rays"] = row.truncated_rays;
    j["over_estimate"] = row.over_estimate;
    j["comparison_bound"] = row.comparison_bound ? number(*row.comparison_bound) : nullptr;
    j["integral_bound"] = row.integral_bound ? number(*row.integral_bound) : nullptr;
    list.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

int SuiteReport::failures() const {
  return static_cast<int>(std::count_if(reports.begin(), reports.end(), [](const BoundReport& r) { return r.is_failure(); }));
}

int SuiteReport::precondition_violations() const {
  return static_cast<int>(std::count_if(reports.begin(), reports.end(), [](const BoundReport& r) {
    return r.status == CheckStatus::PreconditionViolation;
  }));
}

int SuiteReport::equalities() const {
  return static_cast<int>(std::count_if(reports.begin(), reports.end(), [](const BoundReport& r) { return r.equality; }));
}

SuiteReport run_suite(const std::string& name, std::vector<Scenario> scenarios) {
  std::stable_sort(scenarios.begin(), scenarios.end(),
                   [](const Scenario& a, const Scenario& b) { return a.name < b.name; });
  SuiteReport out;
  out.name = name;
  for (const Scenario& sc : scenarios)
    for (BoundReport& r : run_checks(sc)) out.reports.push_back(std::move(r));
  return out;
}

namespace {

const char* verdict(const BoundReport& r) {
  if (r.status == CheckStatus::PreconditionViolation) return "SKIP";
  if (r.status == CheckStatus::Error) return "ERROR";
  if (!r.passed) return r.enforced ? "FAIL" : "INFO";
  return r.equality ? "EQUAL" : "PASS";
}

}  // namespace

std::string to_json(const SuiteReport& report) {
  nlohmann::ordered_json doc;
  doc["suite"] = report.name;
  auto& list = doc["reports"] = nlohmann::ordered_json::array();
  for (const BoundReport& r : report.reports) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["check"] = r.check;
    j["variant"] = r.variant;
    j["status"] = to_string(r.status);
    j["enforced"] = r.enforced;
    j["passed"] = r.passed;
    j["equality"] = r.equality;
    j["measured"] = number(r.measured);
    j["bound"] = number(r.bound);
    j["slack"] = number(r.slack);
    j["tolerance"] = number(r.tolerance);
    j["error_estimate"] = number(r.error_estimate);
    auto& cst = j["constants"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.constants) cst[key] = number(value);
    j["note"] = r.note;
    list.push_back(std::move(j));
  }
  doc["summary"] = {{"reports", report.reports.size()},
                    {"failures", report.failures()},
                    {"precondition_violations", report.precondition_violations()},
                    {"equalities", report.equalities()},
                    {"success", report.success()}};
  return doc.dump(2) + "\n";
}

std::string to_csv(const SuiteReport& report) {
  std::ostringstream os;
  os << "scenario,check,variant,status,enforced,passed,equality,measured,bound,slack,tolerance,error_estimate,note\n";
  for (const BoundReport& r : report.reports) {
    os << csv_field(r.scenario) << ',' << csv_field(r.check) << ',' << csv_field(r.variant) << ','
       << to_string(r.status) << ',' << (r.enforced ? 1 : 0) << ',' << (r.passed ? 1 : 0) << ','
       << (r.equality ? 1 : 0) << ',' << fmt(r.measured) << ',' << fmt(r.bound) << ',' << fmt(r.slack) << ','
       << fmt(r.tolerance) << ',' << fmt(r.error_estimate) << ',' << csv_field(r.note) << '\n';
  }
  return os.str();
}

std::string summary_text(const SuiteReport& report) {
  std::ostringstream os;
  for (const BoundReport& r : report.reports) {
    os << verdict(r) << "  " << r.scenario << "  " << r.check;
    if (!r.variant.empty()) os << "  " << r.variant;
    if (r.status == CheckStatus::Evaluated) os << "  slack=" << fmt(r.slack);
    if (!r.note.empty() && r.status != CheckStatus::Evaluated) os << "  (" << r.note << ")";
    os << '\n';
  }
  os << report.reports.size() << " reports, " << report.failures() << " failures, "
     << report.precondition_violations() << " precondition violations, " << report.equalities() << " equalities\n";
  return os.str();
}

}  // namespace tubevol
