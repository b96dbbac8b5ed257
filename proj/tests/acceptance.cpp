// Acceptance run: one line per criterion, nonzero exit if any fails.

#include "cli.hpp"
#include "tubevol/model_kernels.hpp"
#include "tubevol/ray_transport.hpp"
#include "tubevol/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tubevol;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Scenario builtin(const std::string& name) {
  auto s = find_builtin(name);
  if (!s) throw std::runtime_error("missing built-in scenario " + name);
  return *s;
}

const BoundReport* variant(const std::vector<BoundReport>& reports, const std::string& name) {
  for (const BoundReport& r : reports)
    if (r.variant == name) return &r;
  return nullptr;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome flat_equality() {
  const auto start = std::chrono::steady_clock::now();
  const Scenario sc = builtin("flat_t4_circle");
  const auto reports = check_integral_bound(sc, 0.5);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const BoundReport* g = variant(reports, "global_norm,r=0.5");
  if (!g) return {false, "global_norm report missing"};
  const double exact = pi * pi / 3;
  const double em = rel(g->measured, exact), eb = rel(g->bound, exact);
  return {em <= 1e-5 && eb <= 1e-5 && secs <= 30.0,
          "volume " + fmt("%.10f", g->measured) + " bound " + fmt("%.10f", g->bound) + " rel err " +
              fmt("%.2e", std::max(em, eb)) + " time " + fmt("%.1fs", secs)};
}

Outcome spaceform_equality() {
  const Scenario sc = builtin("s3_great_circle");
  const BoundReport q = check_hk_bound(sc, pi / 4);
  const auto half = volume_table(sc, {pi / 2});
  const double e1 = std::max(std::abs(q.measured - pi * pi), std::abs(q.bound - pi * pi));
  const double e2 = std::abs(half.at(0).value - 2 * pi * pi);
  return {q.status == CheckStatus::Evaluated && e1 <= 1e-5 && e2 <= 1e-4,
          "r=pi/4 max err " + fmt("%.2e", e1) + ", r=pi/2 err " + fmt("%.2e", e2)};
}

Outcome hessian_equality() {
  double worst_h3 = 0.0, worst_s3 = 0.0;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g01;
  auto unit = [&](int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = g01(rng);
    return Vec(v / v.norm());
  };
  std::vector<double> times;
  for (int i = 0; i <= 38; ++i) times.push_back(0.1 + 1.9 * i / 38.0);

  const BuiltScenario h3 = build(builtin("h3_point"));
  const BaseNode h3_node = make_base_node(*h3.submanifold, *h3.manifold, Vec(0), 1.0);
  for (int ray = 0; ray < 8; ++ray) {
    RayOptions opts;
    opts.output_times = times;
    const RayResult res = integrate_ray(*h3.manifold, NormalRay{&h3_node, unit(3), 2.0, 1e-10}, opts);
    if (res.outputs.size() != times.size()) return {false, "hyperbolic ray ended early"};
    for (const TransportState& s : res.outputs)
      worst_h3 = std::max(worst_h3, std::abs(shape_operator(s).trace() - 2.0 / std::tanh(s.t)));
  }

  // generic one-dimensional W around a point of S^3: cs/sn for every W
  const BuiltScenario s3 = build(builtin("s3_point"));
  const BaseNode s3_node = make_base_node(*s3.submanifold, *s3.manifold, Vec(0), 1.0);
  std::vector<double> s3_times;
  for (int i = 0; i <= 20; ++i) s3_times.push_back(0.1 + 1.3 * i / 20.0);
  for (int ray = 0; ray < 8; ++ray) {
    RayOptions opts;
    opts.output_times = s3_times;
    const RayResult res = integrate_ray(*s3.manifold, NormalRay{&s3_node, unit(3), 1.4, 1e-10}, opts);
    if (res.outputs.size() != s3_times.size()) return {false, "sphere ray ended early"};
    for (const TransportState& s : res.outputs) {
      Mat W(2, 1);
      W.col(0) = unit(2);
      worst_s3 = std::max(worst_s3, std::abs(partial_trace_shape(s, W) - std::cos(s.t) / std::sin(s.t)));
    }
  }

  // the same comparisons through the check reports
  double worst_check = 0.0;
  for (const char* name : {"h3_point", "s3_point"})
    for (const BoundReport& r : check_hessian_comparison(builtin(name)))
      worst_check = std::max(worst_check, r.status == CheckStatus::Evaluated ? std::abs(r.slack) : 1.0);
  return {worst_h3 <= 1e-5 && worst_s3 <= 1e-5 && worst_check <= 1e-5,
          "H3 tr S vs 2coth " + fmt("%.2e", worst_h3) + ", S3 generic vs cot " + fmt("%.2e", worst_s3) +
              ", checks " + fmt("%.2e", worst_check)};
}

Outcome focal_radius() {
  const BoundReport eq = check_focal_radius(builtin("sn_equator"));
  const BoundReport small = check_focal_radius(builtin("s3_small_sphere"));
  const double e = std::abs(eq.measured - pi / 2);
  const double gap = pi / 2 - small.measured;
  return {eq.status == CheckStatus::Evaluated && e <= 1e-6 && eq.equality &&
              small.status == CheckStatus::Evaluated && gap >= 1e-3,
          "equator " + fmt("%.10f", eq.measured) + (eq.equality ? " (equality)" : " (no equality flag)") +
              ", small sphere " + fmt("%.10f", small.measured)};
}

Outcome rho_oracle() {
  const auto reports = check_rho_k(builtin("s2xs2_factor"));
  const BoundReport* r2 = variant(reports, "search_vs_declared,k=2");
  const BoundReport* r3 = variant(reports, "search_vs_declared,k=3");
  if (!r2 || !r3) return {false, "rho reports missing"};
  bool oracle_ok = true;
  for (const BoundReport& r : reports) oracle_ok = oracle_ok && r.passed;
  const double rho2 = r2->constants.at("refined"), rho3 = r3->constants.at("refined");
  return {std::abs(rho2) <= 1e-3 && std::abs(rho3 - 1.0) <= 1e-3 && oracle_ok,
          "rho_2 " + fmt("%.6f", rho2) + ", rho_3 " + fmt("%.6f", rho3) +
              (oracle_ok ? ", oracle agrees" : ", oracle disagrees")};
}

Outcome structural() {
  int reports = 0, bad = 0;
  std::string first_bad;
  for (const Scenario& sc : builtin_scenarios()) {
    for (const BoundReport& r : check_structural(sc)) {
      ++reports;
      if (!(r.status == CheckStatus::Evaluated && r.passed)) {
        ++bad;
        if (first_bad.empty()) first_bad = sc.name + " " + r.variant;
      }
    }
  }
  return {reports > 0 && bad == 0,
          std::to_string(reports) + " residual reports, " + std::to_string(bad) + " over limit" +
              (first_bad.empty() ? "" : " (first: " + first_bad + ")")};
}

Outcome lemmas() {
  int enforced = 0, violations = 0, informational_violations = 0, rays = 0;
  std::string first_bad;
  for (const char* name : {"bump_torus", "bump_torus_mild", "flat_t4_circle", "flat_t5_torus2", "s3_great_circle"}) {
    Scenario sc = builtin(name);
    sc.ray_samples = 256;
    const BuiltScenario b = build(sc);
    const int n = b.manifold->dim(), m = b.submanifold->dim();
    const int k = std::min(m, n - m - 1);
    sc.lemma_powers = {double(n - k + 1), double(2 * (n - k))};
    for (const BoundReport& r : check_lemma_51_52(sc)) {
      const bool bad = r.status != CheckStatus::Evaluated || r.slack < -1e-5;
      if (r.enforced) {
        ++enforced;
        if (bad || r.is_failure()) {
          ++violations;
          if (first_bad.empty()) first_bad = std::string(name) + " " + r.variant;
        }
      } else if (bad) {
        ++informational_violations;
      }
      if (r.constants.count("rays")) rays = std::max(rays, int(r.constants.at("rays")));
    }
  }
  return {violations == 0 && enforced > 0 && rays >= 256,
          std::to_string(enforced) + " enforced inequalities on " + std::to_string(rays) + " rays each, " +
              std::to_string(violations) + " violations, " + std::to_string(informational_violations) +
              " informational violations" + (first_bad.empty() ? "" : " (first: " + first_bad + ")")};
}

Outcome integral_bound() {
  const Scenario sc = builtin("bump_torus");
  const auto reports = check_integral_bound(sc, 0.8);
  const BoundReport* g = variant(reports, "global_norm,r=0.80000000000000004");
  const BoundReport* t = variant(reports, "tube_norm,r=0.80000000000000004");
  const BoundReport* mc = variant(reports, "monte_carlo,r=0.80000000000000004");
  if (!g || !t || !mc) return {false, "integral-bound reports missing"};
  const double deficit = g->constants.at("deficit_norm");
  return {g->passed && g->slack > 0 && deficit > 0 && mc->passed,
          "slack " + fmt("%.6g", g->slack) + " (global), " + fmt("%.6g", t->slack) + " (tube), deficit norm " +
              fmt("%.4g", deficit) + ", |quad - MC| " + fmt("%.3g", mc->measured) + " vs 3 SE " +
              fmt("%.3g", mc->bound)};
}

Outcome cheeger_round_trip() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int done = 0, bad = 0;
  double worst = 0.0;
  while (done < 100) {
    const int n = 3 + done % 4;
    const int m = 1 + (done / 4) % (n - 2);
    const int k = std::min(m, n - m - 1);
    const double p = n - k + 0.2 + 2 * u01(rng);
    const double H = -u01(rng);
    const double v0 = 0.5 + 5 * u01(rng);
    const double D = 0.2 + u01(rng);
    const double eps = 1e-3 * u01(rng);
    const auto c = model::thm1_constants(n, m, p, H);
    if (model::thm1_bound(c, 0.0, eps, D) >= v0) continue;
    const double d = model::cheeger_delta(n, m, p, H, v0, D, eps);
    const double e = rel(model::thm1_bound(c, d, eps, D), v0);
    worst = std::max(worst, e);
    if (!(e <= 1e-8)) ++bad;
    ++done;
  }
  return {bad == 0, std::to_string(done) + " draws, worst relative error " + fmt("%.2e", worst)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "tubevol_acceptance";
  std::vector<std::string> bodies;
  for (const char* sub : {"a", "b"}) {
    const fs::path dir = root / sub;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string d = dir.string();
    const char* argv[] = {"tubevol",  "verify", "--scenario", "flat_t4_circle", "--scenario", "bump_torus_mild",
                          "--seed",   "2024",   "--out",      d.c_str()};
    std::ostringstream out, err;
    const int code = cli::run(10, argv, out, err);
    if (code != cli::kSuccess) return {false, "verify exited with " + std::to_string(code) + ": " + err.str()};
    std::ifstream f(dir / "custom_report.json", std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    bodies.push_back(ss.str());
  }
  fs::remove_all(root);
  const bool same = !bodies[0].empty() && bodies[0] == bodies[1];
  return {same, std::to_string(bodies[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"flat tube equality", flat_equality},
      {"space-form tube equality", spaceform_equality},
      {"Hessian comparison equality", hessian_equality},
      {"focal radius", focal_radius},
      {"rho_k product oracle", rho_oracle},
      {"structural residuals", structural},
      {"growth lemma suite", lemmas},
      {"integral bound with deficit", integral_bound},
      {"cheeger_delta round trip", cheeger_round_trip},
      {"report determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("[%s] %2zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
