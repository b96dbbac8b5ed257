#pragma once

#include "tubevol/bound_report.hpp"
#include "tubevol/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tubevol {

/// Outcome of sampling rho_k over points of the tube.
struct Certification {
  bool ok = false;
  double min_rho = 0.0;  // smallest sampled rho_k
  double margin = 0.0;   // min_rho - k H
  int points = 0;
};

/// Samples rho_k at >= scenario.certification_samples points on seeded
/// rays of length `t_max` and compares against k H with the scenario tolerance.
Certification certify_rho_k(const Scenario& scenario, const BuiltScenario& built, int k, double H,
                            double t_max);

/// Partial traces of the level-set shape operator along parallel k-frames
/// (tangential, normal and generic) against the model traces.
std::vector<BoundReport> check_hessian_comparison(const Scenario& scenario);

/// Largest focal distance over sampled directions with <eta, xi> <= 0
/// against pi / (2 sqrt(H)).
BoundReport check_focal_radius(const Scenario& scenario);

/// Tube volume against the integral of the comparison density up to its
/// first zero, with k = min(m, n - m - 1).
BoundReport check_hk_bound(const Scenario& scenario, double r);

/// Tube volume against the integral-curvature bound, with the global
/// deficit norm (enforced), a +1e-3 safety-inflated global norm and the
/// tube-restricted norm (both informational), plus a Monte Carlo
/// cross-check of the volume when the scenario requests samples.
std::vector<BoundReport> check_integral_bound(const Scenario& scenario, double r);

/// Growth inequalities for the J and Y factors, the power-integral
/// inequality and the second-derivative inequality for J, on sampled rays.
std::vector<BoundReport> check_lemma_51_52(const Scenario& scenario);

/// Riccati residual, log-density derivative, Wronskian and the
/// small-t normalization of A on sampled rays.
std::vector<BoundReport> check_structural(const Scenario& scenario);

/// rho_k search against declared values and a dense random-direction oracle.
std::vector<BoundReport> check_rho_k(const Scenario& scenario);

/// All enabled checks of one scenario, in a fixed order. Exceptions are
/// turned into reports with status Error.
std::vector<BoundReport> run_checks(const Scenario& scenario);

/// One tube volume row with the comparison-density bound (when
/// 1 <= m <= n-2) and the integral-curvature bound (when its structural
/// preconditions hold). Bounds are evaluated without certification.
struct VolumeRow {
  double r = 0.0;
  double value = 0.0;
  double error_estimate = 0.0;
  int rays = 0;
  int truncated_rays = 0;
  bool over_estimate = false;
  std::optional<double> comparison_bound;
  std::optional<double> integral_bound;
};

std::vector<VolumeRow> volume_table(const Scenario& scenario, const std::vector<double>& radii);
std::string volume_csv(const std::string& scenario, const std::vector<VolumeRow>& rows);
std::string volume_json(const std::string& scenario, const std::vector<VolumeRow>& rows);

struct SuiteReport {
  std::string name;
  std::vector<BoundReport> reports;  // grouped by scenario name, sorted

  int failures() const;
  int precondition_violations() const;
  int equalities() const;
  bool success() const { return failures() == 0; }
};

SuiteReport run_suite(const std::string& name, std::vector<Scenario> scenarios);

/// Machine-readable renderings; numbers use %.17g and the output depends
/// only on the report contents.
std::string to_json(const SuiteReport& report);
std::string to_csv(const SuiteReport& report);
/// One line per report plus a totals line.
std::string summary_text(const SuiteReport& report);

}  // namespace tubevol
