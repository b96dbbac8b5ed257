#pragma once

#include "tubevol/scenario.hpp"

#include <optional>
#include <string>

namespace tubevol {

/// A scenario config file: the scenario plus optional output settings.
///
/// Top-level keys: name, description, extends (a built-in scenario used as
/// the starting point), manifold, submanifold, k, H, p, radii, quadrature,
/// declared, checks, tolerance, seed, ray_samples, certification_samples,
/// lemma_powers, hessian_H, volume_inflation, output. Unknown keys are
/// rejected with their path.
struct ScenarioConfig {
  Scenario scenario;
  std::optional<std::string> output_directory;
  std::optional<std::string> output_format;  // csv | json
};

/// Parses a JSON document; `source` names it in error messages. Syntax
/// errors report the line and column.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "config");

ScenarioConfig load_config(const std::string& path);

/// JSON rendering of a scenario that parse_config reads back.
std::string scenario_to_json(const Scenario& scenario);

}  // namespace tubevol
