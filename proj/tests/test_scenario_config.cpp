#include "doctest.h"

#include "tubevol/config.hpp"
#include "tubevol/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace tubevol;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("built-in catalogue") {
  const auto all = builtin_scenarios();
  REQUIRE(all.size() >= 10);
  CHECK(std::is_sorted(all.begin(), all.end(), [](const Scenario& a, const Scenario& b) { return a.name < b.name; }));
  for (const char* name : {"bump_torus", "bump_torus_mild", "flat_t4_circle", "flat_t5_torus2", "h3_point",
                           "s2xs2_factor", "s3_great_circle", "s3_point", "s3_small_sphere", "sn_equator"}) {
    const auto s = find_builtin(name);
    REQUIRE_MESSAGE(s.has_value(), name);
    CHECK_NOTHROW(build(*s));
    CHECK_FALSE(s->checks.empty());
  }
  CHECK_FALSE(find_builtin("nope").has_value());

  CHECK(suite("all").size() == all.size());
  const auto sf = suite("spaceforms");
  CHECK_FALSE(sf.empty());
  for (const Scenario& s : sf) CHECK(s.name.rfind("bump", 0) != 0);
  CHECK_THROWS_AS(suite("unknown"), ConfigError);
}

TEST_CASE("built scenarios have the expected dimensions") {
  const BuiltScenario b = build(*find_builtin("flat_t4_circle"));
  CHECK(b.manifold->dim() == 4);
  CHECK(b.submanifold->dim() == 1);
  const BuiltScenario s = build(*find_builtin("s2xs2_factor"));
  CHECK(s.manifold->dim() == 4);
  CHECK(s.submanifold->dim() == 2);
  const BuiltScenario p = build(*find_builtin("h3_point"));
  CHECK(p.submanifold->dim() == 0);
}

TEST_CASE("unknown keys name the offending field") {
  const std::string msg = config_error(R"({"extends": "flat_t4_circle", "submanifold": {"raduis": 0.3}})");
  CHECK(msg.find("submanifold.raduis") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);
  CHECK(config_error(R"({"nmae": "x"})").find("nmae") != std::string::npos);
  CHECK(config_error(R"({"extends": "h3_point", "declared": {"known_rho": {"1": 0}, "minmal": true}})")
            .find("declared.minmal") != std::string::npos);
}

TEST_CASE("syntax errors report line and column") {
  const std::string msg = config_error("{\n  \"name\": \"x\",\n  \"k\": ,\n}");
  CHECK(msg.find("t.json:3:") != std::string::npos);
  CHECK(msg.find("invalid JSON") != std::string::npos);
}

TEST_CASE("bad values are config errors") {
  CHECK_FALSE(config_error(R"({"extends": "s3_point", "manifold": {"chart": "mercator"}})").empty());
  CHECK_FALSE(config_error(R"({"extends": "h3_point", "checks": ["hessian", "telepathy"]})").empty());
  CHECK_FALSE(config_error(R"({"extends": "h3_point", "seed": -3})").empty());
  CHECK_FALSE(config_error(R"({"extends": "h3_point", "output": {"format": "xml"}})").empty());
  CHECK_FALSE(config_error(R"({"extends": "missing_base"})").empty());
  CHECK_FALSE(config_error(R"({"extends": "h3_point", "k": "two"})").empty());
}

TEST_CASE("extends starts from a built-in and overrides fields") {
  const ScenarioConfig cfg = parse_config(R"({
    "extends": "flat_t4_circle",
    "name": "wider",
    "radii": [0.25, 0.75],
    "declared": {"validity_radius": "inf"},
    "output": {"directory": "out", "format": "json"}
  })");
  CHECK(cfg.scenario.name == "wider");
  CHECK(cfg.scenario.radii == std::vector<double>{0.25, 0.75});
  CHECK(std::isinf(*cfg.scenario.validity_radius));
  CHECK(cfg.scenario.manifold.type == "flat_torus");
  CHECK(cfg.scenario.known_rho == find_builtin("flat_t4_circle")->known_rho);
  CHECK(*cfg.output_directory == "out");
  CHECK(*cfg.output_format == "json");
}

TEST_CASE("scenario json round trip") {
  for (const Scenario& s : builtin_scenarios()) {
    const std::string text = scenario_to_json(s);
    const ScenarioConfig back = parse_config(text, s.name);
    CHECK(scenario_to_json(back.scenario) == text);
    CHECK(back.scenario.checks == s.checks);
    CHECK(back.scenario.radii == s.radii);
    CHECK(back.scenario.seed == s.seed);
  }
}

TEST_CASE("warped product from a config") {
  const ScenarioConfig cfg = parse_config(R"({
    "name": "warped",
    "manifold": {"type": "warped_product", "dim": 3, "side": 1.0, "r_lo": 0.5, "r_hi": 2.0,
                 "warp": {"kind": "cosh", "c0": 1.0, "c1": 1.0}},
    "submanifold": {"type": "point", "base": [1.0, 0.5, 0.5]},
    "radii": [0.2],
    "checks": ["structural"]
  })");
  const BuiltScenario b = build(cfg.scenario);
  CHECK(b.manifold->dim() == 3);
  CHECK(b.submanifold->dim() == 0);
}

TEST_CASE("load_config reads files") {
  const auto path = std::filesystem::temp_directory_path() / "tubevol_cfg_test.json";
  {
    std::ofstream f(path);
    f << R"({"extends": "h3_point", "seed": 9})";
  }
  CHECK(load_config(path.string()).scenario.seed == 9);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), std::ios_base::failure);
}
