#include "cli.hpp"

#include "tubevol/config.hpp"
#include "tubevol/verification.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tubevol::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "a:b:n" -> n equispaced radii from a to b inclusive.
std::vector<double> parse_radii(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--radii expects a:b:n");
  double a = 0.0, b = 0.0;
  int n = 0;
  try {
    std::size_t used = 0;
    a = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("a");
    b = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("b");
    n = std::stoi(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::exception&) {
    throw UsageError("--radii expects numbers a:b:n, got '" + text + "'");
  }
  if (n < 1 || !(a >= 0.0) || !(b >= a)) throw UsageError("--radii needs 0 <= a <= b and n >= 1");
  std::vector<double> radii;
  for (int i = 0; i < n; ++i) radii.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return radii;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  const fs::path d(dir);
  std::error_code ec;
  if (!fs::is_directory(d, ec)) throw IoError("output directory '" + dir + "' does not exist");
  const fs::path path = d / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

Scenario named_scenario(const std::string& name) {
  const auto found = find_builtin(name);
  if (!found) throw ConfigError("scenario", "no built-in scenario named '" + name + "'");
  return *found;
}

struct Common {
  std::string out_dir;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

void apply(const Common& c, Scenario& sc) {
  if (c.seed) sc.seed = *c.seed;
  if (c.tolerance) sc.tolerance = *c.tolerance;
}

std::string checks_list(const Scenario& sc) {
  std::string s;
  for (Check c : sc.checks) s += (s.empty() ? "" : ";") + std::string(to_string(c));
  return s;
}

int cmd_scenarios(const Common& c, std::ostream& out) {
  const auto all = builtin_scenarios();
  std::ostringstream os;
  if (c.format == "json") {
    os << "[";
    for (std::size_t i = 0; i < all.size(); ++i) os << (i ? "," : "") << "\n" << scenario_to_json(all[i]);
    os << "]\n";
  } else if (c.format == "csv") {
    os << "name,checks,description\n";
    for (const Scenario& sc : all) os << sc.name << ',' << checks_list(sc) << ',' << sc.description << '\n';
  } else {
    for (const Scenario& sc : all) os << sc.name << "  [" << checks_list(sc) << "]  " << sc.description << '\n';
  }
  if (c.out_dir.empty()) out << os.str();
  else write_file(c.out_dir, c.format == "json" ? "scenarios.json" : "scenarios.csv", os.str());
  return kSuccess;
}

int cmd_volume(Common c, const std::string& scenario, const std::string& config, const std::string& radii_text,
               std::ostream& out) {
  if (scenario.empty() == config.empty()) throw UsageError("volume needs exactly one of --scenario or --config");
  Scenario sc;
  if (!config.empty()) {
    const ScenarioConfig cfg = load_config(config);
    sc = cfg.scenario;
    if (c.out_dir.empty() && cfg.output_directory) c.out_dir = *cfg.output_directory;
    if (c.format.empty() && cfg.output_format) c.format = *cfg.output_format;
  } else {
    sc = named_scenario(scenario);
  }
  apply(c, sc);
  const std::vector<double> radii = radii_text.empty() ? sc.radii : parse_radii(radii_text);
  if (radii.empty()) throw UsageError("no radii: pass --radii a:b:n");
  if (!c.out_dir.empty()) {
    std::error_code ec;
    if (!fs::is_directory(c.out_dir, ec)) throw IoError("output directory '" + c.out_dir + "' does not exist");
  }
  const auto rows = volume_table(sc, radii);
  const bool json = c.format == "json";
  const std::string text = json ? volume_json(sc.name, rows) : volume_csv(sc.name, rows);
  if (c.out_dir.empty()) out << text;
  else write_file(c.out_dir, sc.name + (json ? "_volume.json" : "_volume.csv"), text);
  return kSuccess;
}

int cmd_verify(Common c, const std::string& suite_name, const std::vector<std::string>& scenarios,
               const std::vector<std::string>& configs, std::ostream& out) {
  std::vector<Scenario> set;
  std::string name = suite_name;
  if (!suite_name.empty()) set = suite(suite_name);
  for (const std::string& s : scenarios) set.push_back(named_scenario(s));
  for (const std::string& path : configs) {
    const ScenarioConfig cfg = load_config(path);
    set.push_back(cfg.scenario);
    if (c.out_dir.empty() && cfg.output_directory) c.out_dir = *cfg.output_directory;
    if (c.format.empty() && cfg.output_format) c.format = *cfg.output_format;
  }
  if (suite_name.empty() && scenarios.empty() && configs.empty())
    throw UsageError("verify needs a suite name, --scenario or --config");
  if (name.empty()) name = set.size() == 1 ? set.front().name : "custom";
  for (Scenario& sc : set) apply(c, sc);
  if (!c.out_dir.empty()) {
    std::error_code ec;
    if (!fs::is_directory(c.out_dir, ec)) throw IoError("output directory '" + c.out_dir + "' does not exist");
  }
  const SuiteReport report = run_suite(name, set);
  const bool csv = c.format == "csv";
  const std::string rendered = csv ? to_csv(report) : to_json(report);
  if (c.out_dir.empty()) {
    if (c.format.empty()) out << summary_text(report);
    else out << rendered;
  } else {
    write_file(c.out_dir, name + (csv ? "_report.csv" : "_report.json"), rendered);
    out << summary_text(report);
  }
  return report.success() ? kSuccess : kBoundFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tube volumes and comparison bounds on Riemannian manifolds", "tubevol"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  auto add_common = [&](CLI::App* sub, bool tol) {
    sub->add_option("--out", common.out_dir, "Existing directory for output files");
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Seed for all sampling");
    if (tol) sub->add_option("--tolerance", tolerance, "Absolute slack tolerance")->check(CLI::NonNegativeNumber);
  };

  auto* list = app.add_subcommand("scenarios", "List the built-in scenarios and their checks");
  add_common(list, false);

  std::string scenario, config, radii;
  auto* volume = app.add_subcommand("volume", "Tube volumes with comparison bounds on a radius grid");
  volume->add_option("--scenario", scenario, "Built-in scenario name");
  volume->add_option("--config", config, "Scenario config (JSON)");
  volume->add_option("--radii", radii, "Radius grid a:b:n");
  add_common(volume, true);

  std::string suite_name;
  std::vector<std::string> scenarios, configs;
  auto* verify = app.add_subcommand("verify", "Run the enabled checks and write a report");
  verify->add_option("suite", suite_name, "Built-in suite: all or spaceforms");
  verify->add_option("--scenario", scenarios, "Built-in scenario name (repeatable)");
  verify->add_option("--config", configs, "Scenario config (repeatable)");
  add_common(verify, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }
  for (CLI::App* sub : {list, volume, verify}) {
    if (sub->count("--seed")) common.seed = seed;
    if (sub != list && sub->count("--tolerance")) common.tolerance = tolerance;
  }

  try {
    if (*list) return cmd_scenarios(common, out);
    if (*volume) return cmd_volume(common, scenario, config, radii, out);
    return cmd_verify(common, suite_name, scenarios, configs, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
  }
  return kUsageError;
}

}  // namespace tubevol::cli
