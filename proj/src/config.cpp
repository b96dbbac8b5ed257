#include "tubevol/config.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace tubevol {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Object reader that rejects keys outside `allowed`.
class Obj {
 public:
  Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
    for (const auto& item : j.items())
      if (!allowed.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) const { return j_.at(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  void get(const std::string& key, double& out) const {
    if (has(key)) out = number(at(key), path(key));
  }
  void get(const std::string& key, int& out) const {
    if (has(key)) out = integer(at(key), path(key));
  }
  void get(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(path(key), "expected a string");
    out = at(key).get<std::string>();
  }
  void get(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& a = array(key);
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], index(path(key), i)));
  }
  void get(const std::string& key, std::vector<int>& out) const {
    if (!has(key)) return;
    const json& a = array(key);
    out.clear();
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(integer(a[i], index(path(key), i)));
  }
  void get(const std::string& key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw ConfigError(path(key), "expected true or false");
    out = at(key).get<bool>();
  }

  const json& array(const std::string& key) const {
    if (!at(key).is_array()) throw ConfigError(path(key), "expected an array");
    return at(key);
  }

  static double number(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
      if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(path, "expected a number");
  }

  static int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<int>();
  }

 private:
  const json& j_;
  std::string path_;
};

BumpSpec parse_bump(const json& j, const std::string& path) {
  Obj o(j, path, {"center", "radius", "amplitude"});
  BumpSpec b;
  o.get("center", b.center);
  o.get("radius", b.radius);
  o.get("amplitude", b.amplitude);
  return b;
}

ManifoldSpec parse_manifold(const json& j, const std::string& path, ManifoldSpec m) {
  Obj o(j, path,
        {"type", "dim", "side", "radius", "curvature", "chart", "pole", "bumps", "factors", "warp", "r_lo", "r_hi"});
  o.get("type", m.type);
  o.get("dim", m.dim);
  o.get("side", m.side);
  o.get("radius", m.radius);
  o.get("curvature", m.curvature);
  o.get("chart", m.chart);
  o.get("pole", m.pole);
  o.get("r_lo", m.r_lo);
  o.get("r_hi", m.r_hi);
  if (o.has("bumps")) {
    const json& a = o.array("bumps");
    m.bumps.clear();
    for (std::size_t i = 0; i < a.size(); ++i) m.bumps.push_back(parse_bump(a[i], index(o.path("bumps"), i)));
  }
  if (o.has("factors")) {
    const json& a = o.array("factors");
    m.factors.clear();
    for (std::size_t i = 0; i < a.size(); ++i)
      m.factors.push_back(parse_manifold(a[i], index(o.path("factors"), i), ManifoldSpec{}));
    if (!o.has("dim")) {
      m.dim = 0;
      for (const ManifoldSpec& f : m.factors) m.dim += f.dim;
    }
  }
  if (o.has("warp")) {
    Obj w(o.at("warp"), o.path("warp"), {"kind", "c0", "c1", "values"});
    w.get("kind", m.warp.kind);
    w.get("c0", m.warp.c0);
    w.get("c1", m.warp.c1);
    w.get("values", m.warp.values);
  }
  return m;
}

SubmanifoldSpec parse_submanifold(const json& j, const std::string& path, SubmanifoldSpec s) {
  Obj o(j, path, {"type", "base", "ambient", "axes", "side", "radius", "resolution"});
  o.get("type", s.type);
  o.get("base", s.base);
  o.get("ambient", s.ambient);
  o.get("axes", s.axes);
  o.get("side", s.side);
  o.get("radius", s.radius);
  o.get("resolution", s.resolution);
  return s;
}

void parse_quadrature(const json& j, const std::string& path, QuadratureSpec& q) {
  Obj o(j, path,
        {"t_order", "t_panels", "fiber_resolution", "base_resolution", "monte_carlo_samples", "ray_rtol", "threads"});
  o.get("t_order", q.t_order);
  o.get("t_panels", q.t_panels);
  o.get("fiber_resolution", q.fiber_resolution);
  o.get("base_resolution", q.base_resolution);
  if (o.has("monte_carlo_samples")) {
    if (o.at("monte_carlo_samples").is_null()) {
      q.monte_carlo_samples.reset();
    } else {
      q.monte_carlo_samples = Obj::integer(o.at("monte_carlo_samples"), o.path("monte_carlo_samples"));
      if (*q.monte_carlo_samples < 2) throw ConfigError(o.path("monte_carlo_samples"), "needs at least 2 samples");
    }
  }
  o.get("ray_rtol", q.ray_rtol);
  o.get("threads", q.threads);
  try {
    q.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

void parse_declared(const json& j, const std::string& path, Scenario& sc) {
  Obj o(j, path, {"validity_radius", "known_rho", "minimal", "totally_geodesic"});
  if (o.has("validity_radius")) {
    if (o.at("validity_radius").is_null()) sc.validity_radius.reset();
    else sc.validity_radius = Obj::number(o.at("validity_radius"), o.path("validity_radius"));
  }
  if (o.has("known_rho")) {
    const json& kr = o.at("known_rho");
    if (!kr.is_object()) throw ConfigError(o.path("known_rho"), "expected an object keyed by k");
    sc.known_rho.clear();
    for (const auto& item : kr.items()) {
      const std::string p = join(o.path("known_rho"), item.key());
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(item.key(), &used);
        if (used != item.key().size()) throw std::invalid_argument(item.key());
      } catch (const std::exception&) {
        throw ConfigError(p, "key must be an integer k");
      }
      sc.known_rho[k] = Obj::number(item.value(), p);
    }
  }
  if (o.has("minimal")) {
    bool b = false;
    o.get("minimal", b);
    sc.minimal_declared = b;
  }
  if (o.has("totally_geodesic")) {
    bool b = false;
    o.get("totally_geodesic", b);
    sc.totally_geodesic_declared = b;
  }
}

void validate(const Scenario& sc) {
  if (sc.name.empty()) throw ConfigError("name", "must not be empty");
  for (char ch : sc.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
      throw ConfigError("name", "use letters, digits, '_', '-' or '.'");
  if (sc.k < 1) throw ConfigError("k", "must be >= 1");
  if (!(sc.p >= 1.0)) throw ConfigError("p", "must be >= 1");
  for (std::size_t i = 0; i < sc.radii.size(); ++i)
    if (!(sc.radii[i] >= 0.0) || !std::isfinite(sc.radii[i])) throw ConfigError(index("radii", i), "must be finite and >= 0");
  if (!(sc.tolerance >= 0.0)) throw ConfigError("tolerance", "must be >= 0");
  if (sc.ray_samples < 1) throw ConfigError("ray_samples", "must be >= 1");
  if (sc.certification_samples < 1) throw ConfigError("certification_samples", "must be >= 1");
  if (!(sc.volume_inflation > 0.0)) throw ConfigError("volume_inflation", "must be positive");
  if (sc.validity_radius && !(*sc.validity_radius > 0.0)) throw ConfigError("declared.validity_radius", "must be positive");
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json manifold_json(const ManifoldSpec& m) {
  json j;
  j["type"] = m.type;
  j["dim"] = m.dim;
  if (m.type == "flat_torus" || m.type == "warped_product") j["side"] = m.side;
  if (m.type == "sphere") {
    j["radius"] = m.radius;
    j["chart"] = m.chart;
    if (!m.pole.empty()) j["pole"] = m.pole;
  }
  if (m.type == "hyperbolic") j["curvature"] = m.curvature;
  if (!m.bumps.empty()) {
    j["bumps"] = json::array();
    for (const BumpSpec& b : m.bumps) j["bumps"].push_back({{"center", b.center}, {"radius", b.radius}, {"amplitude", b.amplitude}});
  }
  if (m.type == "product") {
    j["factors"] = json::array();
    for (const ManifoldSpec& f : m.factors) j["factors"].push_back(manifold_json(f));
  }
  if (m.type == "warped_product") {
    j["r_lo"] = m.r_lo;
    j["r_hi"] = m.r_hi;
    j["warp"] = {{"kind", m.warp.kind}, {"c0", m.warp.c0}, {"c1", m.warp.c1}};
    if (!m.warp.values.empty()) j["warp"]["values"] = m.warp.values;
  }
  return j;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("", source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
  Obj o(doc, "",
        {"name", "description", "extends", "manifold", "submanifold", "k", "H", "p", "radii", "quadrature", "declared",
         "checks", "tolerance", "seed", "ray_samples", "certification_samples", "lemma_powers", "hessian_H",
         "volume_inflation", "output"});
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;
  if (o.has("extends")) {
    std::string base;
    o.get("extends", base);
    const auto found = find_builtin(base);
    if (!found) throw ConfigError("extends", "no built-in scenario named '" + base + "'");
    sc = *found;
  }
  o.get("name", sc.name);
  o.get("description", sc.description);
  if (o.has("manifold")) {
    // a different manifold type starts from defaults
    ManifoldSpec start = sc.manifold;
    if (o.at("manifold").is_object() && o.at("manifold").contains("type") &&
        o.at("manifold")["type"] != json(sc.manifold.type))
      start = ManifoldSpec{};
    sc.manifold = parse_manifold(o.at("manifold"), "manifold", start);
  }
  if (o.has("submanifold")) {
    SubmanifoldSpec start = sc.submanifold;
    if (o.at("submanifold").is_object() && o.at("submanifold").contains("type") &&
        o.at("submanifold")["type"] != json(sc.submanifold.type))
      start = SubmanifoldSpec{};
    sc.submanifold = parse_submanifold(o.at("submanifold"), "submanifold", start);
  }
  o.get("k", sc.k);
  o.get("H", sc.H);
  o.get("p", sc.p);
  o.get("radii", sc.radii);
  if (o.has("quadrature")) parse_quadrature(o.at("quadrature"), "quadrature", sc.quadrature);
  if (o.has("declared")) parse_declared(o.at("declared"), "declared", sc);
  if (o.has("checks")) {
    const json& a = o.array("checks");
    sc.checks.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = index("checks", i);
      if (!a[i].is_string()) throw ConfigError(p, "expected a check name");
      const auto c = check_from_string(a[i].get<std::string>());
      if (!c) throw ConfigError(p, "unknown check '" + a[i].get<std::string>() + "'");
      if (std::find(sc.checks.begin(), sc.checks.end(), *c) == sc.checks.end()) sc.checks.push_back(*c);
    }
  }
  o.get("tolerance", sc.tolerance);
  if (o.has("seed")) {
    const json& s = o.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed", "expected a non-negative integer");
    sc.seed = s.get<std::uint64_t>();
  }
  o.get("ray_samples", sc.ray_samples);
  o.get("certification_samples", sc.certification_samples);
  o.get("lemma_powers", sc.lemma_powers);
  if (o.has("hessian_H")) {
    if (o.at("hessian_H").is_null()) sc.hessian_H.reset();
    else sc.hessian_H = Obj::number(o.at("hessian_H"), "hessian_H");
  }
  o.get("volume_inflation", sc.volume_inflation);
  if (o.has("output")) {
    Obj out(o.at("output"), "output", {"directory", "format"});
    std::string dir, format;
    if (out.has("directory")) {
      out.get("directory", dir);
      cfg.output_directory = dir;
    }
    if (out.has("format")) {
      out.get("format", format);
      if (format != "csv" && format != "json") throw ConfigError("output.format", "must be csv or json");
      cfg.output_format = format;
    }
  }
  validate(sc);
  // surface construction errors as config errors now rather than mid-run
  try {
    build(sc);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("manifold", e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["name"] = sc.name;
  j["description"] = sc.description;
  j["manifold"] = manifold_json(sc.manifold);
  const SubmanifoldSpec& s = sc.submanifold;
  json sub{{"type", s.type}, {"resolution", s.resolution}};
  if (!s.base.empty()) sub["base"] = s.base;
  if (!s.ambient.empty()) sub["ambient"] = s.ambient;
  if (!s.axes.empty()) {
    sub["axes"] = s.axes;
    sub["side"] = s.side;
  }
  if (s.type == "round_sphere") sub["radius"] = s.radius;
  j["submanifold"] = sub;
  j["k"] = sc.k;
  j["H"] = sc.H;
  j["p"] = sc.p;
  j["radii"] = sc.radii;
  const QuadratureSpec& q = sc.quadrature;
  json quad{{"t_order", q.t_order},
            {"t_panels", q.t_panels},
            {"fiber_resolution", q.fiber_resolution},
            {"ray_rtol", q.ray_rtol},
            {"threads", q.threads}};
  if (!q.base_resolution.empty()) quad["base_resolution"] = q.base_resolution;
  if (q.monte_carlo_samples) quad["monte_carlo_samples"] = *q.monte_carlo_samples;
  j["quadrature"] = quad;
  json declared = json::object();
  if (sc.validity_radius) declared["validity_radius"] = number_json(*sc.validity_radius);
  if (!sc.known_rho.empty()) {
    json kr = json::object();
    for (const auto& [k, v] : sc.known_rho) kr[std::to_string(k)] = v;
    declared["known_rho"] = kr;
  }
  if (sc.minimal_declared) declared["minimal"] = *sc.minimal_declared;
  if (sc.totally_geodesic_declared) declared["totally_geodesic"] = *sc.totally_geodesic_declared;
  j["declared"] = declared;
  json checks = json::array();
  for (Check c : sc.checks) checks.push_back(to_string(c));
  j["checks"] = checks;
  j["tolerance"] = sc.tolerance;
  j["seed"] = sc.seed;
  j["ray_samples"] = sc.ray_samples;
  j["certification_samples"] = sc.certification_samples;
  if (!sc.lemma_powers.empty()) j["lemma_powers"] = sc.lemma_powers;
  if (sc.hessian_H) j["hessian_H"] = *sc.hessian_H;
  if (sc.volume_inflation != 1.0) j["volume_inflation"] = sc.volume_inflation;
  return j.dump(2) + "\n";
}

}  // namespace tubevol
