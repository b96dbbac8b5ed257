#include "doctest.h"

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tubevol");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = tubevol::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tubevol_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

// value column of the row for radius r in volume csv output
double volume_at(const std::string& csv, const std::string& r) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() > 2 && std::stod(cells[1]) == std::stod(r)) return std::stod(cells[2]);
  }
  FAIL("no row for r=" << r);
  return 0.0;
}

}  // namespace

TEST_CASE("scenarios lists the catalogue") {
  const Run r = run({"scenarios"});
  CHECK(r.code == 0);
  CHECK(r.out.find("flat_t4_circle") != std::string::npos);
  CHECK(r.out.find("bump_torus") != std::string::npos);
  const Run csv = run({"scenarios", "--format", "csv"});
  CHECK(csv.out.rfind("name,checks,description\n", 0) == 0);
  const Run json = run({"scenarios", "--format", "json"});
  CHECK(json.out.front() == '[');
}

TEST_CASE("volume of a flat circle tube") {
  const Run r = run({"volume", "--scenario", "flat_t4_circle", "--radii", "0:0.5:2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("scenario,r,value,", 0) == 0);
  CHECK(volume_at(r.out, "0") == 0.0);
  CHECK(volume_at(r.out, "0.5") == doctest::Approx(std::numbers::pi * std::numbers::pi / 3).epsilon(1e-8));

  const fs::path dir = scratch("volume");
  const Run w = run({"volume", "--scenario", "flat_t4_circle", "--radii", "0.5:0.5:1", "--out", dir.string(),
                     "--format", "json"});
  CHECK(w.code == 0);
  CHECK(fs::exists(dir / "flat_t4_circle_volume.json"));
  fs::remove_all(dir);
}

TEST_CASE("usage and config errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"volume"}).code == 2);
  CHECK(run({"volume", "--scenario", "nope"}).code == 2);
  CHECK(run({"volume", "--scenario", "h3_point", "--radii", "1:x:3"}).code == 2);
  CHECK(run({"verify", "nonexistent_suite"}).code == 2);
  CHECK(run({"verify", "--config", "/nonexistent/cfg.json"}).code == 2);

  const fs::path dir = scratch("badcfg");
  write(dir / "bad.json", R"({"extends": "flat_t4_circle", "submanifold": {"raduis": 0.3}})");
  const Run r = run({"verify", "--config", (dir / "bad.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("submanifold.raduis") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("missing output directory exits with 2") {
  const Run r = run({"verify", "--scenario", "h3_point", "--out", "/nonexistent/tubevol/out"});
  CHECK(r.code == 2);
  CHECK(r.err.find("does not exist") != std::string::npos);
}

TEST_CASE("a failing bound exits with 1") {
  const fs::path dir = scratch("inflated");
  write(dir / "inflated.json", R"({"extends": "flat_t4_circle", "name": "inflated", "checks": ["hk_bound"],
                                   "radii": [0.5], "volume_inflation": 1.1})");
  const Run r = run({"verify", "--config", (dir / "inflated.json").string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(fs::exists(dir / "inflated_report.json"));
  CHECK(r.out.find("FAIL") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("precondition violations do not fail the run") {
  const fs::path dir = scratch("focal");
  write(dir / "focal.json", R"({"extends": "flat_t4_circle", "name": "flat_focal", "checks": ["focal"]})");
  const Run r = run({"verify", "--config", (dir / "focal.json").string(), "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("precondition_violation") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("reports are byte-identical across runs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& d : {a, b}) {
    const Run r = run({"verify", "--scenario", "h3_point", "--scenario", "s3_point", "--out", d.string(), "--seed",
                       "17"});
    CHECK(r.code == 0);
  }
  const std::string ra = slurp(a / "custom_report.json");
  CHECK_FALSE(ra.empty());
  CHECK(ra == slurp(b / "custom_report.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}
