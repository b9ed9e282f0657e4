#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fblts/scenario.hpp"
#include "helpers.hpp"

using namespace fblts;
using namespace testing;

namespace {

ScenarioConfig small(Scheme scheme = Scheme::FBLTS) {
  ScenarioConfig c;
  c.mesh.nx = c.mesh.ny = 16;
  c.mesh.dc = 10e3;
  c.fine.radius = 30e3;
  c.scheme = scheme;
  c.dt = 60.0;
  c.M = 4;
  c.duration = 600.0;
  return c;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("config parsing") {
  ScenarioConfig c = parse_config(R"({"scheme": "fb-rk32", "dt": 30, "M": 2,
    "mesh": {"nx": 8, "ny": 8, "dc": 5000}, "physics": {"rotation": true, "f0": 1e-4},
    "fine": {"kind": "fraction", "fraction": 0.2}, "steps": 10})");
  CHECK(c.scheme == Scheme::FBRK32);
  CHECK(c.M == 2);
  CHECK(c.mesh.nx == 8);
  CHECK(c.physics.rotationOn);
  CHECK(c.f0 == 1e-4);
  CHECK(c.fine.kind == FineMaskSpec::Kind::Fraction);
  CHECK(c.steps() == 10);

  CHECK_THROWS_AS(parse_config(R"({"dtt": 30})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mesh": {"nx": "eight"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "euler"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"scheme": "fblts", "fine": {"kind": "none"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dt": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);

  ScenarioConfig odd = small();
  odd.duration = 130.0;
  CHECK_THROWS_AS(odd.steps(), ConfigError);
}

TEST_CASE("a flat state at rest stays put under every scheme") {
  for (Scheme s : {Scheme::RK4, Scheme::FBRK32, Scheme::FBLTS}) {
    ScenarioConfig c = small(s);
    c.initial.amplitude = 0.0;
    ScenarioResult r = run_scenario(c);
    Setup base = build_setup(c);
    CHECK(r.final.h == base.initial.h);
    CHECK(r.final.u == base.initial.u);
    CHECK(r.record.rows.front().mass == r.record.rows.back().mass);
  }
}

TEST_CASE("RK4 conserves mass at moderate Courant number") {
  ScenarioConfig c = small(Scheme::RK4);
  c.dt = 100.0;
  c.duration = 2000.0;
  Setup setup = build_setup(c);
  CourantResult cr = courant_number(setup.mesh, setup.initial, c.physics.g, c.dt);
  CHECK(cr.nu > 0.2);
  CHECK(cr.nu < 0.4);
  ScenarioResult r = run_scenario(c, setup);
  double m0 = r.record.rows.front().mass, worst = 0.0;
  for (const auto &row : r.record.rows)
    worst = std::max(worst, std::abs(row.mass - m0) / m0);
  CHECK(worst <= 1e-12);
}

TEST_CASE("FB-LTS with one subcycle matches FB-RK(3,2)") {
  ScenarioConfig c = small();
  c.M = 1;
  c.physics.rotationOn = true;
  c.f0 = 1e-4;
  ScenarioResult a = run_scenario(c);
  c.scheme = Scheme::FBRK32;
  ScenarioResult b = run_scenario(c);
  CHECK(max_rel_diff(a.final.h, b.final.h) <= 1e-13);
  CHECK(max_rel_diff(a.final.u, b.final.u) <= 1e-13);
}

TEST_CASE("measured work matches the closed form") {
  for (bool split : {false, true}) {
    ScenarioConfig c = small();
    c.splitting = split;
    c.physics.dragCoefficient = 1e-3;
    ScenarioResult r = run_scenario(c);
    CHECK(r.work == r.expectedWork);
    CHECK(r.steps == 10);
  }
}

TEST_CASE("convergence driver shows second order") {
  ScenarioConfig c = small();
  c.physics.advection = false;
  c.duration = 1200.0;
  ConvergenceTable t = convergence_driver(c, {120.0, 60.0, 30.0}, 3.0);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.referenceDt == 3.0);
  CHECK(std::isnan(t.rows[0].orderH[0]));
  for (std::size_t r = 1; r < 3; ++r) {
    CHECK(t.rows[r].stable);
    CHECK(t.rows[r].orderH[0] > 1.7);
    CHECK(t.rows[r].orderU[0] > 1.7);
  }
  CHECK_THROWS_AS(convergence_driver(c, {120.0, 60.0}, 30.0), ConfigError);
}

TEST_CASE("stability predicate") {
  ScenarioConfig c = small();
  c.scanSteps = 50;
  Setup setup = build_setup(c);
  CHECK(is_stable(c, setup, "FBRK32", 10.0, 1));
  CHECK(is_stable(c, setup, "FBLTS", 40.0, 4));
  CHECK_FALSE(is_stable(c, setup, "RK4", 5000.0, 1));
}

TEST_CASE("conservation driver on a flow at rest") {
  ScenarioConfig c = small();
  c.initial.amplitude = 0.0;
  c.physics.rotationOn = true;
  c.f0 = 1e-4;
  ConservationReport rep = conservation_driver(c, 20);
  CHECK(rep.steps == 20);
  CHECK(rep.massDrift == 0.0);
  CHECK(rep.vorticityDrift == 0.0);
  CHECK(rep.diagnosticGap == 0.0);
}

TEST_CASE("outputs are reproducible") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "fblts_harness_test";
  fs::create_directories(dir);
  ScenarioConfig c = small();
  c.initial.velocityNoise = 0.05;
  c.seed = 7;
  auto once = [&](const std::string &tag) {
    Setup setup = build_setup(c);
    ScenarioResult r = run_scenario(c, setup);
    r.record.write_csv((dir / ("rec" + tag + ".csv")).string(), false);
    write_state_csv((dir / ("st" + tag + ".csv")).string(), setup.mesh, r.final,
                    setup.labels ? &*setup.labels : nullptr);
  };
  once("a");
  once("b");
  CHECK(slurp(dir / "reca.csv") == slurp(dir / "recb.csv"));
  CHECK(slurp(dir / "sta.csv") == slurp(dir / "stb.csv"));
  CHECK(slurp(dir / "sta.csv").rfind("kind,index,x,y,h,u,region", 0) == 0);

  c.seed = 8;
  once("c");
  CHECK(slurp(dir / "sta.csv") != slurp(dir / "stc.csv"));
  fs::remove_all(dir);
}
