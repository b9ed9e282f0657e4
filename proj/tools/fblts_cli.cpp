// fblts: command-line driver for the shallow-water LTS experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fblts/scenario.hpp"

namespace fs = std::filesystem;
using namespace fblts;

namespace {

enum Exit { kOk = 0, kConfig = 2, kAbort = 3 };

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seedSet = false;
};

void add_common(CLI::App *app, Common &c) {
  app->add_option("--config", c.config, "scenario config (JSON)");
  app->add_option("--out", c.out, "output directory");
  app->add_option_function<std::uint64_t>(
      "--seed",
      [&c](std::uint64_t s) {
        c.seed = s;
        c.seedSet = true;
      },
      "random seed");
}

ScenarioConfig config_of(const Common &c) {
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  if (c.seedSet)
    cfg.seed = c.seed;
  return cfg;
}

std::string out_path(const Common &c, const std::string &name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

int cmd_run(const Common &c) {
  ScenarioConfig cfg = config_of(c);
  Setup setup = build_setup(cfg);
  ScenarioResult r = run_scenario(cfg, setup);
  r.record.write_csv(out_path(c, "record.csv"));
  write_state_csv(out_path(c, "state_final.csv"), setup.mesh, r.final,
                  setup.labels ? &*setup.labels : nullptr);
  const RunRow &a = r.record.rows.front(), &b = r.record.rows.back();
  std::ofstream f(out_path(c, "report.csv"));
  f.precision(17);
  f << "metric,value\n"
    << "scheme," << scheme_name(cfg.scheme) << '\n'
    << "steps," << r.steps << '\n'
    << "final_time," << b.t << '\n'
    << "mass_drift," << std::abs(b.mass - a.mass) / std::abs(a.mass) << '\n'
    << "abs_vorticity_change," << b.absVorticity - a.absVorticity << '\n'
    << "fast_cell_evals," << r.work.fastCellEvals << '\n'
    << "fast_edge_evals," << r.work.fastEdgeEvals << '\n'
    << "expected_fast_cell_evals," << r.expectedWork.fastCellEvals << '\n'
    << "expected_fast_edge_evals," << r.expectedWork.fastEdgeEvals << '\n'
    << "counts_match," << (r.work == r.expectedWork ? 1 : 0) << '\n'
    << "wall_s," << r.wallSeconds << '\n';
  std::printf("%s: %ld steps to t=%g s, mass drift %.3e\n",
              scheme_name(cfg.scheme), r.steps, b.t,
              std::abs(b.mass - a.mass) / std::abs(a.mass));
  return kOk;
}

int cmd_converge(const Common &c) {
  ScenarioConfig cfg = config_of(c);
  ConvergenceTable t = convergence_driver(cfg, cfg.convergeDts, cfg.referenceDt);
  t.write_csv(out_path(c, "report.csv"));
  std::printf("%10s %12s %12s %8s %8s %8s %8s\n", "dt", "err_h", "err_u",
              "ord_h", "ord_u", "ordh_if1", "ordu_if1");
  for (const ConvergenceRow &r : t.rows)
    std::printf("%10g %12.4e %12.4e %8.3f %8.3f %8.3f %8.3f%s\n", r.dt,
                r.errH[0], r.errU[0], r.orderH[0], r.orderU[0], r.orderH[2],
                r.orderU[2], r.stable ? "" : "  unstable");
  return kOk;
}

int cmd_cfl(const Common &c) {
  ScenarioConfig cfg = config_of(c);
  CflScan s = cfl_scan(cfg, cfg.scanSchemes);
  s.write_csv(out_path(c, "report.csv"));
  for (const CflRow &r : s.rows)
    std::printf("%-8s max stable dt %10.4g s  (nu %.3f, M %d, %d probes)\n",
                r.scheme.c_str(), r.maxStableDt, r.maxCourant, r.M, r.probes);
  const CflRow *fb = s.find("FBRK32"), *rk = s.find("RK32");
  if (fb && rk)
    std::printf("FBRK32 / RK32 = %.3f\n", fb->maxStableDt / rk->maxStableDt);
  return kOk;
}

int cmd_conserve(const Common &c) {
  ScenarioConfig cfg = config_of(c);
  ConservationReport r = conservation_driver(cfg, cfg.conserveSteps);
  r.write_csv(out_path(c, "report.csv"));
  r.record.write_csv(out_path(c, "record.csv"));
  std::printf("%ld steps: mass %.3e  abs vorticity %.3e  pv volume %.3e\n",
              r.steps, r.massDrift, r.vorticityDrift, r.pvVolumeDrift);
  return kOk;
}

int cmd_perf(const Common &c) {
  ScenarioConfig cfg = config_of(c);
  PerfTable t = perf_driver(cfg);
  t.write_csv(out_path(c, "report.csv"));
  for (const PerfRow &r : t.rows)
    std::printf("%-7s dt %-8g steps %-6ld wall %8.4f s  cell evals %-10llu "
                "%s  x%.2f vs RK4  x%.2f vs FBRK32 fine\n",
                r.scheme.c_str(), r.dt, r.steps, r.wallSeconds,
                static_cast<unsigned long long>(r.measured.fastCellEvals),
                r.measured == r.expected ? "(model ok)" : "(MODEL MISMATCH)",
                r.speedupVsRk4, r.speedupVsFineFbrk);
  return kOk;
}

struct MeshGen {
  Index nx = 32, ny = 32;
  double dc = 10e3, depth = 1000.0, f0 = 0.0;
  std::string file = "mesh.json";
};

int cmd_mesh_gen(const Common &c, const MeshGen &g) {
  Index nx = g.nx, ny = g.ny;
  double dc = g.dc, depth = g.depth, f0 = g.f0;
  if (!c.config.empty()) {
    ScenarioConfig cfg = config_of(c);
    nx = cfg.mesh.nx;
    ny = cfg.mesh.ny;
    dc = cfg.mesh.dc;
    depth = cfg.initial.H;
    f0 = cfg.f0;
  }
  Mesh m = build_periodic_hex_mesh(nx, ny, dc, depth);
  m.coriolisVertex.assign(m.nVertices, f0);
  std::string path = out_path(c, g.file);
  save_mesh(m, path);
  std::printf("wrote %s (%d cells, %d edges, %d vertices)\n", path.c_str(),
              m.nCells, m.nEdges, m.nVertices);
  return kOk;
}

int cmd_mesh_check(const std::string &path) {
  Mesh m = load_mesh(path);
  ValidationReport rep = validate_mesh(m);
  for (const InvariantCheck &ch : rep.checks)
    std::printf("%-12s %s  worst %.3e at %d\n", ch.name.c_str(),
                ch.passed ? "ok  " : "FAIL", ch.worstMagnitude, ch.worstIndex);
  std::printf("%d cells, %d edges, %d vertices\n", m.nCells, m.nEdges,
              m.nVertices);
  return rep.all_passed() ? kOk : kConfig;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"FB-LTS shallow-water solver"};
  app.require_subcommand(1);
  Common common;

  auto *run = app.add_subcommand("run", "run one scenario");
  auto *conv = app.add_subcommand("converge", "temporal convergence study");
  auto *cfl = app.add_subcommand("cfl-scan", "maximum stable time steps");
  auto *cons = app.add_subcommand("conserve", "conservation soak");
  auto *perf = app.add_subcommand("perf", "work and wall-time comparison");
  for (auto *s : {run, conv, cfl, cons, perf})
    add_common(s, common);

  auto *mesh = app.add_subcommand("mesh", "mesh utilities");
  mesh->require_subcommand(1);
  MeshGen gen;
  auto *mgen = mesh->add_subcommand("gen", "write a periodic hex mesh");
  add_common(mgen, common);
  mgen->add_option("--nx", gen.nx, "cells per row");
  mgen->add_option("--ny", gen.ny, "rows (even)");
  mgen->add_option("--dc", gen.dc, "cell-center spacing (m)");
  mgen->add_option("--depth", gen.depth, "resting depth (m)");
  mgen->add_option("--f0", gen.f0, "Coriolis parameter (1/s)");
  mgen->add_option("--file", gen.file, "file name inside --out");
  std::string checkPath;
  auto *mcheck = mesh->add_subcommand("check", "validate a mesh file");
  mcheck->add_option("path", checkPath, "mesh JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run)
      return cmd_run(common);
    if (*conv)
      return cmd_converge(common);
    if (*cfl)
      return cmd_cfl(common);
    if (*cons)
      return cmd_conserve(common);
    if (*perf)
      return cmd_perf(common);
    if (*mgen)
      return cmd_mesh_gen(common, gen);
    if (*mcheck)
      return cmd_mesh_check(checkPath);
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const MeshError &e) {
    std::fprintf(stderr, "mesh error in %s[%d]: %s\n", e.field().c_str(),
                 e.index(), e.what());
    return kConfig;
  } catch (const RunAbort &e) {
    std::fprintf(stderr, "aborted at %s\n", e.what());
    return kAbort;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kAbort;
  }
  return kOk;
}
