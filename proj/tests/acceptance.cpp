// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "fblts/scenario.hpp"
#include "helpers.hpp"

using namespace fblts;
using namespace testing;

namespace {

int failures = 0;

void report(int id, const char *what, bool pass, const std::string &detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, what, detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

std::string fmt(const char *f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a criterion, turning an exception into a FAIL line.
void guarded(int id, const char *what, const std::function<void()> &body) {
  try {
    body();
  } catch (const std::exception &e) {
    report(id, what, false, std::string("exception: ") + e.what());
  }
}

ScenarioConfig base16() {
  ScenarioConfig c;
  c.mesh.nx = c.mesh.ny = 16;
  c.mesh.dc = 10e3;
  c.fine.radius = 30e3;
  c.initial.width = 30e3;
  return c;
}

void m1_reduction() {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c = base16();
  c.physics.rotationOn = true;
  c.f0 = 1e-4;
  c.initial.velocityNoise = 0.05;
  c.M = 1;
  c.dt = 120.0;
  Setup s = build_setup(c);
  ShallowWaterSystem sys(s.mesh, c.physics);
  FbltsStepper lts(sys, *s.labels, LTSConfig{c.dt, 1, c.weights});
  State a = s.initial, b = s.initial;
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    a = lts.step(a);
    b = fbrk32_step(sys, b, c.dt, c.weights);
    worst = std::max({worst, max_rel_diff(a.h, b.h), max_rel_diff(a.u, b.u)});
  }
  double t = seconds_since(t0);
  report(1, "M=1 reduction", worst <= 1e-13 && t < 5.0,
         fmt("max rel diff %.3e (tol 1e-13), %.2f s", worst, t));
}

void conservation() {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c = base16();
  c.physics.rotationOn = true;
  c.f0 = 1e-4;
  c.M = 4;
  c.dt = 120.0;
  ConservationReport r = conservation_driver(c, 200);
  double t = seconds_since(t0);
  report(2, "mass conservation", r.massDrift <= 1e-12 && t < 30.0,
         fmt("drift %.3e over %ld steps (tol 1e-12), %.2f s", r.massDrift,
             r.steps, t));
  report(3, "absolute vorticity conservation", r.vorticityDrift <= 1e-12,
         fmt("drift %.3e (tol 1e-12), pv volume drift %.3e", r.vorticityDrift,
             r.pvVolumeDrift));
}

void temporal_order() {
  auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig c;
  c.mesh.nx = c.mesh.ny = 32;
  c.mesh.dc = 10e3;
  c.fine.radius = 50e3;
  c.initial.width = 30e3;
  c.physics.advection = false;
  c.M = 4;
  c.duration = 3000.0;
  ConvergenceTable t = convergence_driver(c, {150.0, 75.0, 37.5, 18.75}, 0.0);
  const ConvergenceRow &last = t.rows.back();
  auto in = [](double x) { return x >= 1.8 && x <= 2.2; };
  bool pass = in(last.orderH[0]) && in(last.orderU[0]) && in(last.orderH[2]) &&
              in(last.orderU[2]);
  double s = seconds_since(t0);
  report(4, "temporal order", pass && s < 120.0,
         fmt("h %.3f u %.3f, IF1 h %.3f u %.3f (range [1.8, 2.2]), %.1f s",
             last.orderH[0], last.orderU[0], last.orderH[2], last.orderU[2], s));
}

// Largest difference between the predictions applied on IF1 in one FB-LTS
// step and the stage values of M global fine FB-RK(3,2) steps.
double prediction_gap(const Setup &s, const PhysicsConfig &p, double dt, int M) {
  ShallowWaterSystem sys(s.mesh, p);
  FbltsStepper lts(sys, *s.labels, LTSConfig{dt, M, FBWeights{}});
  FbltsStepRecord rec;
  rec.keepPredictions = true;
  (void)lts.step(s.initial, &rec);
  const auto &cells = lts.extents().if1Cells;
  const auto &edges = lts.extents().if1Edges;

  InterfaceCache probe;
  (void)lts.coarse_advance(s.initial, probe);
  double gap = 0.0;
  auto cmp = [&](const std::vector<double> &pred, const std::vector<double> &ref,
                 const std::vector<Index> &idx) {
    for (std::size_t j = 0; j < idx.size(); ++j)
      gap = std::max(gap, std::abs(pred[j] - ref[idx[j]]));
  };
  if (probe.cells != cells || probe.edges != edges)
    throw std::logic_error("interface cache order differs from the extents");

  State fine = s.initial;
  for (int k = 0; k < M; ++k) {
    const InterfacePrediction &pk = rec.predictions.at(k);
    cmp(pk.h, fine.h, cells);
    cmp(pk.u, fine.u, edges);
    Fbrk32Stages st;
    fine = fbrk32_step(sys, fine, dt / M, FBWeights{}, &st);
    cmp(pk.h13, st.h1, cells);
    cmp(pk.u13, st.u1, edges);
    cmp(pk.h12, st.h2, cells);
    cmp(pk.u12, st.u2, edges);
    cmp(pk.hNext, st.h3, cells);
  }
  return gap;
}

void prediction_order() {
  ScenarioConfig c = base16();
  c.physics.rotationOn = true;
  c.f0 = 1e-4;
  c.initial.velocityNoise = 0.0;
  Setup s = build_setup(c);
  const double dt = 240.0;
  const int M = 4;
  double g1 = prediction_gap(s, c.physics, dt, M);
  double g2 = prediction_gap(s, c.physics, dt / 2, M);
  double ratio = g1 / g2;
  report(5, "prediction second order", ratio >= 3.4 && ratio <= 4.6,
         fmt("gap %.3e -> %.3e, ratio %.3f (range [3.4, 4.6])", g1, g2, ratio));
}

void operators() {
  Mesh m = build_periodic_hex_mesh(16, 16, 10e3);
  // Entries l_f w_ef of the dense operator, summed over repeated neighbours.
  std::map<std::pair<Index, Index>, double> A;
  for (Index e = 0; e < m.nEdges; ++e) {
    auto nb = m.edgesOnEdge[e];
    auto w = m.perpWeights[e];
    for (std::size_t j = 0; j < nb.size(); ++j)
      A[{e, nb[j]}] += m.lEdge[nb[j]] * w[j];
  }
  double anti = 0.0, big = 0.0;
  for (const auto &[key, value] : A) {
    auto it = A.find({key.second, key.first});
    double back = it == A.end() ? 0.0 : it->second;
    anti = std::max(anti, std::abs(value + back));
    big = std::max(big, std::abs(value));
  }
  anti /= big;

  double consistency = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto F = random_field(m.nEdges, 500 + k);
    auto Fp = perp_flux(m, F);
    auto div = thickness_tendency(m, F, std::vector<double>(m.nCells, 1.0));
    auto lhs = dual_divergence(m, Fp);
    double d = 0.0, scale = 0.0;
    for (Index v = 0; v < m.nVertices; ++v) {
      auto cells = m.cellsOnVertex[v];
      auto kites = m.kiteArea[v];
      double avg = 0.0;
      for (std::size_t j = 0; j < cells.size(); ++j)
        avg += kites[j] * -div[cells[j]];
      avg /= m.areaDual[v];
      d = std::max(d, std::abs(lhs[v] - avg));
      scale = std::max(scale, std::abs(avg));
    }
    consistency = std::max(consistency, d / scale);
  }

  double divergence = 0.0;
  for (int k = 0; k < 20; ++k) {
    State s = random_state(m, 900 + 2 * k, 100.0, 10.0, 1.0);
    auto psi = thickness_tendency(m, s.u, s.h);
    double total = 0.0, scale = 0.0;
    for (Index i = 0; i < m.nCells; ++i) {
      total += m.areaCell[i] * psi[i];
      scale += m.areaCell[i] * std::abs(psi[i]);
    }
    divergence = std::max(divergence, std::abs(total) / scale);
  }
  report(6, "operator correctness",
         anti <= 1e-14 && consistency <= 1e-12 && divergence <= 1e-13,
         fmt("antisymmetry %.2e (1e-14), consistency %.2e over 20 fields "
             "(1e-12), divergence %.2e (1e-13)",
             anti, consistency, divergence));
}

void splitting() {
  ScenarioConfig c = base16();
  c.physics.advection = false;
  c.physics.dragCoefficient = 2e-3;
  c.initial.amplitude = 1.0;
  c.dt = 120.0;
  c.duration = 3600.0;
  c.trackVorticity = false;
  c.splitting = true;
  ScenarioResult a = run_scenario(c);
  c.splitting = false;
  ScenarioResult b = run_scenario(c);
  double rms = rms_error(a.final.h, b.final.h);

  c.physics.dragCoefficient = 0.0;
  c.splitting = true;
  ScenarioResult x = run_scenario(c);
  c.splitting = false;
  ScenarioResult y = run_scenario(c);
  bool bitwise = x.final.h == y.final.h && x.final.u == y.final.u;
  report(7, "splitting fidelity", rms <= 0.01 * c.initial.amplitude && bitwise,
         fmt("rms(h split - unsplit) %.3e m (tol %.3e), slow off bitwise %s",
             rms, 0.01 * c.initial.amplitude, bitwise ? "yes" : "no"));
}

void work() {
  ScenarioConfig c;
  c.mesh.nx = c.mesh.ny = 64;
  c.mesh.dc = 10e3;
  c.fine.kind = FineMaskSpec::Kind::Fraction;
  c.fine.fraction = 0.1;
  c.physics.advection = false;
  c.initial.width = 60e3;
  c.dt = 120.0;
  c.M = 4;
  c.duration = 1200.0;
  c.trackVorticity = false;
  PerfTable t = perf_driver(c);
  bool exact = true;
  for (const auto &r : t.rows)
    exact = exact && r.measured == r.expected;
  const PerfRow *lts = t.find("FBLTS");
  double ratio = lts ? lts->cellEvalRatioVsFineFbrk : 0.0;
  report(8, "work accounting", exact && ratio >= 2.5,
         fmt("counts equal model: %s, cell-eval ratio %.3f (>= 2.5), wall "
             "speedup %.2fx vs fine FB-RK(3,2), %.2fx vs RK4 (reported only)",
             exact ? "yes" : "no", ratio, lts ? lts->speedupVsFineFbrk : 0.0,
             lts ? lts->speedupVsRk4 : 0.0));
}

void cfl() {
  ScenarioConfig c = base16();
  c.physics.advection = false;
  c.initial.velocityNoise = 1e-3;
  c.scanSteps = 200;
  c.scanRelWidth = 0.01;
  CflScan a = cfl_scan(c, {"RK32", "FBRK32"});
  CflScan b = cfl_scan(c, {"RK32", "FBRK32"});
  const CflRow *rk = a.find("RK32"), *fb = a.find("FBRK32");
  bool same = true, narrow = true;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    same = same && a.rows[i].maxStableDt == b.rows[i].maxStableDt &&
           a.rows[i].firstUnstableDt == b.rows[i].firstUnstableDt;
    const CflRow &r = a.rows[i];
    narrow = narrow && r.firstUnstableDt - r.maxStableDt <= 0.01 * r.firstUnstableDt;
  }
  double ratio = fb->maxStableDt / rk->maxStableDt;
  report(9, "CFL behavior", fb->maxStableDt >= rk->maxStableDt && same && narrow,
         fmt("FB-RK(3,2) %.2f s, RK(3,2) %.2f s, ratio %.3f (companion range "
             "1.6-2.2, information only), reproducible %s, width <= 1%% %s",
             fb->maxStableDt, rk->maxStableDt, ratio, same ? "yes" : "no",
             narrow ? "yes" : "no"));
}

} // namespace

int main() {
  guarded(1, "M=1 reduction", m1_reduction);
  guarded(2, "mass conservation", conservation);
  guarded(4, "temporal order", temporal_order);
  guarded(5, "prediction second order", prediction_order);
  guarded(6, "operator correctness", operators);
  guarded(7, "splitting fidelity", splitting);
  guarded(8, "work accounting", work);
  guarded(9, "CFL behavior", cfl);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
