#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "fblts/scenario.hpp"

namespace fblts {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string &path) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  return f;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Index sets for the region-restricted errors: all, fine, IF1, coarse.
struct Subsets {
  std::array<std::vector<Index>, 4> cells, edges;
};

Subsets region_subsets(const Mesh &m, const LTSLabels &L) {
  Subsets s;
  auto bucket = [](Region r) {
    int c = region_class(r);
    return c == 0 ? 1 : c == 1 ? 2 : 3;
  };
  for (Index i = 0; i < m.nCells; ++i) {
    s.cells[0].push_back(i);
    s.cells[bucket(L.cellRegion[i])].push_back(i);
  }
  for (Index e = 0; e < m.nEdges; ++e) {
    s.edges[0].push_back(e);
    s.edges[bucket(L.edgeRegion[e])].push_back(e);
  }
  return s;
}

std::string key_of(const std::string &s) {
  std::string r;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      r += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

double max_abs(const std::vector<double> &v) {
  double r = 0.0;
  for (double x : v)
    r = std::max(r, std::abs(x));
  return r;
}

} // namespace

// ---------------------------------------------------------------------------

ConvergenceTable convergence_driver(const ScenarioConfig &cfg,
                                    const std::vector<double> &dts,
                                    double referenceDt) {
  if (dts.empty())
    throw ConfigError("convergence needs at least one dt");
  for (double dt : dts)
    if (!(dt > 0.0))
      throw ConfigError("convergence dts must be positive");
  const double dtMin = *std::min_element(dts.begin(), dts.end());
  if (referenceDt == 0.0)
    referenceDt = dtMin / 10.0;
  if (!(referenceDt > 0.0) || referenceDt > dtMin / 8.0 * (1.0 + 1e-12))
    throw ConfigError("reference dt must not exceed min(dt)/8");

  ScenarioConfig base = cfg;
  base.scheme = Scheme::FBLTS;
  base.trackVorticity = false;
  Setup setup = build_setup(base);

  // The reference is unsplit: a split reference would carry the splitting
  // error of its own step.
  ScenarioConfig ref = base;
  ref.scheme = Scheme::RK4;
  ref.dt = referenceDt;
  ref.splitting = false;
  ScenarioResult refRun = run_scenario(ref, setup);

  Subsets sub = region_subsets(setup.mesh, *setup.labels);
  ConvergenceTable table;
  table.referenceDt = referenceDt;
  for (double dt : dts) {
    ConvergenceRow row;
    row.dt = dt;
    ScenarioConfig c = base;
    c.dt = dt;
    try {
      ScenarioResult r = run_scenario(c, setup);
      for (int k = 0; k < 4; ++k) {
        row.errH[k] = rms_error(r.final.h, refRun.final.h, sub.cells[k]);
        row.errU[k] = rms_error(r.final.u, refRun.final.u, sub.edges[k]);
      }
    } catch (const RunAbort &) {
      row.stable = false;
      row.errH.fill(kNaN);
      row.errU.fill(kNaN);
    }
    row.orderH.fill(kNaN);
    row.orderU.fill(kNaN);
    if (!table.rows.empty()) {
      const ConvergenceRow &prev = table.rows.back();
      double lr = std::log(prev.dt / dt);
      for (int k = 0; k < 4; ++k) {
        row.orderH[k] = std::log(prev.errH[k] / row.errH[k]) / lr;
        row.orderU[k] = std::log(prev.errU[k] / row.errU[k]) / lr;
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

void ConvergenceTable::write_csv(const std::string &path) const {
  std::ofstream f = open_out(path);
  static const char *names[4] = {"all", "fine", "if1", "coarse"};
  f << "dt,stable";
  for (const char *q : {"err_h", "err_u", "order_h", "order_u"})
    for (const char *n : names)
      f << ',' << q << '_' << n;
  f << ",reference_dt\n";
  for (const ConvergenceRow &r : rows) {
    f << num(r.dt) << ',' << (r.stable ? 1 : 0);
    for (const auto *a : {&r.errH, &r.errU, &r.orderH, &r.orderU})
      for (double x : *a)
        f << ',' << num(x);
    f << ',' << num(referenceDt) << '\n';
  }
}

// ---------------------------------------------------------------------------

bool is_stable(const ScenarioConfig &cfg, const Setup &setup,
               const std::string &scheme, double dt, int M) {
  const Mesh &m = setup.mesh;
  const PhysicsConfig &p = cfg.physics;
  const std::string k = key_of(scheme);

  double Hmin = *std::min_element(m.restingDepth.begin(), m.restingDepth.end());
  double uRef = std::max(max_abs(setup.initial.u),
                         std::abs(cfg.initial.amplitude) * std::sqrt(p.g / Hmin));
  const double limit = uRef > 0.0 ? cfg.scanGrowth * uRef
                                   : std::numeric_limits<double>::infinity();

  ShallowWaterSystem sys(m, p);
  std::optional<FbltsStepper> lts;
  if (k == "FBLTS") {
    if (!setup.labels)
      throw ConfigError("FBLTS scan needs a fine region");
    lts.emplace(sys, *setup.labels, LTSConfig{dt, M, cfg.weights}, cfg.extents);
  } else if (k != "RK32" && k != "FBRK32" && k != "RK4") {
    throw ConfigError("unknown scan scheme '" + scheme + "'");
  }

  State s = setup.initial;
  try {
    for (int n = 0; n < cfg.scanSteps; ++n) {
      SlowCache cache;
      if (cfg.splitting) {
        cache = freeze_slow(m, s, p);
        sys.set_frozen(&cache);
      }
      if (lts)
        s = lts->step(s);
      else if (k == "RK4")
        s = rk4_step(sys, s, dt);
      else
        s = fbrk32_step(sys, s, dt,
                        k == "RK32" ? FBWeights::zero() : cfg.weights);
      sys.set_frozen(nullptr);
      for (double h : s.h)
        if (!std::isfinite(h))
          return false;
      for (double u : s.u)
        if (!std::isfinite(u) || std::abs(u) > limit)
          return false;
    }
  } catch (const PositivityError &) {
    return false;
  }
  return true;
}

namespace {

struct Bisection {
  double lo = 0.0, hi = 0.0;
  int probes = 0;
};

// Largest stable dt of a predicate that is stable for small dt.
template <class Pred>
Bisection bisect(Pred stable, double guess, double relWidth) {
  Bisection b;
  auto probe = [&](double dt) {
    ++b.probes;
    return stable(dt);
  };
  if (probe(guess)) {
    b.lo = guess;
    b.hi = 2.0 * guess;
    for (int i = 0; i < 60 && probe(b.hi); ++i) {
      b.lo = b.hi;
      b.hi *= 2.0;
    }
  } else {
    b.hi = guess;
    b.lo = 0.5 * guess;
    for (int i = 0; i < 60 && !probe(b.lo); ++i) {
      b.hi = b.lo;
      b.lo *= 0.5;
    }
  }
  while ((b.hi - b.lo) > relWidth * b.hi) {
    double mid = 0.5 * (b.lo + b.hi);
    (probe(mid) ? b.lo : b.hi) = mid;
  }
  return b;
}

} // namespace

CflScan cfl_scan(const ScenarioConfig &cfg,
                 const std::vector<std::string> &schemes) {
  ScenarioConfig base = cfg;
  bool wantLts = std::any_of(schemes.begin(), schemes.end(),
                             [](const std::string &s) {
                               return key_of(s) == "FBLTS";
                             });
  if (!wantLts && base.scheme == Scheme::FBLTS)
    base.scheme = Scheme::FBRK32;
  Setup setup = build_setup(base);
  const Mesh &m = setup.mesh;
  double hMax = *std::max_element(setup.initial.h.begin(), setup.initial.h.end());
  double dMin = *std::min_element(m.dEdge.begin(), m.dEdge.end());
  const double guess = 0.5 * dMin / std::sqrt(cfg.physics.g * hMax);

  CflScan scan;
  for (const std::string &name : schemes) {
    CflRow row;
    row.scheme = name;
    if (key_of(name) == "FBLTS") {
      // Fine step first (M = 1 puts every region on it), then the largest
      // subcycle count whose coarse step M * tau stays stable.
      Bisection b = bisect(
          [&](double dt) { return is_stable(base, setup, name, dt, 1); },
          guess, cfg.scanRelWidth);
      row.fineDt = b.lo;
      row.probes = b.probes;
      row.M = 1;
      row.frontier.emplace_back(1, true);
      for (int M = 2; M <= cfg.scanMaxM; ++M) {
        ++row.probes;
        bool ok = is_stable(base, setup, name, M * b.lo, M);
        row.frontier.emplace_back(M, ok);
        if (!ok)
          break;
        row.M = M;
      }
      row.maxStableDt = row.M * b.lo;
      row.firstUnstableDt = row.M == cfg.scanMaxM ? kNaN : (row.M + 1) * b.lo;
    } else {
      Bisection b = bisect(
          [&](double dt) { return is_stable(base, setup, name, dt, 1); },
          guess, cfg.scanRelWidth);
      row.maxStableDt = b.lo;
      row.firstUnstableDt = b.hi;
      row.probes = b.probes;
    }
    row.maxCourant =
        courant_number(m, setup.initial, cfg.physics.g, row.maxStableDt).nu;
    scan.rows.push_back(row);
  }
  return scan;
}

const CflRow *CflScan::find(const std::string &scheme) const {
  for (const CflRow &r : rows)
    if (r.scheme == scheme)
      return &r;
  return nullptr;
}

void CflScan::write_csv(const std::string &path) const {
  std::ofstream f = open_out(path);
  f << "scheme,max_stable_dt,first_unstable_dt,max_courant,M,fine_dt,probes,"
       "frontier\n";
  for (const CflRow &r : rows) {
    f << r.scheme << ',' << num(r.maxStableDt) << ',' << num(r.firstUnstableDt)
      << ',' << num(r.maxCourant) << ',' << r.M << ',' << num(r.fineDt) << ','
      << r.probes << ',';
    for (std::size_t i = 0; i < r.frontier.size(); ++i)
      f << (i ? ";" : "") << r.frontier[i].first << ':'
        << (r.frontier[i].second ? "stable" : "unstable");
    f << '\n';
  }
  const CflRow *fb = find("FBRK32"), *rk = find("RK32");
  if (fb && rk && rk->maxStableDt > 0.0)
    f << "ratio_FBRK32_RK32," << num(fb->maxStableDt / rk->maxStableDt)
      << ",,,,,,\n";
}

// ---------------------------------------------------------------------------

namespace {

// Time steps as integer microseconds, for the common simulated duration.
long long ticks(double dt) {
  double t = dt * 1e6;
  long long n = std::llround(t);
  if (n <= 0 || std::abs(t - n) > 1e-6 * std::max(1.0, t))
    throw ConfigError("perf time steps must be whole microseconds");
  return n;
}

} // namespace

PerfTable perf_driver(const ScenarioConfig &cfg) {
  ScenarioConfig base = cfg;
  base.scheme = Scheme::FBLTS;
  base.trackVorticity = false;
  Setup setup = build_setup(base);

  const double fineDt = cfg.dt / cfg.M;
  const double rk4Dt = cfg.perfRk4Dt > 0.0 ? cfg.perfRk4Dt : fineDt;
  struct Plan {
    std::string name;
    Scheme scheme;
    double dt;
    int M;
  };
  std::vector<Plan> plans{{"RK4", Scheme::RK4, rk4Dt, 1},
                          {"FBRK32", Scheme::FBRK32, fineDt, 1},
                          {"FBLTS", Scheme::FBLTS, cfg.dt, cfg.M}};

  long long l = 1;
  for (const Plan &p : plans)
    l = std::lcm(l, ticks(p.dt));
  const double lcmSeconds = l * 1e-6;
  const double reps = std::max(1.0, std::ceil(cfg.duration / lcmSeconds - 1e-9));

  PerfTable table;
  table.duration = reps * lcmSeconds;
  for (const Plan &p : plans) {
    ScenarioConfig c = base;
    c.scheme = p.scheme;
    c.dt = p.dt;
    c.M = p.M;
    c.duration = static_cast<double>(reps) * static_cast<double>(l) /
                 static_cast<double>(ticks(p.dt)) * p.dt;
    PerfRow row;
    row.scheme = p.name;
    row.dt = p.dt;
    row.M = p.M;
    row.wallSeconds = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < cfg.perfRepeats; ++rep) {
      ScenarioResult r = run_scenario(c, setup);
      row.steps = r.steps;
      row.measured = r.work;
      row.expected = r.expectedWork;
      row.wallSeconds = std::min(row.wallSeconds, r.wallSeconds);
    }
    table.rows.push_back(row);
  }
  const PerfRow &rk4 = table.rows[0], &fb = table.rows[1];
  for (PerfRow &r : table.rows) {
    r.speedupVsRk4 = r.wallSeconds > 0.0 && rk4.wallSeconds > 0.0
                         ? speedup(rk4.wallSeconds, r.wallSeconds)
                         : kNaN;
    r.speedupVsFineFbrk = r.wallSeconds > 0.0 && fb.wallSeconds > 0.0
                              ? speedup(fb.wallSeconds, r.wallSeconds)
                              : kNaN;
    r.cellEvalRatioVsFineFbrk =
        static_cast<double>(fb.measured.fastCellEvals) /
        static_cast<double>(r.measured.fastCellEvals);
  }
  return table;
}

const PerfRow *PerfTable::find(const std::string &scheme) const {
  for (const PerfRow &r : rows)
    if (r.scheme == scheme)
      return &r;
  return nullptr;
}

void PerfTable::write_csv(const std::string &path) const {
  std::ofstream f = open_out(path);
  f << "scheme,dt,M,steps,duration,wall_s,fast_cell_evals,fast_edge_evals,"
       "slow_cell_evals,slow_edge_evals,expected_fast_cell_evals,"
       "expected_fast_edge_evals,expected_slow_cell_evals,"
       "expected_slow_edge_evals,counts_match,speedup_vs_rk4,"
       "speedup_vs_fbrk32_fine,cell_eval_ratio_vs_fbrk32_fine\n";
  for (const PerfRow &r : rows) {
    const WorkCounters &a = r.measured, &b = r.expected;
    f << r.scheme << ',' << num(r.dt) << ',' << r.M << ',' << r.steps << ','
      << num(duration) << ',' << num(r.wallSeconds) << ',' << a.fastCellEvals
      << ',' << a.fastEdgeEvals << ',' << a.slowCellEvals << ','
      << a.slowEdgeEvals << ',' << b.fastCellEvals << ',' << b.fastEdgeEvals
      << ',' << b.slowCellEvals << ',' << b.slowEdgeEvals << ','
      << (a == b ? 1 : 0) << ',' << num(r.speedupVsRk4) << ','
      << num(r.speedupVsFineFbrk) << ',' << num(r.cellEvalRatioVsFineFbrk)
      << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

double drift(const RunRecord &rec, double RunRow::*field, double scale) {
  const double x0 = rec.rows.front().*field;
  double worst = 0.0;
  for (const RunRow &r : rec.rows)
    worst = std::max(worst, std::abs(r.*field - x0));
  return scale > 0.0 ? worst / scale : worst;
}

} // namespace

ConservationReport conservation_driver(const ScenarioConfig &cfg, int nSteps) {
  if (nSteps < 0)
    throw ConfigError("conservation needs a non-negative step count");
  ScenarioConfig c = cfg;
  c.duration = nSteps * c.dt;
  c.trackVorticity = true;
  Setup setup = build_setup(c);
  ScenarioResult r = run_scenario(c, setup);
  const Mesh &m = setup.mesh;

  // Relative to the initial total, or to the total absolute value when the
  // integral itself starts at zero.
  std::vector<double> eta0 =
      vorticity_fields(m, c.physics, setup.initial.u, setup.initial.h).eta;
  double etaScale = 0.0;
  for (Index v = 0; v < m.nVertices; ++v)
    etaScale += m.areaDual[v] * std::abs(eta0[v]);
  const RunRow &first = r.record.rows.front();
  auto scale_of = [&](double x0) {
    return std::abs(x0) > 0.0 ? std::abs(x0) : etaScale;
  };

  ConservationReport rep;
  rep.steps = r.steps;
  rep.massDrift = drift(r.record, &RunRow::mass, std::abs(first.mass));
  rep.vorticityDrift =
      drift(r.record, &RunRow::absVorticity, scale_of(first.absVorticity));
  rep.pvVolumeDrift =
      drift(r.record, &RunRow::pvVolume, scale_of(first.pvVolume));
  PvVolume pv = total_pv_volume(m, r.final.h, r.eta);
  double s = scale_of(pv.viaEta);
  rep.pvIdentityGap = s > 0.0 ? std::abs(pv.viaPv - pv.viaEta) / s : 0.0;
  std::vector<double> etaDiag =
      vorticity_fields(m, c.physics, r.final.u, r.final.h).eta;
  for (Index v = 0; v < m.nVertices; ++v)
    rep.diagnosticGap =
        std::max(rep.diagnosticGap, std::abs(r.eta[v] - etaDiag[v]));
  rep.record = std::move(r.record);
  return rep;
}

void ConservationReport::write_csv(const std::string &path) const {
  std::ofstream f = open_out(path);
  f << "metric,value\n";
  f << "steps," << steps << '\n';
  f << "mass_drift," << num(massDrift) << '\n';
  f << "abs_vorticity_drift," << num(vorticityDrift) << '\n';
  f << "pv_volume_drift," << num(pvVolumeDrift) << '\n';
  f << "pv_identity_gap," << num(pvIdentityGap) << '\n';
  f << "prognostic_diagnostic_eta_gap," << num(diagnosticGap) << '\n';
}

} // namespace fblts
