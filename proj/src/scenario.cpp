#include "fblts/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fblts {

using nlohmann::json;

const char *scheme_name(Scheme s) {
  switch (s) {
  case Scheme::RK4:
    return "RK4";
  case Scheme::FBRK32:
    return "FBRK32";
  case Scheme::FBLTS:
    return "FBLTS";
  }
  return "?";
}

namespace {

std::string upper_alnum(const std::string &s) {
  std::string r;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      r += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return r;
}

} // namespace

Scheme parse_scheme(const std::string &s) {
  std::string k = upper_alnum(s);
  if (k == "RK4")
    return Scheme::RK4;
  if (k == "FBRK32")
    return Scheme::FBRK32;
  if (k == "FBLTS")
    return Scheme::FBLTS;
  throw ConfigError("unknown scheme '" + s + "'");
}

long ScenarioConfig::steps() const {
  if (!(dt > 0.0))
    throw ConfigError("dt must be positive");
  if (!(duration >= 0.0))
    throw ConfigError("duration must be non-negative");
  double n = duration / dt;
  long k = std::lround(n);
  if (std::abs(n - k) > 1e-9 * std::max(1.0, n))
    throw ConfigError("duration is not a whole number of steps of dt");
  return k;
}

// ---------------------------------------------------------------------------
// Config parsing. Unknown keys are rejected so typos surface as errors.

namespace {

class Section {
public:
  Section(const json &j, std::string where) : j_(&j), where_(std::move(where)) {
    if (!j.is_object())
      throw ConfigError(where_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions())
      return;
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key()))
        throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

  bool has(const std::string &k) {
    used_.insert(k);
    return j_->contains(k);
  }
  const json &at(const std::string &k) {
    used_.insert(k);
    return j_->at(k);
  }
  std::string path(const std::string &k) const { return where_ + "." + k; }

  template <class T> void get(const std::string &k, T &out) {
    if (!has(k))
      return;
    try {
      out = j_->at(k).get<T>();
    } catch (const json::exception &) {
      throw ConfigError(path(k) + ": wrong type");
    }
  }
  void get_number(const std::string &k, double &out) {
    if (!has(k))
      return;
    if (!j_->at(k).is_number())
      throw ConfigError(path(k) + ": expected a number");
    out = j_->at(k).get<double>();
  }
  void get_point(const std::string &k,
                 std::optional<std::array<double, 2>> &out) {
    if (!has(k))
      return;
    const json &v = j_->at(k);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number())
      throw ConfigError(path(k) + ": expected [x, y]");
    out = std::array<double, 2>{v[0].get<double>(), v[1].get<double>()};
  }

private:
  const json *j_;
  std::string where_;
  std::set<std::string> used_;
};

ExtentPolicy parse_extents(const std::string &s) {
  std::string k = upper_alnum(s);
  if (k == "SHRINKING")
    return ExtentPolicy::Shrinking;
  if (k == "ALLADJACENT")
    return ExtentPolicy::AllAdjacent;
  if (k == "WHOLEFINE")
    return ExtentPolicy::WholeFine;
  throw ConfigError("unknown extent policy '" + s + "'");
}

FineMaskSpec::Kind parse_fine_kind(const std::string &s) {
  std::string k = upper_alnum(s);
  if (k == "NONE")
    return FineMaskSpec::Kind::None;
  if (k == "DISK")
    return FineMaskSpec::Kind::Disk;
  if (k == "FRACTION")
    return FineMaskSpec::Kind::Fraction;
  if (k == "COLUMNS")
    return FineMaskSpec::Kind::Columns;
  throw ConfigError("unknown fine region kind '" + s + "'");
}

void parse_into(const json &doc, ScenarioConfig &c) {
  Section top(doc, "config");
  if (top.has("mesh")) {
    Section s(top.at("mesh"), "mesh");
    s.get("path", c.mesh.path);
    s.get("nx", c.mesh.nx);
    s.get("ny", c.mesh.ny);
    s.get_number("dc", c.mesh.dc);
  }
  if (top.has("initial")) {
    Section s(top.at("initial"), "initial");
    s.get_number("H", c.initial.H);
    s.get_number("amplitude", c.initial.amplitude);
    s.get_number("width", c.initial.width);
    s.get_point("center", c.initial.center);
    s.get_number("velocityNoise", c.initial.velocityNoise);
  }
  if (top.has("physics")) {
    Section s(top.at("physics"), "physics");
    s.get_number("g", c.physics.g);
    s.get("rotation", c.physics.rotationOn);
    s.get_number("f0", c.f0);
    s.get("advection", c.physics.advection);
    s.get_number("drag", c.physics.dragCoefficient);
    s.get_number("wind", c.physics.windCoefficient);
    s.get("windVelocity", c.physics.windVelocity);
  }
  if (top.has("scheme")) {
    std::string name;
    top.get("scheme", name);
    c.scheme = parse_scheme(name);
  }
  top.get_number("dt", c.dt);
  top.get("M", c.M);
  if (top.has("weights")) {
    std::array<double, 3> w{};
    top.get("weights", w);
    c.weights = {w[0], w[1], w[2]};
  }
  if (top.has("extents")) {
    std::string e;
    top.get("extents", e);
    c.extents = parse_extents(e);
  }
  top.get("stencilRadius", c.stencilRadius);
  if (top.has("fine")) {
    Section s(top.at("fine"), "fine");
    if (s.has("kind")) {
      std::string k;
      s.get("kind", k);
      c.fine.kind = parse_fine_kind(k);
    }
    s.get_number("radius", c.fine.radius);
    s.get_number("fraction", c.fine.fraction);
    if (s.has("columns")) {
      std::array<Index, 2> cols{};
      s.get("columns", cols);
      c.fine.col0 = cols[0];
      c.fine.col1 = cols[1];
    }
    s.get_point("center", c.fine.center);
    s.get_number("depthRatio", c.fine.depthRatio);
  }
  top.get("splitting", c.splitting);
  top.get_number("duration", c.duration);
  if (top.has("steps")) {
    long n = 0;
    top.get("steps", n);
    if (n < 0)
      throw ConfigError("config.steps must be non-negative");
    c.duration = n * c.dt;
  }
  if (top.has("seed")) {
    const json &v = top.at("seed");
    if (!v.is_number_unsigned())
      throw ConfigError("config.seed: expected a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  top.get("trackVorticity", c.trackVorticity);
  if (top.has("converge")) {
    Section s(top.at("converge"), "converge");
    s.get("dts", c.convergeDts);
    s.get_number("referenceDt", c.referenceDt);
  }
  if (top.has("cflScan")) {
    Section s(top.at("cflScan"), "cflScan");
    s.get("schemes", c.scanSchemes);
    s.get("steps", c.scanSteps);
    s.get_number("relWidth", c.scanRelWidth);
    s.get_number("growth", c.scanGrowth);
    s.get("maxM", c.scanMaxM);
  }
  if (top.has("conserve")) {
    Section s(top.at("conserve"), "conserve");
    s.get("steps", c.conserveSteps);
  }
  if (top.has("perf")) {
    Section s(top.at("perf"), "perf");
    s.get_number("rk4Dt", c.perfRk4Dt);
    s.get("repeats", c.perfRepeats);
  }
}

void check_config(const ScenarioConfig &c) {
  try {
    c.physics.check();
    c.weights.check();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (c.mesh.path.empty() && (c.mesh.nx < 4 || c.mesh.ny < 4 ||
                              c.mesh.ny % 2 != 0 || !(c.mesh.dc > 0.0)))
    throw ConfigError("mesh: need nx >= 4, even ny >= 4 and dc > 0");
  if (!(c.initial.H > 0.0))
    throw ConfigError("initial.H must be positive");
  if (!(c.initial.width > 0.0))
    throw ConfigError("initial.width must be positive");
  if (!(c.initial.velocityNoise >= 0.0))
    throw ConfigError("initial.velocityNoise must be non-negative");
  if (c.M < 1)
    throw ConfigError("M must be >= 1");
  if (c.stencilRadius < 1)
    throw ConfigError("stencilRadius must be >= 1");
  if (c.scheme == Scheme::FBLTS && c.fine.kind == FineMaskSpec::Kind::None)
    throw ConfigError("scheme FBLTS needs a fine region");
  if (!(c.fine.depthRatio > 0.0))
    throw ConfigError("fine.depthRatio must be positive");
  if (c.fine.kind == FineMaskSpec::Kind::Fraction &&
      !(c.fine.fraction > 0.0 && c.fine.fraction < 1.0))
    throw ConfigError("fine.fraction must lie in (0, 1)");
  if (c.scanSteps < 1 || !(c.scanRelWidth > 0.0) || !(c.scanGrowth > 1.0) ||
      c.scanMaxM < 1)
    throw ConfigError("cflScan: invalid settings");
  if (c.conserveSteps < 0 || c.perfRepeats < 1)
    throw ConfigError("conserve/perf: invalid settings");
  (void)c.steps();
}

} // namespace

ScenarioConfig parse_config(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  parse_into(doc, c);
  check_config(c);
  return c;
}

ScenarioConfig load_config(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------

namespace {

std::array<double, 2> domain_center(const Mesh &m) {
  if (m.periodic())
    return {0.5 * m.xPeriod, 0.5 * m.yPeriod};
  auto [x0, x1] = std::minmax_element(m.xCell.begin(), m.xCell.end());
  auto [y0, y1] = std::minmax_element(m.yCell.begin(), m.yCell.end());
  return {0.5 * (*x0 + *x1), 0.5 * (*y0 + *y1)};
}

double distance(const Mesh &m, double x0, double y0, double x, double y) {
  double dx = periodic_delta(x0, x, m.xPeriod);
  double dy = periodic_delta(y0, y, m.yPeriod);
  return std::hypot(dx, dy);
}

std::vector<bool> fine_mask(const ScenarioConfig &cfg, const Mesh &m) {
  std::vector<bool> mask(m.nCells, false);
  auto c = cfg.fine.center.value_or(domain_center(m));
  switch (cfg.fine.kind) {
  case FineMaskSpec::Kind::None:
    break;
  case FineMaskSpec::Kind::Disk:
    for (Index i = 0; i < m.nCells; ++i)
      mask[i] = distance(m, c[0], c[1], m.xCell[i], m.yCell[i]) <=
                cfg.fine.radius;
    break;
  case FineMaskSpec::Kind::Fraction: {
    std::vector<Index> order(m.nCells);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(m.nCells);
    for (Index i = 0; i < m.nCells; ++i)
      d[i] = distance(m, c[0], c[1], m.xCell[i], m.yCell[i]);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return d[a] < d[b]; });
    auto n = static_cast<std::size_t>(
        std::max<long>(1, std::lround(cfg.fine.fraction * m.nCells)));
    for (std::size_t k = 0; k < n; ++k)
      mask[order[k]] = true;
    break;
  }
  case FineMaskSpec::Kind::Columns: {
    if (!cfg.mesh.path.empty())
      throw ConfigError("fine.columns needs a generated hex mesh");
    for (Index i = 0; i < m.nCells; ++i) {
      Index col = i % cfg.mesh.nx;
      mask[i] = col >= cfg.fine.col0 && col <= cfg.fine.col1;
    }
    break;
  }
  }
  if (cfg.fine.kind != FineMaskSpec::Kind::None &&
      std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    throw ConfigError("fine region selects no cells");
  return mask;
}

} // namespace

Setup build_setup(const ScenarioConfig &cfg) {
  Setup s;
  if (!cfg.mesh.path.empty()) {
    s.mesh = load_mesh(cfg.mesh.path);
    if (cfg.f0 != 0.0)
      s.mesh.coriolisVertex.assign(s.mesh.nVertices, cfg.f0);
  } else {
    s.mesh = build_periodic_hex_mesh(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.dc,
                                     cfg.initial.H);
    s.mesh.coriolisVertex.assign(s.mesh.nVertices, cfg.f0);
  }
  Mesh &m = s.mesh;
  s.fineMask = fine_mask(cfg, m);

  // Deeper (or shallower) water in the fine region, flat free surface.
  if (cfg.fine.depthRatio != 1.0 && cfg.fine.kind != FineMaskSpec::Kind::None) {
    double Hf = cfg.initial.H * cfg.fine.depthRatio;
    double top = std::max(Hf, cfg.initial.H);
    for (Index i = 0; i < m.nCells; ++i) {
      m.restingDepth[i] = s.fineMask[i] ? Hf : cfg.initial.H;
      m.bottomElevation[i] = top - m.restingDepth[i];
    }
  } else if (cfg.mesh.path.empty()) {
    m.restingDepth.assign(m.nCells, cfg.initial.H);
    m.bottomElevation.assign(m.nCells, 0.0);
  }

  auto c = cfg.initial.center.value_or(domain_center(m));
  s.initial.h.resize(m.nCells);
  for (Index i = 0; i < m.nCells; ++i) {
    double r = distance(m, c[0], c[1], m.xCell[i], m.yCell[i]) /
               cfg.initial.width;
    s.initial.h[i] = m.restingDepth[i] + cfg.initial.amplitude * std::exp(-r * r);
  }
  s.initial.u.assign(m.nEdges, 0.0);
  if (cfg.initial.velocityNoise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-cfg.initial.velocityNoise,
                                             cfg.initial.velocityNoise);
    for (double &u : s.initial.u)
      u = U(rng);
  }
  s.initial.t = 0.0;

  if (cfg.fine.kind != FineMaskSpec::Kind::None) {
    try {
      s.labels = label_regions(m, s.fineMask, cfg.stencilRadius);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string("fine region: ") + e.what());
    }
  }
  return s;
}

WorkCounters expected_step_work(const ScenarioConfig &cfg, const Setup &setup) {
  const Mesh &m = setup.mesh;
  WorkCounters w;
  const bool slow = cfg.physics.slow_active();
  switch (cfg.scheme) {
  case Scheme::RK4:
    w.fastCellEvals = 4ull * m.nCells;
    w.fastEdgeEvals = 4ull * m.nEdges;
    break;
  case Scheme::FBRK32:
    w.fastCellEvals = 3ull * m.nCells;
    w.fastEdgeEvals = 3ull * m.nEdges;
    break;
  case Scheme::FBLTS: {
    ShallowWaterSystem sys(m, cfg.physics);
    SlowCache dummy;
    if (cfg.splitting)
      sys.set_frozen(&dummy);
    FbltsStepper st(sys, *setup.labels, LTSConfig{cfg.dt, cfg.M, cfg.weights},
                    cfg.extents);
    w = st.expected_work();
    break;
  }
  }
  if (cfg.scheme != Scheme::FBLTS && slow && !cfg.splitting)
    w.slowEdgeEvals = w.fastEdgeEvals;
  if (cfg.splitting)
    w.slowEdgeEvals = m.nEdges;
  return w;
}

namespace {

std::vector<double> rk4_pv_flux(const Mesh &m, const PhysicsConfig &p,
                                const Rk4Stages &st) {
  static constexpr double wt[4] = {1.0, 2.0, 2.0, 1.0};
  std::vector<double> G(m.nEdges, 0.0);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> g = pv_flux(m, p, st.u[k], st.h[k]);
    for (Index e = 0; e < m.nEdges; ++e)
      G[e] += wt[k] * g[e];
  }
  for (double &x : G)
    x /= 6.0;
  return G;
}

bool all_finite(const State &s) {
  auto fin = [](double x) { return std::isfinite(x); };
  return std::all_of(s.h.begin(), s.h.end(), fin) &&
         std::all_of(s.u.begin(), s.u.end(), fin);
}

std::string describe(const PositivityError &e) {
  std::ostringstream os;
  os << "non-positive " << e.field << " at index " << e.index << " ("
     << e.value << ")";
  if (e.stage >= 0)
    os << ", stage " << e.stage;
  if (e.subcycle >= 0)
    os << ", subcycle " << e.subcycle;
  if (!e.region.empty())
    os << ", region " << e.region;
  return os.str();
}

RunRow make_row(const Mesh &m, const PhysicsConfig &p, long step,
                const State &s, const std::vector<double> &eta, double dt,
                const WorkCounters &w) {
  RunRow r;
  r.step = step;
  r.t = s.t;
  r.mass = total_mass(m, s.h);
  r.absVorticity = total_absolute_vorticity(m, eta);
  r.pvVolume = total_pv_volume(m, s.h, eta).viaPv;
  r.maxCourant = courant_number(m, s, p.g, dt).nu;
  r.work = w;
  return r;
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig &cfg, const Setup &setup) {
  using clock = std::chrono::steady_clock;
  const Mesh &m = setup.mesh;
  const PhysicsConfig &p = cfg.physics;
  const long N = cfg.steps();
  if (cfg.scheme == Scheme::FBLTS && !setup.labels)
    throw ConfigError("scheme FBLTS needs a fine region");

  ScenarioResult res;
  ShallowWaterSystem sys(m, p, &res.work);
  std::optional<FbltsStepper> lts;
  if (cfg.scheme == Scheme::FBLTS)
    lts.emplace(sys, *setup.labels, LTSConfig{cfg.dt, cfg.M, cfg.weights},
                cfg.extents);

  State s = setup.initial;
  std::vector<double> eta;
  try {
    eta = vorticity_fields(m, p, s.u, s.h).eta;
    res.record.rows.push_back(make_row(m, p, 0, s, eta, cfg.dt, res.work));
  } catch (const PositivityError &e) {
    throw RunAbort(0, describe(e));
  }

  for (long n = 1; n <= N; ++n) {
    auto t0 = clock::now();
    std::array<double, 3> phases{};
    std::vector<double> G;
    FbltsStepRecord lrec;
    State next;
    try {
      SlowCache cache;
      if (cfg.splitting) {
        cache = freeze_slow(m, s, p, &res.work);
        sys.set_frozen(&cache);
      }
      const bool track = cfg.trackVorticity;
      switch (cfg.scheme) {
      case Scheme::FBLTS:
        lrec.recordPvFlux = track;
        next = lts->step(s, &lrec);
        phases = lts->phase_seconds();
        break;
      case Scheme::FBRK32: {
        Fbrk32Stages st;
        next = fbrk32_step(sys, s, cfg.dt, cfg.weights, &st);
        if (track)
          G = cfg.splitting ? pv_flux(m, p, s.u, s.h)
                            : pv_flux(m, p, st.u2, st.hsss);
        break;
      }
      case Scheme::RK4: {
        Rk4Stages st;
        next = rk4_step(sys, s, cfg.dt, &st);
        if (track)
          G = cfg.splitting ? pv_flux(m, p, s.u, s.h) : rk4_pv_flux(m, p, st);
        break;
      }
      }
      sys.set_frozen(nullptr);
    } catch (const PositivityError &e) {
      throw RunAbort(n, describe(e));
    }
    auto t1 = clock::now();
    if (!all_finite(next))
      throw RunAbort(n, "non-finite state");
    // Stamp time exactly so every scheme lands on the same record times.
    next.t = n * cfg.dt;
    try {
      if (!cfg.trackVorticity)
        eta = vorticity_fields(m, p, next.u, next.h).eta;
      else if (cfg.scheme == Scheme::FBLTS)
        eta = step_prognostic_vorticity(m, *setup.labels, eta, lrec, cfg.dt,
                                        cfg.M);
      else
        eta = step_prognostic_vorticity(m, eta, G, cfg.dt);
      s = std::move(next);
      RunRow row = make_row(m, p, n, s, eta, cfg.dt, res.work);
      auto t2 = clock::now();
      row.wallStep = std::chrono::duration<double>(t1 - t0).count();
      row.wallCoarse = phases[0];
      row.wallFine = phases[1];
      row.wallCorrect = phases[2];
      row.wallDiagnostics = std::chrono::duration<double>(t2 - t1).count();
      res.wallSeconds += row.wallStep;
      res.record.rows.push_back(row);
    } catch (const PositivityError &e) {
      throw RunAbort(n, describe(e));
    }
  }

  res.final = std::move(s);
  res.eta = std::move(eta);
  res.steps = N;
  WorkCounters per = expected_step_work(cfg, setup);
  res.expectedWork = {per.fastCellEvals * N, per.fastEdgeEvals * N,
                      per.slowCellEvals * N, per.slowEdgeEvals * N};
  return res;
}

ScenarioResult run_scenario(const ScenarioConfig &cfg) {
  return run_scenario(cfg, build_setup(cfg));
}

void write_state_csv(const std::string &path, const Mesh &m, const State &s,
                     const LTSLabels *labels) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  // region: 0 fine interior, 1-5 fine layers, 6 IF1, 7 IF2, 8 coarse; -1 none
  f << "kind,index,x,y,h,u,region\n";
  char buf[160];
  for (Index i = 0; i < m.nCells; ++i) {
    std::snprintf(buf, sizeof buf, "cell,%d,%.17g,%.17g,%.17g,,%d\n", i,
                  m.xCell[i], m.yCell[i], s.h[i],
                  labels ? static_cast<int>(labels->cellRegion[i]) : -1);
    f << buf;
  }
  for (Index e = 0; e < m.nEdges; ++e) {
    std::snprintf(buf, sizeof buf, "edge,%d,%.17g,%.17g,,%.17g,%d\n", e,
                  m.xEdge[e], m.yEdge[e], s.u[e],
                  labels ? static_cast<int>(labels->edgeRegion[e]) : -1);
    f << buf;
  }
}

} // namespace fblts
