#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fblts/diagnostics.hpp"
#include "fblts/lts.hpp"
#include "fblts/mesh.hpp"
#include "fblts/splitting.hpp"
#include "fblts/steppers.hpp"

namespace fblts {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a run cannot continue (positivity, non-finite values).
class RunAbort : public std::runtime_error {
public:
  RunAbort(long step, const std::string &what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step(step) {}
  long step;
};

enum class Scheme { RK4, FBRK32, FBLTS };
const char *scheme_name(Scheme s);
Scheme parse_scheme(const std::string &s);

struct MeshSpec {
  std::string path; // load from file when set
  Index nx = 32, ny = 32;
  double dc = 10e3;
};

struct InitialCondition {
  double H = 100.0;         // background resting depth
  double amplitude = 1.0;   // Gaussian bump height
  double width = 30e3;      // e-folding radius
  std::optional<std::array<double, 2>> center; // default: domain center
  double velocityNoise = 0.0; // uniform random u perturbation (m/s)
};

struct FineMaskSpec {
  enum class Kind { None, Disk, Fraction, Columns } kind = Kind::Disk;
  double radius = 50e3;    // Disk
  double fraction = 0.1;   // Fraction: nearest cells to the center
  Index col0 = 0, col1 = 0; // Columns (hex meshes, inclusive)
  std::optional<std::array<double, 2>> center;
  // Resting depth inside the fine region relative to H; the bottom is raised
  // elsewhere so the free surface stays flat at rest.
  double depthRatio = 1.0;
};

struct ScenarioConfig {
  MeshSpec mesh;
  InitialCondition initial;
  PhysicsConfig physics;
  double f0 = 0.0;
  Scheme scheme = Scheme::FBLTS;
  double dt = 60.0; // coarse step
  int M = 4;
  FBWeights weights;
  ExtentPolicy extents = ExtentPolicy::Shrinking;
  int stencilRadius = 2;
  FineMaskSpec fine;
  bool splitting = false;
  double duration = 3600.0; // seconds; steps = duration / dt
  std::uint64_t seed = 1;
  bool trackVorticity = true;

  // converge
  std::vector<double> convergeDts{150.0, 75.0, 37.5, 18.75};
  double referenceDt = 0.0; // 0: min(dts)/10

  // cfl-scan
  std::vector<std::string> scanSchemes{"RK32", "FBRK32", "RK4", "FBLTS"};
  int scanSteps = 200;
  double scanRelWidth = 0.01;
  double scanGrowth = 10.0;
  int scanMaxM = 16;

  // conserve
  int conserveSteps = 200;

  // perf
  double perfRk4Dt = 0.0; // 0: FB-RK(3,2) fine dt
  int perfRepeats = 1;

  long steps() const;
};

ScenarioConfig parse_config(const std::string &jsonText);
ScenarioConfig load_config(const std::string &path);

struct Setup {
  Mesh mesh;
  State initial;
  std::vector<bool> fineMask;
  std::optional<LTSLabels> labels;
};

/// Mesh, bathymetry, initial state and (for FB-LTS) region labels.
Setup build_setup(const ScenarioConfig &cfg);

struct ScenarioResult {
  RunRecord record;
  State final;
  std::vector<double> eta; // prognostic absolute vorticity
  WorkCounters work;
  WorkCounters expectedWork;
  double wallSeconds = 0.0;
  long steps = 0;
};

/// Advance cfg.scheme for cfg.steps() coarse steps from setup.initial.
ScenarioResult run_scenario(const ScenarioConfig &cfg, const Setup &setup);
ScenarioResult run_scenario(const ScenarioConfig &cfg);

/// Closed-form fast and slow evaluation counts for one coarse step.
WorkCounters expected_step_work(const ScenarioConfig &cfg, const Setup &setup);

void write_state_csv(const std::string &path, const Mesh &m, const State &s,
                     const LTSLabels *labels);

// Drivers

struct ConvergenceRow {
  double dt = 0.0;
  bool stable = true;
  // 0 all, 1 fine, 2 IF1, 3 coarse (IF2 and interior)
  std::array<double, 4> errH{}, errU{};
  std::array<double, 4> orderH{}, orderU{}; // vs the previous (2x) dt; NaN first
};

struct ConvergenceTable {
  double referenceDt = 0.0;
  std::vector<ConvergenceRow> rows;
  void write_csv(const std::string &path) const;
};

ConvergenceTable convergence_driver(const ScenarioConfig &cfg,
                                    const std::vector<double> &dts,
                                    double referenceDt);

struct CflRow {
  std::string scheme;
  double maxStableDt = 0.0;
  double firstUnstableDt = 0.0;
  double maxCourant = 0.0; // at maxStableDt on the initial state
  int M = 1;               // FBLTS: largest stable subcycle count
  double fineDt = 0.0;     // FBLTS: fine step from the first phase
  int probes = 0;
  std::vector<std::pair<int, bool>> frontier; // FBLTS (M, stable)
};

struct CflScan {
  std::vector<CflRow> rows;
  const CflRow *find(const std::string &scheme) const;
  void write_csv(const std::string &path) const;
};

/// Stability of `scheme` at coarse step dt under the scan predicate.
bool is_stable(const ScenarioConfig &cfg, const Setup &setup,
               const std::string &scheme, double dt, int M);

CflScan cfl_scan(const ScenarioConfig &cfg,
                 const std::vector<std::string> &schemes);

struct PerfRow {
  std::string scheme;
  double dt = 0.0;
  int M = 1;
  long steps = 0;
  double wallSeconds = 0.0;
  WorkCounters measured, expected;
  double speedupVsRk4 = 0.0;
  double speedupVsFineFbrk = 0.0;
  double cellEvalRatioVsFineFbrk = 0.0; // baseline evals / scheme evals
};

struct PerfTable {
  double duration = 0.0;
  std::vector<PerfRow> rows;
  const PerfRow *find(const std::string &scheme) const;
  void write_csv(const std::string &path) const;
};

PerfTable perf_driver(const ScenarioConfig &cfg);

struct ConservationReport {
  long steps = 0;
  double massDrift = 0.0;
  double vorticityDrift = 0.0;
  double pvVolumeDrift = 0.0;
  double pvIdentityGap = 0.0; // max |viaPv - viaEta| / scale
  double diagnosticGap = 0.0; // max |eta_prog - eta_diag| (reported only)
  RunRecord record;
  void write_csv(const std::string &path) const;
};

ConservationReport conservation_driver(const ScenarioConfig &cfg, int nSteps);

} // namespace fblts
