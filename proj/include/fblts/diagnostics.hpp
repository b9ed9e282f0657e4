#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fblts/lts.hpp"
#include "fblts/operators.hpp"

namespace fblts {

double total_mass(const Mesh &m, std::span<const double> h);
double total_absolute_vorticity(const Mesh &m, std::span<const double> eta);

struct PvVolume {
  double viaPv = 0.0;  // sum A_v h_v q_v
  double viaEta = 0.0; // sum A_v eta_v
};
PvVolume total_pv_volume(const Mesh &m, std::span<const double> h,
                         std::span<const double> eta);

/// Advance the prognostic absolute vorticity with the fluxes recorded by an
/// FB-LTS step. Dual cells labelled COARSE_INT take one coarse update, all
/// others the sum over subcycles.
std::vector<double> step_prognostic_vorticity(const Mesh &m,
                                              const LTSLabels &labels,
                                              std::span<const double> eta,
                                              const FbltsStepRecord &rec,
                                              double dt, int M);

/// Same update for a global step whose effective flux is pvFlux.
std::vector<double> step_prognostic_vorticity(const Mesh &m,
                                              std::span<const double> eta,
                                              std::span<const double> pvFlux,
                                              double dt);

double rms_error(std::span<const double> model,
                 std::span<const double> reference);
// RMS over a subset of indices.
double rms_error(std::span<const double> model,
                 std::span<const double> reference,
                 std::span<const Index> subset);

double speedup(double baselineSeconds, double candidateSeconds);

struct RunRow {
  long step = 0;
  double t = 0.0;
  double mass = 0.0;
  double absVorticity = 0.0;
  double pvVolume = 0.0;
  double maxCourant = 0.0;
  WorkCounters work;
  double wallCoarse = 0.0, wallFine = 0.0, wallCorrect = 0.0;
  double wallStep = 0.0, wallDiagnostics = 0.0;
};

struct RunRecord {
  std::vector<RunRow> rows;

  void write_csv(std::ostream &os, bool includeWall = true) const;
  void write_csv(const std::string &path, bool includeWall = true) const;
};

} // namespace fblts
