#include "fblts/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace fblts {

double total_mass(const Mesh &m, std::span<const double> h) {
  double s = 0.0;
  for (Index i = 0; i < m.nCells; ++i)
    s += m.areaCell[i] * h[i];
  return s;
}

double total_absolute_vorticity(const Mesh &m, std::span<const double> eta) {
  double s = 0.0;
  for (Index v = 0; v < m.nVertices; ++v)
    s += m.areaDual[v] * eta[v];
  return s;
}

PvVolume total_pv_volume(const Mesh &m, std::span<const double> h,
                         std::span<const double> eta) {
  PvVolume r;
  for (Index v = 0; v < m.nVertices; ++v) {
    double hv = kernel::vertex_thickness(m, h, v);
    if (!(hv > 0.0))
      throw PositivityError("hVertex", v, hv);
    double q = eta[v] / hv;
    r.viaPv += m.areaDual[v] * hv * q;
    r.viaEta += m.areaDual[v] * eta[v];
  }
  return r;
}

std::vector<double> step_prognostic_vorticity(const Mesh &m,
                                              const LTSLabels &labels,
                                              std::span<const double> eta,
                                              const FbltsStepRecord &rec,
                                              double dt, int M) {
  if (rec.coarsePvFlux.size() != static_cast<std::size_t>(m.nEdges) ||
      rec.finePvFlux.size() != static_cast<std::size_t>(M))
    throw std::invalid_argument("step record carries no vorticity fluxes");
  std::vector<double> coarse = vorticity_tendency(m, rec.coarsePvFlux);
  std::vector<double> sum(m.nVertices, 0.0);
  for (const auto &G : rec.finePvFlux) {
    std::vector<double> th = vorticity_tendency(m, G);
    for (Index v = 0; v < m.nVertices; ++v)
      sum[v] += th[v];
  }
  const double tau = dt / M;
  std::vector<double> out(eta.begin(), eta.end());
  for (Index v = 0; v < m.nVertices; ++v)
    out[v] += labels.vertexRegion[v] == Region::CoarseInt ? dt * coarse[v]
                                                          : tau * sum[v];
  return out;
}

std::vector<double> step_prognostic_vorticity(const Mesh &m,
                                              std::span<const double> eta,
                                              std::span<const double> pvFlux,
                                              double dt) {
  if (pvFlux.size() != static_cast<std::size_t>(m.nEdges))
    throw std::invalid_argument("vorticity flux has the wrong length");
  std::vector<double> th = vorticity_tendency(m, pvFlux);
  std::vector<double> out(eta.begin(), eta.end());
  for (Index v = 0; v < m.nVertices; ++v)
    out[v] += dt * th[v];
  return out;
}

double rms_error(std::span<const double> model,
                 std::span<const double> reference) {
  if (model.size() != reference.size())
    throw std::invalid_argument("rms_error: length mismatch");
  if (model.empty())
    return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double d = reference[i] - model[i];
    s += d * d;
  }
  return std::sqrt(s / model.size());
}

double rms_error(std::span<const double> model,
                 std::span<const double> reference,
                 std::span<const Index> subset) {
  if (model.size() != reference.size())
    throw std::invalid_argument("rms_error: length mismatch");
  if (subset.empty())
    return 0.0;
  double s = 0.0;
  for (Index i : subset) {
    double d = reference[i] - model[i];
    s += d * d;
  }
  return std::sqrt(s / subset.size());
}

double speedup(double baselineSeconds, double candidateSeconds) {
  if (!(baselineSeconds > 0.0) || !(candidateSeconds > 0.0))
    throw std::invalid_argument("speedup needs positive timings");
  return baselineSeconds / candidateSeconds;
}

void RunRecord::write_csv(std::ostream &os, bool includeWall) const {
  os << "step,t,mass,abs_vorticity,pv_volume,max_courant,fast_cell_evals,"
        "fast_edge_evals,slow_cell_evals,slow_edge_evals";
  if (includeWall)
    os << ",wall_coarse_s,wall_fine_s,wall_correct_s,wall_step_s,wall_diag_s";
  os << '\n';
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    os << buf;
  };
  for (const RunRow &r : rows) {
    os << r.step;
    num(r.t);
    num(r.mass);
    num(r.absVorticity);
    num(r.pvVolume);
    num(r.maxCourant);
    os << ',' << r.work.fastCellEvals << ',' << r.work.fastEdgeEvals << ','
       << r.work.slowCellEvals << ',' << r.work.slowEdgeEvals;
    if (includeWall) {
      num(r.wallCoarse);
      num(r.wallFine);
      num(r.wallCorrect);
      num(r.wallStep);
      num(r.wallDiagnostics);
    }
    os << '\n';
  }
}

void RunRecord::write_csv(const std::string &path, bool includeWall) const {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  write_csv(f, includeWall);
}

} // namespace fblts
