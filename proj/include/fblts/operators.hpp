#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fblts/mesh.hpp"

namespace fblts {

struct State {
  std::vector<double> h; // per cell
  std::vector<double> u; // per edge
  double t = 0.0;
};

struct TendencyPair {
  std::vector<double> du;
  std::vector<double> dh;
};

struct PhysicsConfig {
  double g = 9.80665;
  bool rotationOn = false;
  // Momentum advection: relative vorticity in q and the kinetic-energy
  // gradient. Off for the linear gravity-wave model.
  bool advection = true;
  double dragCoefficient = 0.0;
  double windCoefficient = 0.0;
  std::array<double, 2> windVelocity{0.0, 0.0};

  bool slow_active() const {
    return rotationOn || advection || dragCoefficient > 0.0 ||
           windCoefficient > 0.0;
  }
  void check() const;
};

struct VorticityFields {
  std::vector<double> zeta, eta, hVertex, q;
  std::vector<double> qEdge;
};

struct WorkCounters {
  std::uint64_t fastCellEvals = 0;
  std::uint64_t fastEdgeEvals = 0;
  std::uint64_t slowCellEvals = 0;
  std::uint64_t slowEdgeEvals = 0;

  WorkCounters &operator+=(const WorkCounters &o) {
    fastCellEvals += o.fastCellEvals;
    fastEdgeEvals += o.fastEdgeEvals;
    slowCellEvals += o.slowCellEvals;
    slowEdgeEvals += o.slowEdgeEvals;
    return *this;
  }
  bool operator==(const WorkCounters &) const = default;
};

class PositivityError : public std::runtime_error {
public:
  PositivityError(std::string field, Index index, double value, int stage = -1,
                  int subcycle = -1, std::string region = {});

  std::string field;
  Index index;
  double value;
  int stage;
  int subcycle;
  std::string region;
};

// Single-element kernels. The array-wide operations below and the
// restricted-extent evaluations used by the LTS engine all go through these,
// so a value never depends on which extent it was computed in.
namespace kernel {

double edge_thickness(const Mesh &m, std::span<const double> h, Index e);
double thickness_tendency(const Mesh &m, std::span<const double> u,
                          std::span<const double> h, Index i);
double perp_flux(const Mesh &m, std::span<const double> F, Index e);
double kinetic_energy(const Mesh &m, std::span<const double> u, Index i);
double relative_vorticity(const Mesh &m, std::span<const double> u, Index v);
double vertex_thickness(const Mesh &m, std::span<const double> h, Index v);
double fast_momentum(const Mesh &m, const PhysicsConfig &cfg,
                     std::span<const double> h, Index e);
double slow_momentum(const Mesh &m, const PhysicsConfig &cfg,
                     std::span<const double> u, std::span<const double> h,
                     Index e);
// q_e F_perp_e with q built from the terms the momentum equation uses.
double pv_flux(const Mesh &m, const PhysicsConfig &cfg,
               std::span<const double> u, std::span<const double> h, Index e);

} // namespace kernel

std::vector<double> edge_thickness(const Mesh &m, std::span<const double> h);
std::vector<double> thickness_tendency(const Mesh &m,
                                       std::span<const double> u,
                                       std::span<const double> h);
std::vector<double> perp_flux(const Mesh &m, std::span<const double> F);
VorticityFields vorticity_fields(const Mesh &m, const PhysicsConfig &cfg,
                                 std::span<const double> u,
                                 std::span<const double> h);
std::vector<double> kinetic_energy(const Mesh &m, std::span<const double> u);

// (1/A_v) sum_e (-t_{e,v}) d_e G_e, the outward dual-cell divergence.
std::vector<double> dual_divergence(const Mesh &m, std::span<const double> G);
// Theta_v = -dual_divergence(q F_perp)
std::vector<double> vorticity_tendency(const Mesh &m,
                                       std::span<const double> pvFlux);
std::vector<double> pv_flux(const Mesh &m, const PhysicsConfig &cfg,
                            std::span<const double> u,
                            std::span<const double> h);

TendencyPair tendency_fast(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg,
                           WorkCounters *counters = nullptr);
TendencyPair tendency_slow(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg,
                           WorkCounters *counters = nullptr);
TendencyPair tendency_full(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg,
                           WorkCounters *counters = nullptr);

} // namespace fblts
