#pragma once

#include <span>
#include <vector>

#include "fblts/operators.hpp"

namespace fblts {

struct SlowCache {
  std::vector<double> du; // Phi^slow(u^n, h^n); Psi^slow is identically zero
  double t = 0.0;
};

SlowCache freeze_slow(const Mesh &m, const State &s, const PhysicsConfig &cfg,
                      WorkCounters *counters = nullptr);

TendencyPair split_tendency(const Mesh &m, const State &s,
                            const SlowCache &cache, const PhysicsConfig &cfg,
                            WorkCounters *counters = nullptr);

/// Tendency source shared by every stepper. In split mode Phi is the fast
/// part plus the frozen cache; otherwise fast + live slow part.
class ShallowWaterSystem {
public:
  ShallowWaterSystem(const Mesh &m, const PhysicsConfig &cfg,
                     WorkCounters *counters = nullptr)
      : mesh_(&m), cfg_(cfg), counters_(counters) {}

  void set_frozen(const SlowCache *cache) { frozen_ = cache; }
  const SlowCache *frozen() const { return frozen_; }
  void set_counters(WorkCounters *c) { counters_ = c; }

  const Mesh &mesh() const { return *mesh_; }
  const PhysicsConfig &physics() const { return cfg_; }
  std::size_t n_cells() const { return mesh_->nCells; }
  std::size_t n_edges() const { return mesh_->nEdges; }

  double thickness_at(std::span<const double> u, std::span<const double> h,
                      Index i) const {
    return kernel::thickness_tendency(*mesh_, u, h, i);
  }
  double momentum_at(std::span<const double> u, std::span<const double> h,
                     Index e) const {
    double du = kernel::fast_momentum(*mesh_, cfg_, h, e);
    if (frozen_)
      return du + frozen_->du[e];
    if (cfg_.slow_active())
      return du + kernel::slow_momentum(*mesh_, cfg_, u, h, e);
    return du;
  }

  void thickness(std::span<const double> u, std::span<const double> h,
                 std::span<double> out);
  void momentum(std::span<const double> u, std::span<const double> h,
                std::span<double> out);
  void thickness_on(std::span<const double> u, std::span<const double> h,
                    std::span<const Index> cells, std::span<double> out);
  void momentum_on(std::span<const double> u, std::span<const double> h,
                   std::span<const Index> edges, std::span<double> out);

  void check_thickness(std::span<const double> h, int stage) const;
  void check_thickness_on(std::span<const double> h,
                          std::span<const Index> cells, int stage,
                          int subcycle) const;

private:
  void charge(std::uint64_t cells, std::uint64_t edges);

  const Mesh *mesh_;
  PhysicsConfig cfg_;
  WorkCounters *counters_;
  const SlowCache *frozen_ = nullptr;
};

} // namespace fblts
