#include "fblts/splitting.hpp"

#include <cmath>

namespace fblts {

SlowCache freeze_slow(const Mesh &m, const State &s, const PhysicsConfig &cfg,
                      WorkCounters *counters) {
  SlowCache c;
  c.du = tendency_slow(m, s, cfg, counters).du;
  c.t = s.t;
  return c;
}

TendencyPair split_tendency(const Mesh &m, const State &s,
                            const SlowCache &cache, const PhysicsConfig &cfg,
                            WorkCounters *counters) {
  TendencyPair tp = tendency_fast(m, s, cfg, counters);
  for (Index e = 0; e < m.nEdges; ++e)
    tp.du[e] += cache.du[e];
  return tp;
}

void ShallowWaterSystem::charge(std::uint64_t cells, std::uint64_t edges) {
  if (!counters_)
    return;
  counters_->fastCellEvals += cells;
  counters_->fastEdgeEvals += edges;
  if (!frozen_ && cfg_.slow_active())
    counters_->slowEdgeEvals += edges;
}

void ShallowWaterSystem::thickness(std::span<const double> u,
                                   std::span<const double> h,
                                   std::span<double> out) {
  for (Index i = 0; i < mesh_->nCells; ++i)
    out[i] = thickness_at(u, h, i);
  charge(mesh_->nCells, 0);
}

void ShallowWaterSystem::momentum(std::span<const double> u,
                                  std::span<const double> h,
                                  std::span<double> out) {
  for (Index e = 0; e < mesh_->nEdges; ++e)
    out[e] = momentum_at(u, h, e);
  charge(0, mesh_->nEdges);
}

void ShallowWaterSystem::thickness_on(std::span<const double> u,
                                      std::span<const double> h,
                                      std::span<const Index> cells,
                                      std::span<double> out) {
  for (Index i : cells)
    out[i] = thickness_at(u, h, i);
  charge(cells.size(), 0);
}

void ShallowWaterSystem::momentum_on(std::span<const double> u,
                                     std::span<const double> h,
                                     std::span<const Index> edges,
                                     std::span<double> out) {
  for (Index e : edges)
    out[e] = momentum_at(u, h, e);
  charge(0, edges.size());
}

void ShallowWaterSystem::check_thickness(std::span<const double> h,
                                         int stage) const {
  for (Index i = 0; i < mesh_->nCells; ++i)
    if (!(h[i] > 0.0) || !std::isfinite(h[i]))
      throw PositivityError("h", i, h[i], stage);
}

void ShallowWaterSystem::check_thickness_on(std::span<const double> h,
                                            std::span<const Index> cells,
                                            int stage, int subcycle) const {
  for (Index i : cells)
    if (!(h[i] > 0.0) || !std::isfinite(h[i]))
      throw PositivityError("h", i, h[i], stage, subcycle);
}

} // namespace fblts
