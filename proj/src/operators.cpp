#include "fblts/operators.hpp"

#include <cmath>

namespace fblts {

void PhysicsConfig::check() const {
  if (!(g > 0.0))
    throw std::invalid_argument("g must be positive");
  if (dragCoefficient < 0.0 || windCoefficient < 0.0)
    throw std::invalid_argument("drag and wind coefficients must be >= 0");
}

PositivityError::PositivityError(std::string f, Index i, double v, int st,
                                 int sub, std::string reg)
    : std::runtime_error("non-positive or non-finite " + f + " at index " +
                         std::to_string(i) + " (value " + std::to_string(v) +
                         ")" +
                         (st >= 0 ? ", stage " + std::to_string(st) : "") +
                         (sub >= 0 ? ", subcycle " + std::to_string(sub) : "") +
                         (reg.empty() ? "" : ", region " + reg)),
      field(std::move(f)), index(i), value(v), stage(st), subcycle(sub),
      region(std::move(reg)) {}

namespace kernel {

double edge_thickness(const Mesh &m, std::span<const double> h, Index e) {
  auto [a, b] = m.cellsOnEdge[e];
  if (b == kNoIndex)
    return h[a];
  if (a == kNoIndex)
    return h[b];
  return 0.5 * (h[a] + h[b]);
}

double thickness_tendency(const Mesh &m, std::span<const double> u,
                          std::span<const double> h, Index i) {
  auto edges = m.edgesOnCell[i];
  auto signs = m.edgeSignOnCell[i];
  double acc = 0.0;
  for (std::size_t j = 0; j < edges.size(); ++j) {
    Index e = edges[j];
    acc += signs[j] * m.lEdge[e] * edge_thickness(m, h, e) * u[e];
  }
  return -acc / m.areaCell[i];
}

double perp_flux(const Mesh &m, std::span<const double> F, Index e) {
  auto targets = m.edgesOnEdge[e];
  auto w = m.perpWeights[e];
  double acc = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j)
    acc += w[j] * F[targets[j]];
  return acc;
}

double kinetic_energy(const Mesh &m, std::span<const double> u, Index i) {
  double acc = 0.0;
  for (Index e : m.edgesOnCell[i])
    acc += 0.25 * m.lEdge[e] * m.dEdge[e] * u[e] * u[e];
  return acc / m.areaCell[i];
}

double relative_vorticity(const Mesh &m, std::span<const double> u, Index v) {
  auto edges = m.edgesOnVertex[v];
  auto signs = m.edgeSignOnVertex[v];
  double acc = 0.0;
  for (std::size_t j = 0; j < edges.size(); ++j)
    acc += signs[j] * m.dEdge[edges[j]] * u[edges[j]];
  return acc / m.areaDual[v];
}

double vertex_thickness(const Mesh &m, std::span<const double> h, Index v) {
  auto cells = m.cellsOnVertex[v];
  auto kites = m.kiteArea[v];
  double acc = 0.0;
  for (std::size_t j = 0; j < cells.size(); ++j)
    if (cells[j] != kNoIndex)
      acc += kites[j] * h[cells[j]];
  return acc / m.areaDual[v];
}

double fast_momentum(const Mesh &m, const PhysicsConfig &cfg,
                     std::span<const double> h, Index e) {
  auto [a, b] = m.cellsOnEdge[e];
  if (a == kNoIndex || b == kNoIndex)
    return 0.0;
  double sa = h[a] + m.bottomElevation[a];
  double sb = h[b] + m.bottomElevation[b];
  return -cfg.g * (sb - sa) / m.dEdge[e];
}

namespace {

double vertex_pv(const Mesh &m, const PhysicsConfig &cfg,
                 std::span<const double> u, std::span<const double> h,
                 Index v) {
  double eta = 0.0;
  if (cfg.advection)
    eta += relative_vorticity(m, u, v);
  if (cfg.rotationOn)
    eta += m.coriolisVertex[v];
  double hv = vertex_thickness(m, h, v);
  if (!(hv > 0.0))
    throw PositivityError("hVertex", v, hv);
  return eta / hv;
}

double flux_perp(const Mesh &m, std::span<const double> u,
                 std::span<const double> h, Index e) {
  auto targets = m.edgesOnEdge[e];
  auto w = m.perpWeights[e];
  double acc = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    Index ep = targets[j];
    acc += w[j] * edge_thickness(m, h, ep) * u[ep];
  }
  return acc;
}

} // namespace

double pv_flux(const Mesh &m, const PhysicsConfig &cfg,
               std::span<const double> u, std::span<const double> h, Index e) {
  if (!cfg.advection && !cfg.rotationOn)
    return 0.0;
  auto [v1, v2] = m.verticesOnEdge[e];
  double qe = 0.5 * (vertex_pv(m, cfg, u, h, v1) + vertex_pv(m, cfg, u, h, v2));
  return qe * flux_perp(m, u, h, e);
}

double slow_momentum(const Mesh &m, const PhysicsConfig &cfg,
                     std::span<const double> u, std::span<const double> h,
                     Index e) {
  double he = edge_thickness(m, h, e);
  if (!(he > 0.0))
    throw PositivityError("hEdge", e, he);

  double acc = pv_flux(m, cfg, u, h, e);

  auto [a, b] = m.cellsOnEdge[e];
  bool interior = a != kNoIndex && b != kNoIndex;
  if (interior && (cfg.advection || cfg.dragCoefficient > 0.0)) {
    double ka = kinetic_energy(m, u, a);
    double kb = kinetic_energy(m, u, b);
    if (cfg.advection)
      acc -= (kb - ka) / m.dEdge[e];
    if (cfg.dragCoefficient > 0.0)
      acc -= cfg.dragCoefficient * std::sqrt(ka + kb) * u[e] / he;
  }
  if (cfg.windCoefficient > 0.0) {
    double c = std::cos(m.angleEdge[e]), s = std::sin(m.angleEdge[e]);
    double wn = cfg.windVelocity[0] * c + cfg.windVelocity[1] * s;
    double wt = -cfg.windVelocity[0] * s + cfg.windVelocity[1] * c;
    double dn = wn - u[e];
    double dt = wt - perp_flux(m, u, e);
    acc += cfg.windCoefficient * std::hypot(dn, dt) * dn / he;
  }
  return acc;
}

} // namespace kernel

std::vector<double> edge_thickness(const Mesh &m, std::span<const double> h) {
  std::vector<double> out(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e)
    out[e] = kernel::edge_thickness(m, h, e);
  return out;
}

std::vector<double> thickness_tendency(const Mesh &m,
                                       std::span<const double> u,
                                       std::span<const double> h) {
  std::vector<double> out(m.nCells);
  for (Index i = 0; i < m.nCells; ++i)
    out[i] = kernel::thickness_tendency(m, u, h, i);
  return out;
}

std::vector<double> perp_flux(const Mesh &m, std::span<const double> F) {
  std::vector<double> out(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e)
    out[e] = kernel::perp_flux(m, F, e);
  return out;
}

VorticityFields vorticity_fields(const Mesh &m, const PhysicsConfig &cfg,
                                 std::span<const double> u,
                                 std::span<const double> h) {
  VorticityFields vf;
  const auto nV = static_cast<std::size_t>(m.nVertices);
  vf.zeta.resize(nV);
  vf.eta.resize(nV);
  vf.hVertex.resize(nV);
  vf.q.resize(nV);
  for (Index v = 0; v < m.nVertices; ++v) {
    vf.zeta[v] = kernel::relative_vorticity(m, u, v);
    vf.eta[v] = vf.zeta[v] + (cfg.rotationOn ? m.coriolisVertex[v] : 0.0);
    vf.hVertex[v] = kernel::vertex_thickness(m, h, v);
    if (!(vf.hVertex[v] > 0.0))
      throw PositivityError("hVertex", v, vf.hVertex[v]);
    vf.q[v] = vf.eta[v] / vf.hVertex[v];
  }
  vf.qEdge.resize(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e) {
    auto [v1, v2] = m.verticesOnEdge[e];
    vf.qEdge[e] = 0.5 * (vf.q[v1] + vf.q[v2]);
  }
  return vf;
}

std::vector<double> kinetic_energy(const Mesh &m, std::span<const double> u) {
  std::vector<double> out(m.nCells);
  for (Index i = 0; i < m.nCells; ++i)
    out[i] = kernel::kinetic_energy(m, u, i);
  return out;
}

std::vector<double> dual_divergence(const Mesh &m, std::span<const double> G) {
  std::vector<double> out(m.nVertices);
  for (Index v = 0; v < m.nVertices; ++v) {
    auto edges = m.edgesOnVertex[v];
    auto signs = m.edgeSignOnVertex[v];
    double acc = 0.0;
    for (std::size_t j = 0; j < edges.size(); ++j)
      acc += -signs[j] * m.dEdge[edges[j]] * G[edges[j]];
    out[v] = acc / m.areaDual[v];
  }
  return out;
}

std::vector<double> vorticity_tendency(const Mesh &m,
                                       std::span<const double> pvFlux) {
  auto out = dual_divergence(m, pvFlux);
  for (double &x : out)
    x = -x;
  return out;
}

std::vector<double> pv_flux(const Mesh &m, const PhysicsConfig &cfg,
                            std::span<const double> u,
                            std::span<const double> h) {
  std::vector<double> out(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e)
    out[e] = kernel::pv_flux(m, cfg, u, h, e);
  return out;
}

TendencyPair tendency_fast(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg, WorkCounters *counters) {
  TendencyPair tp;
  tp.dh = thickness_tendency(m, s.u, s.h);
  tp.du.resize(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e)
    tp.du[e] = kernel::fast_momentum(m, cfg, s.h, e);
  if (counters) {
    counters->fastCellEvals += m.nCells;
    counters->fastEdgeEvals += m.nEdges;
  }
  return tp;
}

TendencyPair tendency_slow(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg, WorkCounters *counters) {
  TendencyPair tp;
  tp.dh.assign(m.nCells, 0.0);
  tp.du.resize(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e)
    tp.du[e] = kernel::slow_momentum(m, cfg, s.u, s.h, e);
  if (counters)
    counters->slowEdgeEvals += m.nEdges;
  return tp;
}

TendencyPair tendency_full(const Mesh &m, const State &s,
                           const PhysicsConfig &cfg, WorkCounters *counters) {
  TendencyPair tp = tendency_fast(m, s, cfg, counters);
  TendencyPair slow = tendency_slow(m, s, cfg, counters);
  for (Index e = 0; e < m.nEdges; ++e)
    tp.du[e] += slow.du[e];
  return tp;
}

} // namespace fblts
