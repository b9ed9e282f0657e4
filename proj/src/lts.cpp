#include "fblts/lts.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fblts {

int region_class(Region r) {
  if (is_fine(r))
    return 0;
  switch (r) {
  case Region::If1: return 1;
  case Region::If2: return 2;
  default: return 3;
  }
}

int fine_depth(Region r) {
  return r == Region::Fine ? 6 : static_cast<int>(r);
}

const char *region_name(Region r) {
  switch (r) {
  case Region::Fine: return "FINE";
  case Region::FineAdj1: return "FINE_ADJ_1";
  case Region::FineAdj2: return "FINE_ADJ_2";
  case Region::FineAdj3: return "FINE_ADJ_3";
  case Region::FineAdj4: return "FINE_ADJ_4";
  case Region::FineAdj5: return "FINE_ADJ_5";
  case Region::If1: return "IF1";
  case Region::If2: return "IF2";
  case Region::CoarseInt: return "COARSE_INT";
  }
  return "?";
}

Region closest_to_fine(std::span<const Region> regions) {
  Region best = Region::CoarseInt;
  bool haveFine = false;
  for (Region r : regions) {
    if (is_fine(r)) {
      if (!haveFine || fine_depth(r) < fine_depth(best))
        best = r;
      haveFine = true;
    } else if (!haveFine && r < best) {
      best = r;
    }
  }
  return best;
}

std::vector<int> hop_distance(const Mesh &m, const std::vector<bool> &seed) {
  Jagged<Index> nbrs = cell_neighbors(m);
  std::vector<int> dist(m.nCells, INT_MAX);
  std::deque<Index> queue;
  for (Index i = 0; i < m.nCells; ++i)
    if (seed[i]) {
      dist[i] = 0;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    Index i = queue.front();
    queue.pop_front();
    for (Index j : nbrs[i])
      if (dist[j] == INT_MAX) {
        dist[j] = dist[i] + 1;
        queue.push_back(j);
      }
  }
  return dist;
}

LTSLabels label_regions(const Mesh &m, const std::vector<bool> &fineMask,
                        int r) {
  if (fineMask.size() != static_cast<std::size_t>(m.nCells))
    throw std::invalid_argument("fine mask length differs from nCells");
  if (r < 1)
    throw std::invalid_argument("stencil radius must be >= 1");
  auto nFine = std::count(fineMask.begin(), fineMask.end(), true);
  if (nFine == 0 || nFine == m.nCells)
    throw std::invalid_argument(
        "fine mask must select some but not all cells");

  std::vector<bool> coarseMask(fineMask.size());
  for (std::size_t i = 0; i < fineMask.size(); ++i)
    coarseMask[i] = !fineMask[i];
  std::vector<int> toFine = hop_distance(m, fineMask);
  std::vector<int> toCoarse = hop_distance(m, coarseMask);

  LTSLabels L;
  L.stencilRadius = r;
  L.cellRegion.resize(m.nCells);
  bool haveIf2 = false;
  for (Index i = 0; i < m.nCells; ++i) {
    if (fineMask[i]) {
      int layer = (toCoarse[i] + r - 1) / r;
      L.cellRegion[i] = layer <= 5 ? static_cast<Region>(layer) : Region::Fine;
    } else if (toFine[i] <= r) {
      L.cellRegion[i] = Region::If1;
    } else if (toFine[i] <= 2 * r) {
      L.cellRegion[i] = Region::If2;
      haveIf2 = true;
    } else {
      L.cellRegion[i] = Region::CoarseInt;
    }
  }
  if (!haveIf2)
    throw std::invalid_argument(
        "mesh too small for the fine mask: no room for interface two");

  L.edgeRegion.resize(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e) {
    auto [a, b] = m.cellsOnEdge[e];
    if (b == kNoIndex)
      L.edgeRegion[e] = L.cellRegion[a];
    else
      L.edgeRegion[e] = closest_to_fine(
          std::array<Region, 2>{L.cellRegion[a], L.cellRegion[b]});
  }
  L.vertexRegion.resize(m.nVertices);
  std::vector<Region> around;
  for (Index v = 0; v < m.nVertices; ++v) {
    around.clear();
    for (Index e : m.edgesOnVertex[v])
      around.push_back(L.edgeRegion[e]);
    L.vertexRegion[v] = closest_to_fine(around);
  }
  return L;
}

LabelReport validate_labels(const Mesh &m, const LTSLabels &L) {
  LabelReport rep;
  Jagged<Index> nbrs = cell_neighbors(m);
  const int r = L.stencilRadius;
  auto cls = [&](Index i) { return region_class(L.cellRegion[i]); };

  for (Index e = 0; e < m.nEdges; ++e) {
    auto [a, b] = m.cellsOnEdge[e];
    if (b == kNoIndex)
      continue;
    if (std::abs(cls(a) - cls(b)) > 1)
      rep.violations.push_back({false, a, b, L.cellRegion[a], L.cellRegion[b],
                                "adjacency"});
    Region want = closest_to_fine(
        std::array<Region, 2>{L.cellRegion[a], L.cellRegion[b]});
    if (L.edgeRegion[e] != want)
      rep.violations.push_back(
          {true, e, a, L.edgeRegion[e], want, "edge-rule"});
  }

  // Cells within `radius` hops of the seeds; reports the first offender.
  std::vector<int> mark(m.nCells, -1);
  std::vector<Index> frontier, next;
  auto scan = [&](std::initializer_list<Index> seeds, int radius, int myCls,
                  int stamp) -> Index {
    frontier.assign(seeds.begin(), seeds.end());
    for (Index s : frontier)
      mark[s] = stamp;
    for (int hop = 0;; ++hop) {
      for (Index j : frontier)
        if (std::abs(cls(j) - myCls) > 1)
          return j;
      if (hop == radius)
        return kNoIndex;
      next.clear();
      for (Index j : frontier)
        for (Index k : nbrs[j])
          if (mark[k] != stamp) {
            mark[k] = stamp;
            next.push_back(k);
          }
      frontier.swap(next);
    }
  };

  int stamp = 0;
  for (Index i = 0; i < m.nCells; ++i) {
    Index bad = scan({i}, r, cls(i), stamp++);
    if (bad != kNoIndex)
      rep.violations.push_back(
          {false, i, bad, L.cellRegion[i], L.cellRegion[bad], "stencil"});
  }
  for (Index e = 0; e < m.nEdges; ++e) {
    auto [a, b] = m.cellsOnEdge[e];
    if (b == kNoIndex)
      continue;
    Index bad = scan({a, b}, r - 1, region_class(L.edgeRegion[e]), stamp++);
    if (bad != kNoIndex)
      rep.violations.push_back(
          {true, e, bad, L.edgeRegion[e], L.cellRegion[bad], "stencil"});
  }
  return rep;
}

void LTSConfig::check() const {
  if (!(dt > 0.0))
    throw std::invalid_argument("coarse dt must be positive");
  if (M < 1)
    throw std::invalid_argument("subcycle count M must be >= 1");
  weights.check();
}

InterfacePrediction predict_interface(const InterfaceCache &c, int k, int M,
                                      const FBWeights &w) {
  if (M < 1 || k < 0 || k > M)
    throw std::out_of_range("subcycle index " + std::to_string(k) +
                            " outside [0, " + std::to_string(M) + "]");
  const std::size_t nc = c.cells.size(), ne = c.edges.size();
  InterfacePrediction p;
  p.k = k;

  auto base = [&](int kk, std::vector<double> &h, std::vector<double> &u) {
    const double a = static_cast<double>(kk) / M;
    h.resize(nc);
    u.resize(ne);
    for (std::size_t j = 0; j < nc; ++j)
      h[j] = a * c.h1[j] + (1.0 - a) * c.hn[j];
    for (std::size_t j = 0; j < ne; ++j)
      u[j] = a * c.u1[j] + (1.0 - a) * c.un[j];
  };
  base(k, p.h, p.u);
  if (k == M)
    return p;

  const double a = static_cast<double>(k) / M;
  const double b = 1.0 / M;
  const double rest = 1.0 - static_cast<double>(k + 1) / M;
  auto stage = [&](const std::vector<double> &x1, const std::vector<double> &xs,
                   const std::vector<double> &x0, std::vector<double> &out) {
    out.resize(x0.size());
    for (std::size_t j = 0; j < x0.size(); ++j)
      out[j] = a * x1[j] + b * xs[j] + rest * x0[j];
  };
  stage(c.h1, c.h13, c.hn, p.h13);
  stage(c.u1, c.u13, c.un, p.u13);
  stage(c.h1, c.h12, c.hn, p.h12);
  stage(c.u1, c.u12, c.un, p.u12);

  std::vector<double> uNextUnused;
  base(k + 1, p.hNext, uNextUnused);

  p.hstar.resize(nc);
  p.hss.resize(nc);
  p.hsss.resize(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    p.hstar[j] = detail::fb2(w.beta1, p.h13[j], p.h[j]);
    p.hss[j] = detail::fb2(w.beta2, p.h12[j], p.h[j]);
    p.hsss[j] = detail::fb3(w.beta3, p.hNext[j], p.h12[j], p.h[j]);
  }
  return p;
}

StageExtents stage_extents(const LTSLabels &L, ExtentPolicy policy) {
  int tLim[3] = {5, 3, 1}, vLim[3] = {4, 2, 0};
  switch (policy) {
  case ExtentPolicy::Shrinking:
    break;
  case ExtentPolicy::AllAdjacent:
    std::fill(tLim, tLim + 3, 5);
    std::fill(vLim, vLim + 3, 5);
    break;
  case ExtentPolicy::WholeFine:
    std::fill(tLim, tLim + 3, 6);
    std::fill(vLim, vLim + 3, 6);
    break;
  }

  StageExtents x;
  const auto nC = static_cast<Index>(L.cellRegion.size());
  const auto nE = static_cast<Index>(L.edgeRegion.size());
  for (Index i = 0; i < nC; ++i) {
    Region r = L.cellRegion[i];
    for (int s = 0; s < 3; ++s)
      if (!is_fine(r) || fine_depth(r) <= tLim[s])
        x.thickness[s].push_back(i);
    if (is_fine(r))
      x.fineCells.push_back(i);
    else if (r == Region::CoarseInt)
      x.intCells.push_back(i);
    else
      x.ifCells.push_back(i);
    if (r == Region::If1)
      x.if1Cells.push_back(i);
  }
  for (Index e = 0; e < nE; ++e) {
    Region r = L.edgeRegion[e];
    for (int s = 0; s < 3; ++s) {
      bool take = is_fine(r) ? fine_depth(r) <= vLim[s]
                             : (s < 2 || r != Region::If2);
      if (take)
        x.velocity[s].push_back(e);
    }
    if (is_fine(r))
      x.fineEdges.push_back(e);
    else if (r == Region::CoarseInt)
      x.intEdges.push_back(e);
    else
      x.ifEdges.push_back(e);
    if (r == Region::If1)
      x.if1Edges.push_back(e);
  }
  return x;
}

FbltsStepper::FbltsStepper(ShallowWaterSystem &sys, const LTSLabels &labels,
                           const LTSConfig &cfg, ExtentPolicy policy)
    : sys_(&sys), labels_(&labels), cfg_(cfg),
      ext_(stage_extents(labels, policy)) {
  cfg_.check();
  if (labels.cellRegion.size() != sys.n_cells() ||
      labels.edgeRegion.size() != sys.n_edges())
    throw std::invalid_argument("labels do not match the mesh");
}

namespace {

void check_positive(const std::vector<double> &h, std::span<const Index> cells,
                    const LTSLabels &L, int stage, int k) {
  for (Index i : cells)
    if (!(h[i] > 0.0) || !std::isfinite(h[i]))
      throw PositivityError("h", i, h[i], stage, k,
                            region_name(L.cellRegion[i]));
}

} // namespace

Fbrk32Stages FbltsStepper::coarse_advance(const State &s,
                                          InterfaceCache &cache) {
  const double dt = cfg_.dt;
  const FBWeights &w = cfg_.weights;
  const std::vector<double> &h = s.h, &u = s.u;
  Fbrk32Stages c;
  c.h1 = c.hstar = c.h2 = c.hss = c.h3 = c.hsss = h;
  c.u1 = c.u2 = c.u3 = u;
  std::vector<double> dh(h.size()), du(u.size());

  const double a1 = dt / 3.0, a2 = dt / 2.0;
  sys_->thickness_on(u, h, ext_.thickness[0], dh);
  for (Index i : ext_.thickness[0]) {
    c.h1[i] = h[i] + a1 * dh[i];
    c.hstar[i] = detail::fb2(w.beta1, c.h1[i], h[i]);
  }
  check_positive(c.h1, ext_.thickness[0], *labels_, 1, -1);
  sys_->momentum_on(u, c.hstar, ext_.velocity[0], du);
  for (Index e : ext_.velocity[0])
    c.u1[e] = u[e] + a1 * du[e];

  sys_->thickness_on(c.u1, c.h1, ext_.thickness[1], dh);
  for (Index i : ext_.thickness[1]) {
    c.h2[i] = h[i] + a2 * dh[i];
    c.hss[i] = detail::fb2(w.beta2, c.h2[i], h[i]);
  }
  check_positive(c.h2, ext_.thickness[1], *labels_, 2, -1);
  sys_->momentum_on(c.u1, c.hss, ext_.velocity[1], du);
  for (Index e : ext_.velocity[1])
    c.u2[e] = u[e] + a2 * du[e];

  sys_->thickness_on(c.u2, c.h2, ext_.thickness[2], dh);
  for (Index i : ext_.thickness[2]) {
    c.h3[i] = h[i] + dt * dh[i];
    c.hsss[i] = detail::fb3(w.beta3, c.h3[i], c.h2[i], h[i]);
  }
  check_positive(c.h3, ext_.thickness[2], *labels_, 3, -1);
  sys_->momentum_on(c.u2, c.hsss, ext_.velocity[2], du);
  for (Index e : ext_.velocity[2])
    c.u3[e] = u[e] + dt * du[e];

  cache = InterfaceCache{};
  cache.cells = ext_.if1Cells;
  cache.edges = ext_.if1Edges;
  for (Index i : cache.cells) {
    cache.hn.push_back(h[i]);
    cache.h13.push_back(c.h1[i]);
    cache.h12.push_back(c.h2[i]);
    cache.h1.push_back(c.h3[i]);
  }
  for (Index e : cache.edges) {
    cache.un.push_back(u[e]);
    cache.u13.push_back(c.u1[e]);
    cache.u12.push_back(c.u2[e]);
    cache.u1.push_back(c.u3[e]);
  }
  cache.accCells = ext_.ifCells;
  cache.accEdges = ext_.ifEdges;
  cache.sumPsi.assign(cache.accCells.size(), 0.0);
  cache.sumPhi.assign(cache.accEdges.size(), 0.0);
  cache.summands = 0;
  return c;
}

void FbltsStepper::fine_advance(const State &s, const Fbrk32Stages &coarse,
                                InterfaceCache &cache, State &out,
                                FbltsStepRecord *rec) {
  const int M = cfg_.M;
  const double tau = cfg_.dt / M;
  const double a1 = tau / 3.0, a2 = tau / 2.0;
  const FBWeights &w = cfg_.weights;

  // IF2 and the coarse interior keep their coarse stage values for every k.
  std::vector<double> hk = s.h, uk = s.u;
  std::vector<double> h13 = coarse.h1, hstar = coarse.hstar, u13 = coarse.u1;
  std::vector<double> h12 = coarse.h2, hss = coarse.hss, u12 = coarse.u2;
  std::vector<double> hsss = coarse.hsss;
  std::vector<double> hnext = s.h, unext = s.u;
  std::vector<double> dh(hk.size()), du(uk.size());
  std::vector<double> accH(hk.size()), accU(uk.size());

  const auto &fc = ext_.fineCells;
  const auto &fe = ext_.fineEdges;
  const bool recordFlux = rec && rec->recordPvFlux;
  std::vector<double> frozenFlux;
  if (recordFlux) {
    rec->finePvFlux.clear();
    if (sys_->frozen())
      frozenFlux = pv_flux(sys_->mesh(), sys_->physics(), s.u, s.h);
  }
  if (rec) {
    rec->if1NextReads.clear();
    rec->predictions.clear();
  }

  for (int k = 0; k < M; ++k) {
    InterfacePrediction p = predict_interface(cache, k, M, w);
    for (std::size_t j = 0; j < cache.cells.size(); ++j) {
      Index i = cache.cells[j];
      hk[i] = p.h[j];
      h13[i] = p.h13[j];
      h12[i] = p.h12[j];
      hstar[i] = p.hstar[j];
      hss[i] = p.hss[j];
      hsss[i] = p.hsss[j];
    }
    for (std::size_t j = 0; j < cache.edges.size(); ++j) {
      Index e = cache.edges[j];
      uk[e] = p.u[j];
      u13[e] = p.u13[j];
      u12[e] = p.u12[j];
    }

    sys_->thickness_on(uk, hk, fc, dh);
    for (Index i : fc) {
      h13[i] = hk[i] + a1 * dh[i];
      hstar[i] = detail::fb2(w.beta1, h13[i], hk[i]);
    }
    check_positive(h13, fc, *labels_, 1, k);
    sys_->momentum_on(uk, hstar, fe, du);
    for (Index e : fe)
      u13[e] = uk[e] + a1 * du[e];

    sys_->thickness_on(u13, h13, fc, dh);
    for (Index i : fc) {
      h12[i] = hk[i] + a2 * dh[i];
      hss[i] = detail::fb2(w.beta2, h12[i], hk[i]);
    }
    check_positive(h12, fc, *labels_, 2, k);
    sys_->momentum_on(u13, hss, fe, du);
    for (Index e : fe)
      u12[e] = uk[e] + a2 * du[e];

    sys_->thickness_on(u12, h12, fc, dh);
    for (Index i : fc) {
      hnext[i] = hk[i] + tau * dh[i];
      hsss[i] = detail::fb3(w.beta3, hnext[i], h12[i], hk[i]);
    }
    check_positive(hnext, fc, *labels_, 3, k);
    sys_->momentum_on(u12, hsss, fe, du);
    for (Index e : fe)
      unext[e] = uk[e] + tau * du[e];

    sys_->thickness_on(u12, h12, cache.accCells, accH);
    for (std::size_t j = 0; j < cache.accCells.size(); ++j)
      cache.sumPsi[j] += accH[cache.accCells[j]];
    sys_->momentum_on(u12, hsss, cache.accEdges, accU);
    for (std::size_t j = 0; j < cache.accEdges.size(); ++j)
      cache.sumPhi[j] += accU[cache.accEdges[j]];
    ++cache.summands;

    if (recordFlux)
      rec->finePvFlux.push_back(
          sys_->frozen() ? frozenFlux
                         : pv_flux(sys_->mesh(), sys_->physics(), u12, hsss));
    if (rec) {
      rec->if1NextReads.push_back(p.hNext);
      if (rec->keepPredictions)
        rec->predictions.push_back(std::move(p));
    }

    for (Index i : fc)
      hk[i] = hnext[i];
    for (Index e : fe)
      uk[e] = unext[e];
  }

  for (Index i : fc)
    out.h[i] = hk[i];
  for (Index e : fe)
    out.u[e] = uk[e];
}

void FbltsStepper::correct_interface(const State &s,
                                     const InterfaceCache &cache,
                                     State &out) const {
  if (cache.summands != cfg_.M)
    throw std::logic_error("interface accumulators hold " +
                           std::to_string(cache.summands) + " summands, " +
                           "expected " + std::to_string(cfg_.M));
  const double tau = cfg_.dt / cfg_.M;
  for (std::size_t j = 0; j < cache.accCells.size(); ++j) {
    Index i = cache.accCells[j];
    out.h[i] = s.h[i] + tau * cache.sumPsi[j];
  }
  for (std::size_t j = 0; j < cache.accEdges.size(); ++j) {
    Index e = cache.accEdges[j];
    out.u[e] = s.u[e] + tau * cache.sumPhi[j];
  }
  check_positive(out.h, cache.accCells, *labels_, 4, -1);
}

State FbltsStepper::step(const State &s, FbltsStepRecord *rec) {
  if (s.h.size() != sys_->n_cells() || s.u.size() != sys_->n_edges())
    throw std::invalid_argument("state does not match the mesh");
  State out{s.h, s.u, s.t + cfg_.dt};
  InterfaceCache cache;
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  Fbrk32Stages coarse = coarse_advance(s, cache);
  for (Index i : ext_.intCells)
    out.h[i] = coarse.h3[i];
  for (Index e : ext_.intEdges)
    out.u[e] = coarse.u3[e];
  auto t1 = clock::now();
  fine_advance(s, coarse, cache, out, rec);
  auto t2 = clock::now();
  correct_interface(s, cache, out);
  auto t3 = clock::now();
  phaseSeconds_ = {std::chrono::duration<double>(t1 - t0).count(),
                   std::chrono::duration<double>(t2 - t1).count(),
                   std::chrono::duration<double>(t3 - t2).count()};

  if (rec && rec->recordPvFlux) {
    const Mesh &m = sys_->mesh();
    rec->coarsePvFlux = sys_->frozen()
                            ? pv_flux(m, sys_->physics(), s.u, s.h)
                            : pv_flux(m, sys_->physics(), coarse.u2,
                                      coarse.hsss);
  }
  return out;
}

WorkCounters FbltsStepper::expected_work() const {
  WorkCounters w;
  const std::uint64_t M = cfg_.M;
  for (int s = 0; s < 3; ++s) {
    w.fastCellEvals += ext_.thickness[s].size();
    w.fastEdgeEvals += ext_.velocity[s].size();
  }
  w.fastCellEvals += M * (3 * ext_.fineCells.size() + ext_.ifCells.size());
  w.fastEdgeEvals += M * (3 * ext_.fineEdges.size() + ext_.ifEdges.size());
  if (!sys_->frozen() && sys_->physics().slow_active())
    w.slowEdgeEvals = w.fastEdgeEvals;
  return w;
}

} // namespace fblts
