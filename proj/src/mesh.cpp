#include "fblts/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fblts {

namespace {

using Vec2 = std::array<double, 2>;

Index wrap(Index i, Index n) { return ((i % n) + n) % n; }

double shoelace(const std::vector<Vec2> &p) {
  double a = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vec2 &p0 = p[k];
    const Vec2 &p1 = p[(k + 1) % p.size()];
    a += p0[0] * p1[1] - p1[0] * p0[1];
  }
  return 0.5 * a;
}

struct Unwrapper {
  double xP, yP;
  Vec2 operator()(double x0, double y0, double x, double y) const {
    return {periodic_delta(x0, x, xP), periodic_delta(y0, y, yP)};
  }
};

double wrap_coord(double x, double P) {
  if (P <= 0.0)
    return x;
  double r = std::fmod(x, P);
  return r < 0.0 ? r + P : r;
}

// Everything below the connectivity (edgesOnCell, verticesOnCell,
// cellsOnEdge, verticesOnEdge) is recomputed here from coordinates.
void finalize_geometry(Mesh &m) {
  const Unwrapper rel{m.xPeriod, m.yPeriod};
  const auto nC = static_cast<std::size_t>(m.nCells);
  const auto nE = static_cast<std::size_t>(m.nEdges);
  const auto nV = static_cast<std::size_t>(m.nVertices);

  m.xEdge.assign(nE, 0.0);
  m.yEdge.assign(nE, 0.0);
  m.angleEdge.assign(nE, 0.0);
  m.lEdge.assign(nE, 0.0);
  m.dEdge.assign(nE, 0.0);
  m.nSign.assign(nE, {1, -1});
  m.tSign.assign(nE, {-1, 1});

  for (std::size_t e = 0; e < nE; ++e) {
    auto [c1, c2] = m.cellsOnEdge[e];
    Vec2 dc = rel(m.xCell[c1], m.yCell[c1], m.xCell[c2], m.yCell[c2]);
    double d = std::hypot(dc[0], dc[1]);
    Vec2 n{dc[0] / d, dc[1] / d};
    Vec2 t{-n[1], n[0]};

    auto &ve = m.verticesOnEdge[e];
    Vec2 a = rel(m.xCell[c1], m.yCell[c1], m.xVertex[ve[0]], m.yVertex[ve[0]]);
    Vec2 b = rel(m.xCell[c1], m.yCell[c1], m.xVertex[ve[1]], m.yVertex[ve[1]]);
    if ((b[0] - a[0]) * t[0] + (b[1] - a[1]) * t[1] < 0.0) {
      std::swap(ve[0], ve[1]);
      std::swap(a, b);
    }
    m.dEdge[e] = d;
    m.lEdge[e] = std::hypot(b[0] - a[0], b[1] - a[1]);
    m.angleEdge[e] = std::atan2(n[1], n[0]);
    m.xEdge[e] = wrap_coord(m.xCell[c1] + 0.5 * (a[0] + b[0]), m.xPeriod);
    m.yEdge[e] = wrap_coord(m.yCell[c1] + 0.5 * (a[1] + b[1]), m.yPeriod);
  }

  m.edgeSignOnCell.clear();
  m.areaCell.assign(nC, 0.0);
  std::vector<std::vector<Index>> cellsAt(nV);
  std::vector<std::vector<double>> kitesAt(nV);
  for (std::size_t i = 0; i < nC; ++i) {
    auto edges = m.edgesOnCell[i];
    auto verts = m.verticesOnCell[i];
    std::vector<int> signs(edges.size());
    std::vector<Vec2> ring;
    for (std::size_t j = 0; j < edges.size(); ++j) {
      signs[j] = m.cellsOnEdge[edges[j]][0] == static_cast<Index>(i) ? 1 : -1;
      ring.push_back(rel(m.xCell[i], m.yCell[i], m.xVertex[verts[j]],
                         m.yVertex[verts[j]]));
    }
    m.edgeSignOnCell.push_row(std::span<const int>(signs));
    m.areaCell[i] = shoelace(ring);

    for (std::size_t j = 0; j < verts.size(); ++j) {
      Index e0 = edges[j];
      Index e1 = edges[(j + 1) % edges.size()];
      Vec2 m0 = rel(m.xCell[i], m.yCell[i], m.xEdge[e0], m.yEdge[e0]);
      Vec2 m1 = rel(m.xCell[i], m.yCell[i], m.xEdge[e1], m.yEdge[e1]);
      double kite = shoelace({{0.0, 0.0}, m0, ring[j], m1});
      cellsAt[verts[j]].push_back(static_cast<Index>(i));
      kitesAt[verts[j]].push_back(kite);
    }
  }

  std::vector<std::vector<Index>> edgesAt(nV);
  for (std::size_t e = 0; e < nE; ++e)
    for (Index v : m.verticesOnEdge[e])
      edgesAt[v].push_back(static_cast<Index>(e));

  m.cellsOnVertex.clear();
  m.kiteArea.clear();
  m.edgesOnVertex.clear();
  m.edgeSignOnVertex.clear();
  m.areaDual.assign(nV, 0.0);
  for (std::size_t v = 0; v < nV; ++v) {
    auto angle = [&](double x, double y) {
      Vec2 p = rel(m.xVertex[v], m.yVertex[v], x, y);
      return std::atan2(p[1], p[0]);
    };
    std::vector<std::size_t> order(cellsAt[v].size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return angle(m.xCell[cellsAt[v][a]], m.yCell[cellsAt[v][a]]) <
             angle(m.xCell[cellsAt[v][b]], m.yCell[cellsAt[v][b]]);
    });
    std::vector<Index> cells;
    std::vector<double> kites;
    for (std::size_t k : order) {
      cells.push_back(cellsAt[v][k]);
      kites.push_back(kitesAt[v][k]);
      m.areaDual[v] += kitesAt[v][k];
    }
    m.cellsOnVertex.push_row(std::span<const Index>(cells));
    m.kiteArea.push_row(std::span<const double>(kites));

    auto &ev = edgesAt[v];
    std::sort(ev.begin(), ev.end(), [&](Index a, Index b) {
      return angle(m.xEdge[a], m.yEdge[a]) < angle(m.xEdge[b], m.yEdge[b]);
    });
    std::vector<int> signs;
    for (Index e : ev)
      signs.push_back(m.verticesOnEdge[e][1] == static_cast<Index>(v) ? 1 : -1);
    m.edgesOnVertex.push_row(std::span<const Index>(ev));
    m.edgeSignOnVertex.push_row(std::span<const int>(signs));
  }
}

} // namespace

double periodic_delta(double a, double b, double period) {
  double d = b - a;
  if (period > 0.0)
    d -= period * std::round(d / period);
  return d;
}

Mesh build_periodic_hex_mesh(Index nx, Index ny, double dc,
                             double restingDepth) {
  if (nx < 4 || ny < 4)
    throw MeshError(nx < 4 ? "nx" : "ny", nx < 4 ? nx : ny,
                    "hex mesh needs at least 4 cells per direction");
  if (ny % 2 != 0)
    throw MeshError("ny", ny, "row count must be even to wrap periodically");
  if (!(dc > 0.0) || !std::isfinite(dc))
    throw MeshError("dc", kNoIndex, "cell spacing must be positive");

  static constexpr int kEven[6][2] = {{1, 0},  {0, 1},   {-1, 1},
                                      {-1, 0}, {-1, -1}, {0, -1}};
  static constexpr int kOdd[6][2] = {{1, 0},  {1, 1},  {0, 1},
                                     {-1, 0}, {0, -1}, {1, -1}};
  auto nbr = [&](Index c, int d) {
    Index row = c / nx, col = c % nx;
    const int *off = (row % 2 == 0) ? kEven[d] : kOdd[d];
    return wrap(row + off[1], ny) * nx + wrap(col + off[0], nx);
  };

  Mesh m;
  m.nCells = nx * ny;
  m.nEdges = 3 * m.nCells;
  m.nVertices = 2 * m.nCells;
  m.xPeriod = nx * dc;
  m.yPeriod = ny * dc * std::sqrt(3.0) / 2.0;

  const double rv = dc / std::sqrt(3.0);
  for (Index c = 0; c < m.nCells; ++c) {
    Index row = c / nx, col = c % nx;
    double x = dc * (col + 0.5 * (row % 2));
    double y = row * dc * std::sqrt(3.0) / 2.0;
    m.xCell.push_back(x);
    m.yCell.push_back(y);
    m.xVertex.push_back(wrap_coord(x + 0.5 * dc, m.xPeriod));
    m.yVertex.push_back(wrap_coord(y + 0.5 * rv, m.yPeriod));
    m.xVertex.push_back(wrap_coord(x, m.xPeriod));
    m.yVertex.push_back(wrap_coord(y + rv, m.yPeriod));
  }

  // Vertex slot j sits at 30 + 60j degrees from the center.
  auto slot = [&](Index c, int j) -> Index {
    switch (j) {
    case 0: return 2 * c;
    case 1: return 2 * c + 1;
    case 2: return 2 * nbr(c, 3);
    case 3: return 2 * nbr(c, 4) + 1;
    case 4: return 2 * nbr(c, 4);
    default: return 2 * nbr(c, 5) + 1;
    }
  };

  for (Index c = 0; c < m.nCells; ++c) {
    for (int d = 0; d < 3; ++d) {
      m.cellsOnEdge.push_back({c, nbr(c, d)});
      m.verticesOnEdge.push_back({slot(c, (d + 5) % 6), slot(c, d)});
    }
    m.edgesOnCell.push_row({3 * c, 3 * c + 1, 3 * c + 2, 3 * nbr(c, 3),
                            3 * nbr(c, 4) + 1, 3 * nbr(c, 5) + 2});
    m.verticesOnCell.push_row({slot(c, 0), slot(c, 1), slot(c, 2), slot(c, 3),
                               slot(c, 4), slot(c, 5)});
  }

  finalize_geometry(m);
  // The mesh is regular, so replace the metrics recovered from coordinates
  // (which carry roundoff growing with the domain size) by exact values.
  const double area = dc * dc * std::sqrt(3.0) / 2.0;
  m.dEdge.assign(m.nEdges, dc);
  m.lEdge.assign(m.nEdges, rv);
  m.areaCell.assign(m.nCells, area);
  m.areaDual.assign(m.nVertices, area / 2.0);
  std::fill(m.kiteArea.values().begin(), m.kiteArea.values().end(), area / 6.0);
  compute_perp_weights(m);

  m.bottomElevation.assign(m.nCells, 0.0);
  m.restingDepth.assign(m.nCells, restingDepth);
  m.coriolisVertex.assign(m.nVertices, 0.0);
  return m;
}

void compute_perp_weights(Mesh &m) {
  for (Index v = 0; v < m.nVertices; ++v)
    if (m.cellsOnVertex[v].size() != 3)
      throw MeshError("cellsOnVertex", v,
                      "perp weights need a triangular dual (degree 3)");

  // Fractions are taken against the kite total of each cell rather than
  // areaCell, so they sum to one to rounding and the weights stay
  // antisymmetric even when the areas carry coordinate roundoff.
  std::vector<double> kiteTotal(m.nCells, 0.0);
  for (Index v = 0; v < m.nVertices; ++v) {
    auto cells = m.cellsOnVertex[v];
    for (std::size_t k = 0; k < cells.size(); ++k)
      kiteTotal[cells[k]] += m.kiteArea[v][k];
  }

  auto kite_fraction = [&](Index v, Index i) {
    auto cells = m.cellsOnVertex[v];
    for (std::size_t k = 0; k < cells.size(); ++k)
      if (cells[k] == i)
        return m.kiteArea[v][k] / kiteTotal[i];
    throw MeshError("cellsOnVertex", v, "vertex does not touch its cell");
  };

  m.edgesOnEdge.clear();
  m.perpWeights.clear();
  for (Index e = 0; e < m.nEdges; ++e) {
    std::vector<Index> targets;
    std::vector<double> weights;
    for (int side = 0; side < 2; ++side) {
      Index i = m.cellsOnEdge[e][side];
      if (i == kNoIndex)
        continue;
      auto edges = m.edgesOnCell[i];
      auto verts = m.verticesOnCell[i];
      auto signs = m.edgeSignOnCell[i];
      const std::size_t n = edges.size();
      std::size_t j0 = 0;
      while (j0 < n && edges[j0] != e)
        ++j0;
      if (j0 == n)
        throw MeshError("edgesOnCell", i, "edge missing from its cell");

      // Walk counterclockwise from e, summing the kite fractions passed.
      double passed = 0.0;
      for (std::size_t s = 1; s < n; ++s) {
        passed += kite_fraction(verts[(j0 + s - 1) % n], i);
        std::size_t j = (j0 + s) % n;
        Index ep = edges[j];
        targets.push_back(ep);
        weights.push_back(signs[j0] * signs[j] * (0.5 - passed) *
                          m.lEdge[ep] / m.dEdge[e]);
      }
    }
    m.edgesOnEdge.push_row(std::span<const Index>(targets));
    m.perpWeights.push_row(std::span<const double>(weights));
  }
}

Jagged<Index> cell_neighbors(const Mesh &m) {
  Jagged<Index> out;
  std::vector<Index> row;
  for (Index i = 0; i < m.nCells; ++i) {
    row.clear();
    for (Index e : m.edgesOnCell[i]) {
      auto [a, b] = m.cellsOnEdge[e];
      Index other = a == i ? b : a;
      if (other != kNoIndex)
        row.push_back(other);
    }
    out.push_row(std::span<const Index>(row));
  }
  return out;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantCheck &c) { return c.passed; });
}

const InvariantCheck *ValidationReport::find(const std::string &name) const {
  for (const auto &c : checks)
    if (c.name == name)
      return &c;
  return nullptr;
}

ValidationReport validate_mesh(const Mesh &m) {
  ValidationReport rep;
  const auto nC = static_cast<std::size_t>(m.nCells);
  const auto nE = static_cast<std::size_t>(m.nEdges);
  const auto nV = static_cast<std::size_t>(m.nVertices);

  InvariantCheck sizes{"counts"};
  auto expect = [&](std::size_t got, std::size_t want, Index tag) {
    if (got != want && sizes.passed) {
      sizes.passed = false;
      sizes.worstIndex = tag;
      sizes.worstMagnitude =
          std::abs(static_cast<double>(got) - static_cast<double>(want));
    }
  };
  Index tag = 0;
  for (std::size_t s : {m.xCell.size(), m.yCell.size(), m.areaCell.size(),
                        m.edgesOnCell.rows(), m.verticesOnCell.rows(),
                        m.edgeSignOnCell.rows(), m.bottomElevation.size(),
                        m.restingDepth.size()})
    expect(s, nC, tag++);
  for (std::size_t s : {m.cellsOnEdge.size(), m.verticesOnEdge.size(),
                        m.lEdge.size(), m.dEdge.size(), m.nSign.size(),
                        m.tSign.size(), m.edgesOnEdge.rows(),
                        m.perpWeights.rows()})
    expect(s, nE, tag++);
  for (std::size_t s : {m.areaDual.size(), m.edgesOnVertex.rows(),
                        m.cellsOnVertex.rows(), m.kiteArea.rows(),
                        m.coriolisVertex.size()})
    expect(s, nV, tag++);
  rep.checks.push_back(sizes);
  if (!sizes.passed)
    return rep;

  InvariantCheck range{"indices"};
  auto in = [&](Index x, Index n, Index owner, bool allowNone = false) {
    bool ok = (x >= 0 && x < n) || (allowNone && x == kNoIndex);
    if (!ok && range.passed) {
      range.passed = false;
      range.worstIndex = owner;
      range.worstMagnitude = x;
    }
  };
  for (Index e = 0; e < m.nEdges; ++e) {
    in(m.cellsOnEdge[e][0], m.nCells, e, true);
    in(m.cellsOnEdge[e][1], m.nCells, e, true);
    in(m.verticesOnEdge[e][0], m.nVertices, e);
    in(m.verticesOnEdge[e][1], m.nVertices, e);
    for (Index x : m.edgesOnEdge[e])
      in(x, m.nEdges, e);
    if (m.edgesOnEdge[e].size() != m.perpWeights[e].size())
      in(kNoIndex, 0, e);
  }
  for (Index i = 0; i < m.nCells; ++i) {
    for (Index x : m.edgesOnCell[i])
      in(x, m.nEdges, i);
    for (Index x : m.verticesOnCell[i])
      in(x, m.nVertices, i);
  }
  for (Index v = 0; v < m.nVertices; ++v) {
    for (Index x : m.edgesOnVertex[v])
      in(x, m.nEdges, v);
    for (Index x : m.cellsOnVertex[v])
      in(x, m.nCells, v, true);
    if (m.cellsOnVertex[v].size() != m.kiteArea[v].size())
      in(kNoIndex, 0, v);
  }
  rep.checks.push_back(range);
  if (!range.passed)
    return rep;

  InvariantCheck nsign{"nSign"}, tsign{"tSign"};
  for (Index e = 0; e < m.nEdges; ++e) {
    auto [c1, c2] = m.cellsOnEdge[e];
    if (c1 == kNoIndex || c2 == kNoIndex) {
      ++rep.boundaryEdges;
    } else if (m.nSign[e][0] != 1 || m.nSign[e][1] != -1) {
      if (nsign.passed) {
        nsign.passed = false;
        nsign.worstIndex = e;
        nsign.worstMagnitude = m.nSign[e][0] * m.nSign[e][1];
      }
    }
    if (m.tSign[e][0] * m.tSign[e][1] != -1 && tsign.passed) {
      tsign.passed = false;
      tsign.worstIndex = e;
      tsign.worstMagnitude = m.tSign[e][0] * m.tSign[e][1];
    }
  }
  rep.checks.push_back(nsign);
  rep.checks.push_back(tsign);
  rep.conservationHypothesis = rep.boundaryEdges == 0;

  InvariantCheck membership{"edgesOnCell"};
  std::vector<int> seen(nE, 0);
  for (Index i = 0; i < m.nCells; ++i) {
    auto edges = m.edgesOnCell[i];
    auto signs = m.edgeSignOnCell[i];
    for (std::size_t j = 0; j < edges.size(); ++j) {
      Index e = edges[j];
      auto cells = m.cellsOnEdge[e];
      int side = cells[0] == i ? 0 : (cells[1] == i ? 1 : -1);
      bool ok = side >= 0 && signs.size() == edges.size() &&
                signs[j] == m.nSign[e][side];
      ++seen[e];
      if (!ok && membership.passed) {
        membership.passed = false;
        membership.worstIndex = e;
        membership.worstPartner = i;
        membership.worstMagnitude = 1.0;
      }
    }
  }
  for (Index e = 0; e < m.nEdges && membership.passed; ++e) {
    int want = (m.cellsOnEdge[e][0] != kNoIndex) +
               (m.cellsOnEdge[e][1] != kNoIndex);
    if (seen[e] != want) {
      membership.passed = false;
      membership.worstIndex = e;
      membership.worstMagnitude = std::abs(seen[e] - want);
    }
  }
  rep.checks.push_back(membership);

  InvariantCheck areas{"kiteArea"};
  double sumCell = 0.0, sumDual = 0.0, sumKite = 0.0;
  for (double a : m.areaCell)
    sumCell += a;
  for (double a : m.areaDual)
    sumDual += a;
  for (double a : m.kiteArea.values())
    sumKite += a;
  double gapDual = std::abs(sumDual - sumCell) / std::abs(sumCell);
  double gapKite = std::abs(sumKite - sumCell) / std::abs(sumCell);
  areas.worstMagnitude = std::max(gapDual, gapKite);
  areas.passed = areas.worstMagnitude <= 1e-10;
  rep.checks.push_back(areas);

  InvariantCheck euler{"euler"};
  if (m.periodic() && rep.boundaryEdges == 0) {
    euler.worstMagnitude = std::abs(m.nVertices - m.nEdges + m.nCells);
    euler.passed = euler.worstMagnitude == 0.0;
  }
  rep.checks.push_back(euler);

  // Residual of l_e' w_ee' + l_e w_e'e for every stored pair, relative to
  // the largest entry (the opposite-edge weights are zero up to rounding).
  InvariantCheck anti{"perpWeights"};
  double big = 0.0;
  for (Index e = 0; e < m.nEdges; ++e) {
    auto targets = m.edgesOnEdge[e];
    auto w = m.perpWeights[e];
    for (std::size_t j = 0; j < targets.size(); ++j)
      big = std::max(big, std::abs(m.lEdge[targets[j]] * w[j]));
  }
  auto entry = [&](Index e, Index ep) {
    double s = 0.0;
    auto t = m.edgesOnEdge[e];
    for (std::size_t k = 0; k < t.size(); ++k)
      if (t[k] == ep)
        s += m.lEdge[ep] * m.perpWeights[e][k];
    return s;
  };
  for (Index e = 0; e < m.nEdges && big > 0.0; ++e) {
    for (Index ep : m.edgesOnEdge[e]) {
      double r = std::abs(entry(e, ep) + entry(ep, e)) / big;
      if (r > anti.worstMagnitude) {
        anti.worstMagnitude = r;
        anti.worstIndex = e;
        anti.worstPartner = ep;
      }
    }
  }
  anti.passed = anti.worstMagnitude <= 1e-10;
  rep.checks.push_back(anti);

  return rep;
}

} // namespace fblts
