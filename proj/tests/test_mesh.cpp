#include <doctest.h>

#include <json.hpp>

#include "fblts/mesh.hpp"
#include "helpers.hpp"

using namespace fblts;
using namespace testing;

namespace {

int side_of(const Mesh &m, Index e, Index i) {
  return m.cellsOnEdge[e][0] == i ? 0 : 1;
}

// Dual divergence of F_perp and the kite average of the primal divergence,
// assembled straight from the sign and geometry arrays.
std::pair<std::vector<double>, std::vector<double>>
consistency_sides(const Mesh &m, const std::vector<double> &F) {
  std::vector<double> Fp = perp_flux(m, F);
  std::vector<double> div(m.nCells, 0.0);
  for (Index i = 0; i < m.nCells; ++i) {
    for (Index e : m.edgesOnCell[i])
      div[i] += m.nSign[e][side_of(m, e, i)] * m.lEdge[e] * F[e];
    div[i] /= m.areaCell[i];
  }
  std::vector<double> lhs(m.nVertices, 0.0), rhs(m.nVertices, 0.0);
  for (Index v = 0; v < m.nVertices; ++v) {
    for (Index e : m.edgesOnVertex[v]) {
      int k = m.verticesOnEdge[e][0] == v ? 0 : 1;
      lhs[v] += -m.tSign[e][k] * m.dEdge[e] * Fp[e];
    }
    lhs[v] /= m.areaDual[v];
    auto cells = m.cellsOnVertex[v];
    auto kites = m.kiteArea[v];
    for (std::size_t j = 0; j < cells.size(); ++j)
      rhs[v] += kites[j] * div[cells[j]];
    rhs[v] /= m.areaDual[v];
  }
  return {lhs, rhs};
}

} // namespace

TEST_CASE("hex mesh counts, areas and Euler characteristic") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  CHECK(m.nCells == 16);
  CHECK(m.nEdges == 48);
  CHECK(m.nVertices == 32);
  CHECK(m.nVertices - m.nEdges + m.nCells == 0);
  for (double a : m.areaCell)
    CHECK(a == doctest::Approx(8.660254037844386e5).epsilon(1e-12));
  double dual = 0.0, cell = 0.0;
  for (double a : m.areaDual)
    dual += a;
  for (double a : m.areaCell)
    cell += a;
  CHECK(cell == doctest::Approx(1.3856406460551018e7).epsilon(1e-12));
  CHECK(dual == doctest::Approx(cell).epsilon(1e-13));
  for (Index e = 0; e < m.nEdges; ++e) {
    CHECK(m.dEdge[e] == doctest::Approx(1000.0).epsilon(1e-13));
    CHECK(m.lEdge[e] == doctest::Approx(1000.0 / std::sqrt(3.0)).epsilon(1e-13));
  }
}

TEST_CASE("hex mesh sizing errors") {
  CHECK_THROWS_AS(build_periodic_hex_mesh(3, 4, 1000.0), MeshError);
  CHECK_THROWS_AS(build_periodic_hex_mesh(4, 3, 1000.0), MeshError);
  CHECK_THROWS_AS(build_periodic_hex_mesh(4, 4, 0.0), MeshError);
}

TEST_CASE("construction is deterministic and validates clean") {
  Mesh a = build_periodic_hex_mesh(6, 8, 2500.0);
  Mesh b = build_periodic_hex_mesh(6, 8, 2500.0);
  CHECK(a == b);
  ValidationReport rep = validate_mesh(a);
  for (const auto &c : rep.checks) {
    INFO(c.name);
    CHECK(c.passed);
  }
  CHECK(rep.boundaryEdges == 0);
  CHECK(rep.conservationHypothesis);
}

TEST_CASE("orientation conventions") {
  Mesh m = build_periodic_hex_mesh(6, 6, 1000.0);
  for (Index e = 0; e < m.nEdges; ++e) {
    CHECK(m.nSign[e][0] == 1);
    CHECK(m.nSign[e][1] == -1);
    CHECK(m.tSign[e][0] * m.tSign[e][1] == -1);
    // t = k x n, pointing from the first vertex to the second
    auto n = edge_normal(m, e);
    auto [v1, v2] = m.verticesOnEdge[e];
    double tx = periodic_delta(m.xVertex[v1], m.xVertex[v2], m.xPeriod);
    double ty = periodic_delta(m.yVertex[v1], m.yVertex[v2], m.yPeriod);
    CHECK(-n[1] * tx + n[0] * ty > 0.0);
  }
}

TEST_CASE("save and load round trip is exact") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  m.coriolisVertex.assign(m.nVertices, 1e-4);
  std::string text = mesh_to_json(m);
  Mesh back = mesh_from_json(text);
  CHECK(back == m);
  CHECK(mesh_to_json(back) == text);
}

TEST_CASE("load rejects sign and area violations, naming the field") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  auto doc = nlohmann::json::parse(mesh_to_json(m));

  auto bad = doc;
  bad["nSign"][7] = {1, 1};
  try {
    (void)mesh_from_json(bad.dump());
    FAIL("expected a MeshError");
  } catch (const MeshError &e) {
    CHECK(e.field() == "nSign");
    CHECK(e.index() == 7);
  }

  bad = doc;
  bad["kiteArea"][3][1] = bad["kiteArea"][3][1].get<double>() * 1.5;
  try {
    (void)mesh_from_json(bad.dump());
    FAIL("expected a MeshError");
  } catch (const MeshError &e) {
    CHECK(e.field() == "kiteArea");
  }

  bad = doc;
  bad["cellsOnEdge"][5][1] = 99;
  try {
    (void)mesh_from_json(bad.dump());
    FAIL("expected a MeshError");
  } catch (const MeshError &e) {
    CHECK(e.index() == 5);
  }

  bad = doc;
  bad.erase("areaDual");
  try {
    (void)mesh_from_json(bad.dump());
    FAIL("expected a MeshError");
  } catch (const MeshError &e) {
    CHECK(e.field() == "areaDual");
  }
}

TEST_CASE("perturbed perp weight fails antisymmetry at that pair") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  const Index e = 10;
  const Index ep = m.edgesOnEdge[e][2];
  m.perpWeights[e][2] += 1e-3;
  ValidationReport rep = validate_mesh(m);
  const InvariantCheck *c = rep.find("perpWeights");
  REQUIRE(c);
  CHECK_FALSE(c->passed);
  bool pair = (c->worstIndex == e && c->worstPartner == ep) ||
              (c->worstIndex == ep && c->worstPartner == e);
  CHECK(pair);
}

TEST_CASE("open boundary is detected") {
  Mesh m = build_periodic_hex_mesh(6, 6, 1000.0);
  const Index gone = 14;
  for (Index e : m.edgesOnCell[gone]) {
    auto &c = m.cellsOnEdge[e];
    (c[0] == gone ? c[0] : c[1]) = kNoIndex;
  }
  ValidationReport rep = validate_mesh(m);
  CHECK(rep.boundaryEdges == 6);
  CHECK_FALSE(rep.conservationHypothesis);
}

TEST_CASE("perp weights: antisymmetry matrix and uniform-PV consistency") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  // Dense l_e' w_ee' assembled and compared with its transpose.
  const Index n = m.nEdges;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  double big = 0.0;
  for (Index e = 0; e < n; ++e) {
    auto t = m.edgesOnEdge[e];
    auto w = m.perpWeights[e];
    for (std::size_t j = 0; j < t.size(); ++j) {
      A[e * n + t[j]] += m.lEdge[t[j]] * w[j];
      big = std::max(big, std::abs(m.lEdge[t[j]] * w[j]));
    }
  }
  double worst = 0.0;
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      worst = std::max(worst, std::abs(A[a * n + b] + A[b * n + a]));
  CHECK(worst <= 1e-14 * big);

  Mesh big16 = build_periodic_hex_mesh(16, 16, 1000.0);
  for (int k = 0; k < 20; ++k) {
    auto F = random_field(big16.nEdges, 100 + k);
    auto [lhs, rhs] = consistency_sides(big16, F);
    double d = 0.0;
    for (std::size_t v = 0; v < lhs.size(); ++v)
      d = std::max(d, std::abs(lhs[v] - rhs[v]));
    CHECK(d <= 1e-12 * max_abs(rhs));
  }

  auto zero = perp_flux(big16, std::vector<double>(big16.nEdges, 0.0));
  CHECK(max_abs(zero) == 0.0);
}

TEST_CASE("perp weights reject a non-triangular dual") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  Jagged<Index> cov;
  for (Index v = 0; v < m.nVertices; ++v) {
    auto row = m.cellsOnVertex[v];
    if (v == 3) {
      std::vector<Index> r(row.begin(), row.end());
      r.push_back(r.front());
      cov.push_row(std::span<const Index>(r));
    } else {
      cov.push_row(row);
    }
  }
  m.cellsOnVertex = cov;
  try {
    compute_perp_weights(m);
    FAIL("expected a MeshError");
  } catch (const MeshError &e) {
    CHECK(e.field() == "cellsOnVertex");
    CHECK(e.index() == 3);
  }
}
