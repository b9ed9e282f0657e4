#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fblts {

using Index = std::int32_t;
inline constexpr Index kNoIndex = -1;

/// Compressed row storage for per-element variable-length lists
/// (edges of a cell, cells around a vertex, ...).
template <class T> class Jagged {
public:
  Jagged() : offsets_{0} {}

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t total() const { return values_.size(); }

  std::span<const T> operator[](std::size_t row) const {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<T> operator[](std::size_t row) {
    return {values_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  void push_row(std::span<const T> row) {
    values_.insert(values_.end(), row.begin(), row.end());
    offsets_.push_back(values_.size());
  }
  void push_row(std::initializer_list<T> row) {
    push_row(std::span<const T>(row.begin(), row.size()));
  }

  void clear() {
    offsets_.assign(1, 0);
    values_.clear();
  }

  const std::vector<T> &values() const { return values_; }
  std::vector<T> &values() { return values_; }

  bool operator==(const Jagged &) const = default;

private:
  std::vector<std::size_t> offsets_;
  std::vector<T> values_;
};

class MeshError : public std::runtime_error {
public:
  MeshError(std::string field, Index index, const std::string &what)
      : std::runtime_error(field + "[" + std::to_string(index) + "]: " + what),
        field_(std::move(field)), index_(index) {}

  const std::string &field() const { return field_; }
  Index index() const { return index_; }

private:
  std::string field_;
  Index index_;
};

/// TRiSK staggered mesh: thickness at cell centers, normal velocity at edges,
/// vorticity at vertices (dual cells).
///
/// Orientation: n_e points from cellsOnEdge[e][0] to cellsOnEdge[e][1], so
/// nSign[e] = {+1, -1}. t_e = k x n_e and tSign[e][j] = +1 when t_e points
/// into verticesOnEdge[e][j]. edgesOnCell and verticesOnCell are in
/// counterclockwise order with verticesOnCell[i][j] lying between
/// edgesOnCell[i][j] and edgesOnCell[i][j+1]. kiteArea is aligned with
/// cellsOnVertex. A boundary edge carries kNoIndex as its second cell.
struct Mesh {
  Index nCells = 0;
  Index nEdges = 0;
  Index nVertices = 0;

  // Extents of the doubly periodic domain; zero means not periodic.
  double xPeriod = 0.0;
  double yPeriod = 0.0;

  std::vector<double> xCell, yCell;
  std::vector<double> xEdge, yEdge, angleEdge;
  std::vector<double> xVertex, yVertex;

  std::vector<std::array<Index, 2>> cellsOnEdge;
  std::vector<std::array<Index, 2>> verticesOnEdge;
  Jagged<Index> edgesOnCell;
  Jagged<Index> verticesOnCell;
  Jagged<Index> edgesOnVertex;
  Jagged<Index> cellsOnVertex;

  std::vector<double> areaCell;
  std::vector<double> areaDual;
  Jagged<double> kiteArea;
  std::vector<double> lEdge;
  std::vector<double> dEdge;

  std::vector<std::array<int, 2>> nSign;
  std::vector<std::array<int, 2>> tSign;
  Jagged<int> edgeSignOnCell;
  Jagged<int> edgeSignOnVertex;

  Jagged<Index> edgesOnEdge;
  Jagged<double> perpWeights;

  std::vector<double> bottomElevation;
  std::vector<double> restingDepth;
  std::vector<double> coriolisVertex;

  bool periodic() const { return xPeriod > 0.0 && yPeriod > 0.0; }

  bool operator==(const Mesh &) const = default;
};

/// Doubly periodic mesh of regular hexagons with spacing dc between cell
/// centers. Requires nx >= 4, ny >= 4 and ny even.
Mesh build_periodic_hex_mesh(Index nx, Index ny, double dc,
                             double restingDepth = 1000.0);

/// Perp-flux weights by the kite-fraction construction. Fills
/// mesh.edgesOnEdge / mesh.perpWeights such that
/// F_perp[e] = sum_j perpWeights[e][j] * F[edgesOnEdge[e][j]]
/// is the thickness flux along t_e across the dual edge of e.
void compute_perp_weights(Mesh &mesh);

/// Cells sharing an edge with each cell, in edgesOnCell order.
Jagged<Index> cell_neighbors(const Mesh &mesh);

/// Periodic displacement from a to b along one axis.
double periodic_delta(double a, double b, double period);

struct InvariantCheck {
  std::string name;
  bool passed = true;
  Index worstIndex = kNoIndex;
  Index worstPartner = kNoIndex;
  double worstMagnitude = 0.0;
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;
  Index boundaryEdges = 0;
  // No open boundaries, so the exact conservation arguments apply.
  bool conservationHypothesis = true;

  bool all_passed() const;
  const InvariantCheck *find(const std::string &name) const;
};

ValidationReport validate_mesh(const Mesh &mesh);

void save_mesh(const Mesh &mesh, const std::string &path);
std::string mesh_to_json(const Mesh &mesh);

/// Parses and validates; throws MeshError naming the offending field and index.
Mesh load_mesh(const std::string &path);
Mesh mesh_from_json(const std::string &text);

} // namespace fblts
