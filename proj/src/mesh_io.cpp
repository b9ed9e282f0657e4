#include "fblts/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fblts {

namespace {

using nlohmann::json;

class Emitter {
public:
  void key(const char *name) {
    out_ << (first_ ? "\n  \"" : ",\n  \"") << name << "\": ";
    first_ = false;
  }
  void num(double x) {
    char buf[32];
    // "-0" would read back as the integer 0, losing the sign.
    if (x == 0.0 && std::signbit(x)) {
      out_ << "-0.0";
      return;
    }
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out_ << buf;
  }
  void num(Index x) { out_ << x; }

  template <class T> void list(const std::vector<T> &v) {
    out_ << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i)
        out_ << ',';
      num(v[i]);
    }
    out_ << ']';
  }
  template <class T, std::size_t N>
  void list(const std::vector<std::array<T, N>> &v) {
    out_ << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      out_ << (i ? ",[" : "[");
      for (std::size_t j = 0; j < N; ++j) {
        if (j)
          out_ << ',';
        num(v[i][j]);
      }
      out_ << ']';
    }
    out_ << ']';
  }
  template <class T> void list(const Jagged<T> &v) {
    out_ << '[';
    for (std::size_t i = 0; i < v.rows(); ++i) {
      out_ << (i ? ",[" : "[");
      auto row = v[i];
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j)
          out_ << ',';
        num(row[j]);
      }
      out_ << ']';
    }
    out_ << ']';
  }

  std::string finish() { return "{" + out_.str() + "\n}\n"; }

private:
  std::ostringstream out_;
  bool first_ = true;
};

const json &field(const json &doc, const char *name) {
  auto it = doc.find(name);
  if (it == doc.end())
    throw MeshError(name, kNoIndex, "missing field");
  return *it;
}

template <class T> T scalar(const json &doc, const char *name) {
  const json &j = field(doc, name);
  if (!j.is_number())
    throw MeshError(name, kNoIndex, "expected a number");
  return j.get<T>();
}

template <class T>
std::vector<T> flat(const json &doc, const char *name, std::size_t n) {
  const json &j = field(doc, name);
  if (!j.is_array() || j.size() != n)
    throw MeshError(name, static_cast<Index>(j.is_array() ? j.size() : 0),
                    "expected an array of length " + std::to_string(n));
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_number())
      throw MeshError(name, static_cast<Index>(i), "expected a number");
    out[i] = j[i].get<T>();
  }
  return out;
}

template <class T>
std::vector<std::array<T, 2>> pairs(const json &doc, const char *name,
                                    std::size_t n) {
  const json &j = field(doc, name);
  if (!j.is_array() || j.size() != n)
    throw MeshError(name, kNoIndex,
                    "expected an array of length " + std::to_string(n));
  std::vector<std::array<T, 2>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != 2)
      throw MeshError(name, static_cast<Index>(i), "expected a pair");
    for (std::size_t k = 0; k < 2; ++k)
      out[i][k] = j[i][k].get<T>();
  }
  return out;
}

template <class T>
Jagged<T> jagged(const json &doc, const char *name, std::size_t n) {
  const json &j = field(doc, name);
  if (!j.is_array() || j.size() != n)
    throw MeshError(name, kNoIndex,
                    "expected an array of length " + std::to_string(n));
  Jagged<T> out;
  std::vector<T> row;
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array())
      throw MeshError(name, static_cast<Index>(i), "expected an array");
    row.clear();
    for (const auto &x : j[i]) {
      if (!x.is_number())
        throw MeshError(name, static_cast<Index>(i), "expected a number");
      row.push_back(x.get<T>());
    }
    out.push_row(std::span<const T>(row));
  }
  return out;
}

void check_range(const char *name, std::span<const Index> idx, Index owner,
                 Index n, bool allowNone = false) {
  for (Index x : idx)
    if (!((x >= 0 && x < n) || (allowNone && x == kNoIndex)))
      throw MeshError(name, owner,
                      "index " + std::to_string(x) + " out of range");
}

} // namespace

std::string mesh_to_json(const Mesh &m) {
  Emitter w;
  w.key("nCells"), w.num(m.nCells);
  w.key("nEdges"), w.num(m.nEdges);
  w.key("nVertices"), w.num(m.nVertices);
  w.key("xPeriod"), w.num(m.xPeriod);
  w.key("yPeriod"), w.num(m.yPeriod);
  w.key("xCell"), w.list(m.xCell);
  w.key("yCell"), w.list(m.yCell);
  w.key("xEdge"), w.list(m.xEdge);
  w.key("yEdge"), w.list(m.yEdge);
  w.key("angleEdge"), w.list(m.angleEdge);
  w.key("xVertex"), w.list(m.xVertex);
  w.key("yVertex"), w.list(m.yVertex);
  w.key("cellsOnEdge"), w.list(m.cellsOnEdge);
  w.key("verticesOnEdge"), w.list(m.verticesOnEdge);
  w.key("edgesOnCell"), w.list(m.edgesOnCell);
  w.key("verticesOnCell"), w.list(m.verticesOnCell);
  w.key("edgesOnVertex"), w.list(m.edgesOnVertex);
  w.key("cellsOnVertex"), w.list(m.cellsOnVertex);
  w.key("areaCell"), w.list(m.areaCell);
  w.key("areaDual"), w.list(m.areaDual);
  w.key("kiteArea"), w.list(m.kiteArea);
  w.key("lEdge"), w.list(m.lEdge);
  w.key("dEdge"), w.list(m.dEdge);
  w.key("nSign"), w.list(m.nSign);
  w.key("tSign"), w.list(m.tSign);
  w.key("edgeSignOnCell"), w.list(m.edgeSignOnCell);
  w.key("edgeSignOnVertex"), w.list(m.edgeSignOnVertex);
  w.key("edgesOnEdge"), w.list(m.edgesOnEdge);
  w.key("perpWeights"), w.list(m.perpWeights);
  w.key("bottomElevation"), w.list(m.bottomElevation);
  w.key("restingDepth"), w.list(m.restingDepth);
  w.key("coriolisVertex"), w.list(m.coriolisVertex);
  return w.finish();
}

void save_mesh(const Mesh &mesh, const std::string &path) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << mesh_to_json(mesh);
  if (!f)
    throw std::runtime_error("write failed: " + path);
}

Mesh mesh_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw MeshError("<document>", kNoIndex, e.what());
  }
  if (!doc.is_object())
    throw MeshError("<document>", kNoIndex, "expected an object");

  Mesh m;
  m.nCells = scalar<Index>(doc, "nCells");
  m.nEdges = scalar<Index>(doc, "nEdges");
  m.nVertices = scalar<Index>(doc, "nVertices");
  if (m.nCells <= 0 || m.nEdges <= 0 || m.nVertices <= 0)
    throw MeshError("nCells", kNoIndex, "counts must be positive");
  const auto nC = static_cast<std::size_t>(m.nCells);
  const auto nE = static_cast<std::size_t>(m.nEdges);
  const auto nV = static_cast<std::size_t>(m.nVertices);

  m.xPeriod = scalar<double>(doc, "xPeriod");
  m.yPeriod = scalar<double>(doc, "yPeriod");
  m.xCell = flat<double>(doc, "xCell", nC);
  m.yCell = flat<double>(doc, "yCell", nC);
  m.xEdge = flat<double>(doc, "xEdge", nE);
  m.yEdge = flat<double>(doc, "yEdge", nE);
  m.angleEdge = flat<double>(doc, "angleEdge", nE);
  m.xVertex = flat<double>(doc, "xVertex", nV);
  m.yVertex = flat<double>(doc, "yVertex", nV);
  m.cellsOnEdge = pairs<Index>(doc, "cellsOnEdge", nE);
  m.verticesOnEdge = pairs<Index>(doc, "verticesOnEdge", nE);
  m.edgesOnCell = jagged<Index>(doc, "edgesOnCell", nC);
  m.verticesOnCell = jagged<Index>(doc, "verticesOnCell", nC);
  m.edgesOnVertex = jagged<Index>(doc, "edgesOnVertex", nV);
  m.cellsOnVertex = jagged<Index>(doc, "cellsOnVertex", nV);
  m.areaCell = flat<double>(doc, "areaCell", nC);
  m.areaDual = flat<double>(doc, "areaDual", nV);
  m.kiteArea = jagged<double>(doc, "kiteArea", nV);
  m.lEdge = flat<double>(doc, "lEdge", nE);
  m.dEdge = flat<double>(doc, "dEdge", nE);
  m.nSign = pairs<int>(doc, "nSign", nE);
  m.tSign = pairs<int>(doc, "tSign", nE);
  m.edgeSignOnCell = jagged<int>(doc, "edgeSignOnCell", nC);
  m.edgeSignOnVertex = jagged<int>(doc, "edgeSignOnVertex", nV);
  m.edgesOnEdge = jagged<Index>(doc, "edgesOnEdge", nE);
  m.perpWeights = jagged<double>(doc, "perpWeights", nE);
  m.bottomElevation = flat<double>(doc, "bottomElevation", nC);
  m.restingDepth = flat<double>(doc, "restingDepth", nC);
  m.coriolisVertex = flat<double>(doc, "coriolisVertex", nV);

  for (Index e = 0; e < m.nEdges; ++e) {
    check_range("cellsOnEdge", m.cellsOnEdge[e], e, m.nCells, true);
    check_range("verticesOnEdge", m.verticesOnEdge[e], e, m.nVertices);
    check_range("edgesOnEdge", m.edgesOnEdge[e], e, m.nEdges);
    if (m.perpWeights[e].size() != m.edgesOnEdge[e].size())
      throw MeshError("perpWeights", e, "row length differs from edgesOnEdge");
  }
  for (Index i = 0; i < m.nCells; ++i) {
    check_range("edgesOnCell", m.edgesOnCell[i], i, m.nEdges);
    check_range("verticesOnCell", m.verticesOnCell[i], i, m.nVertices);
    if (m.edgeSignOnCell[i].size() != m.edgesOnCell[i].size())
      throw MeshError("edgeSignOnCell", i, "row length differs from edgesOnCell");
  }
  for (Index v = 0; v < m.nVertices; ++v) {
    check_range("edgesOnVertex", m.edgesOnVertex[v], v, m.nEdges);
    check_range("cellsOnVertex", m.cellsOnVertex[v], v, m.nCells, true);
    if (m.kiteArea[v].size() != m.cellsOnVertex[v].size())
      throw MeshError("kiteArea", v, "row length differs from cellsOnVertex");
  }

  ValidationReport rep = validate_mesh(m);
  for (const auto &c : rep.checks)
    if (!c.passed)
      throw MeshError(c.name, c.worstIndex,
                      "invariant violated (magnitude " +
                          std::to_string(c.worstMagnitude) + ")");
  return m;
}

Mesh load_mesh(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw MeshError("<file>", kNoIndex, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return mesh_from_json(ss.str());
}

} // namespace fblts
