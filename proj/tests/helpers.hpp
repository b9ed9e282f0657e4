#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fblts/mesh.hpp"
#include "fblts/operators.hpp"

namespace testing {

using namespace fblts;

inline std::vector<double> random_field(std::size_t n, std::uint64_t seed,
                                        double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (double &x : v)
    x = U(rng);
  return v;
}

inline State random_state(const Mesh &m, std::uint64_t seed, double H = 100.0,
                          double dh = 1.0, double du = 1.0) {
  State s;
  s.h = random_field(m.nCells, seed, H - dh, H + dh);
  s.u = random_field(m.nEdges, seed + 1, -du, du);
  return s;
}

// Unit normal of an edge from the displacement between its cell centers.
inline std::array<double, 2> edge_normal(const Mesh &m, Index e) {
  auto [a, b] = m.cellsOnEdge[e];
  double dx = periodic_delta(m.xCell[a], m.xCell[b], m.xPeriod);
  double dy = periodic_delta(m.yCell[a], m.yCell[b], m.yPeriod);
  double r = std::hypot(dx, dy);
  return {dx / r, dy / r};
}

// Normal components of a constant vector field.
inline std::vector<double> uniform_flow(const Mesh &m, double U, double V) {
  std::vector<double> u(m.nEdges);
  for (Index e = 0; e < m.nEdges; ++e) {
    auto n = edge_normal(m, e);
    u[e] = U * n[0] + V * n[1];
  }
  return u;
}

inline double max_abs(const std::vector<double> &v) {
  double r = 0.0;
  for (double x : v)
    r = std::max(r, std::abs(x));
  return r;
}

// max |a - b| relative to the larger field maximum.
inline double max_rel_diff(const std::vector<double> &a,
                           const std::vector<double> &b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  double s = std::max(max_abs(a), max_abs(b));
  return s > 0.0 ? d / s : d;
}

} // namespace testing
