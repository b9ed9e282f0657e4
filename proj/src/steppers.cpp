#include "fblts/steppers.hpp"

namespace fblts {

CourantResult courant_number(const Mesh &m, const State &s, double g,
                             double dt) {
  CourantResult r;
  for (Index e = 0; e < m.nEdges; ++e) {
    double he = kernel::edge_thickness(m, s.h, e);
    double nu = (std::abs(s.u[e]) + std::sqrt(g * he)) * dt / m.dEdge[e];
    if (r.edge == kNoIndex || nu > r.nu) {
      r.nu = nu;
      r.edge = e;
    }
  }
  return r;
}

} // namespace fblts
