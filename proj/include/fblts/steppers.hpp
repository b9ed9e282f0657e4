#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <vector>

#include "fblts/operators.hpp"

namespace fblts {

struct FBWeights {
  double beta1 = 0.531;
  double beta2 = 0.531;
  double beta3 = 0.313;

  static constexpr FBWeights zero() { return {0.0, 0.0, 0.0}; }
  void check() const {
    for (double b : {beta1, beta2, beta3})
      if (!(b >= 0.0 && b <= 1.0))
        throw std::invalid_argument("FB weights must lie in [0, 1]");
  }
};

// Anything the global steppers can integrate: Psi over all cells and Phi
// over all edges. check_thickness is optional.
template <class S>
concept TendencySystem = requires(S &s, std::span<const double> u,
                                  std::span<const double> h,
                                  std::span<double> out) {
  { s.n_cells() } -> std::convertible_to<std::size_t>;
  { s.n_edges() } -> std::convertible_to<std::size_t>;
  s.thickness(u, h, out);
  s.momentum(u, h, out);
};

// All nine stage fields of one FB-RK(3,2) step.
struct Fbrk32Stages {
  std::vector<double> h1, hstar, u1;  // t^{n+1/3}
  std::vector<double> h2, hss, u2;    // t^{n+1/2}
  std::vector<double> h3, hsss, u3;   // t^{n+1}
};

struct Rk4Stages {
  std::vector<double> h[4], u[4]; // arguments of the four evaluations
};

namespace detail {

template <class S>
void check_h(S &sys, std::span<const double> h, int stage) {
  if constexpr (requires { sys.check_thickness(h, stage); })
    sys.check_thickness(h, stage);
}

inline void axpy(std::vector<double> &out, std::span<const double> x,
                 double a, std::span<const double> d) {
  out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + a * d[i];
}

inline double fb2(double b, double hb, double h0) {
  return b * hb + (1.0 - b) * h0;
}
inline double fb3(double b, double h3, double h2, double h0) {
  return b * h3 + (1.0 - 2.0 * b) * h2 + b * h0;
}
inline void fb_average(std::vector<double> &out, double b,
                       std::span<const double> hb,
                       std::span<const double> h0) {
  out.resize(h0.size());
  for (std::size_t i = 0; i < h0.size(); ++i)
    out[i] = fb2(b, hb[i], h0[i]);
}
inline void fb_average(std::vector<double> &out, double b,
                       std::span<const double> h3,
                       std::span<const double> h2,
                       std::span<const double> h0) {
  out.resize(h0.size());
  for (std::size_t i = 0; i < h0.size(); ++i)
    out[i] = fb3(b, h3[i], h2[i], h0[i]);
}

} // namespace detail

/// One FB-RK(3,2) step. dh/du scratch are local; stage data goes to rec.
template <TendencySystem S>
State fbrk32_step(S &sys, const State &s, double dt, const FBWeights &w,
                  Fbrk32Stages *rec = nullptr) {
  if (!(dt > 0.0))
    throw std::invalid_argument("dt must be positive");
  Fbrk32Stages local;
  Fbrk32Stages &r = rec ? *rec : local;
  std::vector<double> dh(sys.n_cells()), du(sys.n_edges());
  const std::vector<double> &h = s.h, &u = s.u;

  sys.thickness(u, h, dh);
  detail::axpy(r.h1, h, dt / 3.0, dh);
  detail::check_h(sys, r.h1, 1);
  detail::fb_average(r.hstar, w.beta1, r.h1, h);
  sys.momentum(u, r.hstar, du);
  detail::axpy(r.u1, u, dt / 3.0, du);

  sys.thickness(r.u1, r.h1, dh);
  detail::axpy(r.h2, h, dt / 2.0, dh);
  detail::check_h(sys, r.h2, 2);
  detail::fb_average(r.hss, w.beta2, r.h2, h);
  sys.momentum(r.u1, r.hss, du);
  detail::axpy(r.u2, u, dt / 2.0, du);

  sys.thickness(r.u2, r.h2, dh);
  detail::axpy(r.h3, h, dt, dh);
  detail::check_h(sys, r.h3, 3);
  detail::fb_average(r.hsss, w.beta3, r.h3, r.h2, h);
  sys.momentum(r.u2, r.hsss, du);
  detail::axpy(r.u3, u, dt, du);

  return State{r.h3, r.u3, s.t + dt};
}

template <TendencySystem S>
State rk4_step(S &sys, const State &s, double dt, Rk4Stages *rec = nullptr) {
  if (!(dt > 0.0))
    throw std::invalid_argument("dt must be positive");
  const std::size_t nc = sys.n_cells(), ne = sys.n_edges();
  std::vector<double> kh[4], ku[4];
  std::vector<double> hs = s.h, us = s.u;
  static constexpr double frac[4] = {0.0, 0.5, 0.5, 1.0};
  for (int st = 0; st < 4; ++st) {
    if (st > 0) {
      detail::axpy(hs, s.h, frac[st] * dt, kh[st - 1]);
      detail::axpy(us, s.u, frac[st] * dt, ku[st - 1]);
      detail::check_h(sys, hs, st + 1);
    }
    if (rec) {
      rec->h[st] = hs;
      rec->u[st] = us;
    }
    kh[st].resize(nc);
    ku[st].resize(ne);
    sys.thickness(us, hs, kh[st]);
    sys.momentum(us, hs, ku[st]);
  }
  State out{std::vector<double>(nc), std::vector<double>(ne), s.t + dt};
  for (std::size_t i = 0; i < nc; ++i)
    out.h[i] = s.h[i] + dt / 6.0 *
                            (kh[0][i] + 2.0 * kh[1][i] + 2.0 * kh[2][i] +
                             kh[3][i]);
  for (std::size_t e = 0; e < ne; ++e)
    out.u[e] = s.u[e] + dt / 6.0 *
                            (ku[0][e] + 2.0 * ku[1][e] + 2.0 * ku[2][e] +
                             ku[3][e]);
  detail::check_h(sys, out.h, 4);
  return out;
}

struct CourantResult {
  double nu = 0.0;
  Index edge = kNoIndex;
};

CourantResult courant_number(const Mesh &m, const State &s, double g,
                             double dt);

} // namespace fblts
