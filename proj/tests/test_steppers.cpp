#include <doctest.h>

#include "fblts/splitting.hpp"
#include "fblts/steppers.hpp"
#include "helpers.hpp"

using namespace fblts;
using namespace testing;

namespace {

// Psi = 0, Phi = a
struct ConstantForcing {
  std::size_t nc, ne;
  double a;
  std::size_t n_cells() const { return nc; }
  std::size_t n_edges() const { return ne; }
  void thickness(std::span<const double>, std::span<const double>,
                 std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  }
  void momentum(std::span<const double>, std::span<const double>,
                std::span<double> out) {
    std::fill(out.begin(), out.end(), a);
  }
};

// h' = u, u' = -h, one degree of freedom per slot.
struct Oscillator {
  std::size_t n = 1;
  std::size_t n_cells() const { return n; }
  std::size_t n_edges() const { return n; }
  void thickness(std::span<const double> u, std::span<const double>,
                 std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = u[i];
  }
  void momentum(std::span<const double>, std::span<const double> h,
                std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = -h[i];
  }
};

// h' = -h
struct Decay {
  std::size_t n_cells() const { return 1; }
  std::size_t n_edges() const { return 1; }
  void thickness(std::span<const double>, std::span<const double> h,
                 std::span<double> out) {
    out[0] = -h[0];
  }
  void momentum(std::span<const double>, std::span<const double>,
                std::span<double> out) {
    out[0] = 0.0;
  }
};

} // namespace

TEST_CASE("constant forcing integrates exactly") {
  ConstantForcing sys{5, 7, 0.25};
  State s{std::vector<double>(5, 3.0), std::vector<double>(7, 1.0), 10.0};
  State a = fbrk32_step(sys, s, 2.0, FBWeights{});
  CHECK(a.h == s.h);
  for (double u : a.u)
    CHECK(u == 1.5);
  CHECK(a.t == 12.0);
  State b = rk4_step(sys, s, 2.0);
  CHECK(b.h == s.h);
  for (double u : b.u)
    CHECK(u == 1.5);
  CHECK_THROWS(fbrk32_step(sys, s, 0.0, FBWeights{}));
}

TEST_CASE("zero weights reproduce a hand-coded RK(3,2)") {
  Mesh m = build_periodic_hex_mesh(6, 6, 1000.0);
  m.coriolisVertex.assign(m.nVertices, 1e-4);
  PhysicsConfig p;
  p.rotationOn = true;
  ShallowWaterSystem sys(m, p);
  State s = random_state(m, 42);
  const double dt = 20.0;
  State got = fbrk32_step(sys, s, dt, FBWeights::zero());

  auto full = [&](const std::vector<double> &u, const std::vector<double> &h) {
    return tendency_full(m, State{h, u, 0.0}, p);
  };
  auto add = [](const std::vector<double> &x, double a,
                const std::vector<double> &d) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      r[i] = x[i] + a * d[i];
    return r;
  };
  TendencyPair t0 = full(s.u, s.h);
  auto h1 = add(s.h, dt / 3.0, t0.dh);
  auto u1 = add(s.u, dt / 3.0, t0.du);
  TendencyPair t1h = full(u1, h1), t1u = full(u1, s.h);
  auto h2 = add(s.h, dt / 2.0, t1h.dh);
  auto u2 = add(s.u, dt / 2.0, t1u.du);
  TendencyPair t2h = full(u2, h2), t2u = full(u2, h2);
  auto h3 = add(s.h, dt, t2h.dh);
  auto u3 = add(s.u, dt, t2u.du);
  CHECK(got.h == h3);
  CHECK(got.u == u3);
}

TEST_CASE("FB-RK(3,2) stage arithmetic on the oscillator") {
  Oscillator sys;
  const double dt = 0.1, b1 = 0.531, b2 = 0.531, b3 = 0.313;
  State s{{1.0}, {0.0}, 0.0};
  Fbrk32Stages st;
  State got = fbrk32_step(sys, s, dt, FBWeights{}, &st);

  const double h0 = 1.0, u0 = 0.0;
  double h1 = h0 + dt / 3 * u0;
  double hs = b1 * h1 + (1 - b1) * h0;
  double u1 = u0 - dt / 3 * hs;
  double h2 = h0 + dt / 2 * u1;
  double hss = b2 * h2 + (1 - b2) * h0;
  double u2 = u0 - dt / 2 * hss;
  double h3 = h0 + dt * u2;
  double hsss = b3 * h3 + (1 - 2 * b3) * h2 + b3 * h0;
  double u3 = u0 - dt * hsss;
  CHECK(std::abs(got.h[0] - h3) <= 1e-15);
  CHECK(std::abs(got.u[0] - u3) <= 1e-15);
  CHECK(std::abs(st.hsss[0] - hsss) <= 1e-15);
  CHECK(std::abs(st.u1[0] - u1) <= 1e-15);
}

TEST_CASE("FB-RK(3,2) is linear for a linear system") {
  Oscillator sys{64};
  State a{random_field(64, 1), random_field(64, 2), 0.0};
  State b{random_field(64, 3), random_field(64, 4), 0.0};
  State ab{std::vector<double>(64), std::vector<double>(64), 0.0};
  for (int i = 0; i < 64; ++i) {
    ab.h[i] = a.h[i] + b.h[i];
    ab.u[i] = a.u[i] + b.u[i];
  }
  State ra = fbrk32_step(sys, a, 0.3, FBWeights{});
  State rb = fbrk32_step(sys, b, 0.3, FBWeights{});
  State rab = fbrk32_step(sys, ab, 0.3, FBWeights{});
  for (int i = 0; i < 64; ++i) {
    CHECK(rab.h[i] == doctest::Approx(ra.h[i] + rb.h[i]).epsilon(1e-14).scale(1.0));
    CHECK(rab.u[i] == doctest::Approx(ra.u[i] + rb.u[i]).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("RK4 on exponential decay") {
  Decay sys;
  State s{{1.0}, {0.0}, 0.0};
  State r = rk4_step(sys, s, 0.1);
  const double z = -0.1;
  double taylor = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  CHECK(r.h[0] == doctest::Approx(taylor).epsilon(1e-15));
  CHECK(r.h[0] == doctest::Approx(0.904837418).epsilon(1e-7));
  // Leading truncation term is |z|^5 / 120.
  CHECK(std::abs(r.h[0] - std::exp(z)) <= 8.4e-8);
}

TEST_CASE("global steps conserve mass and flag positivity by stage") {
  Mesh m = build_periodic_hex_mesh(8, 8, 1000.0);
  PhysicsConfig p;
  ShallowWaterSystem sys(m, p);
  State s = random_state(m, 5, 100.0, 5.0, 2.0);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  State a = fbrk32_step(sys, s, 5.0, FBWeights{});
  State b = rk4_step(sys, s, 5.0);
  for (Index i = 0; i < m.nCells; ++i) {
    m0 += m.areaCell[i] * s.h[i];
    m1 += m.areaCell[i] * a.h[i];
    m2 += m.areaCell[i] * b.h[i];
  }
  CHECK(std::abs(m1 - m0) <= 1e-13 * m0);
  CHECK(std::abs(m2 - m0) <= 1e-13 * m0);

  State thin = random_state(m, 6, 1e-3, 5e-4, 50.0);
  try {
    (void)fbrk32_step(sys, thin, 100.0, FBWeights{});
    FAIL("expected a positivity abort");
  } catch (const PositivityError &e) {
    CHECK(e.stage == 1);
    CHECK(e.field == "h");
  }
}

TEST_CASE("courant number") {
  Mesh m = build_periodic_hex_mesh(4, 4, 1000.0);
  State s{std::vector<double>(m.nCells, 100.0), std::vector<double>(m.nEdges, 0.0), 0.0};
  CourantResult c = courant_number(m, s, 9.80665, 10.0);
  CHECK(c.nu == doctest::Approx(0.313156).epsilon(1e-6));
  CHECK(courant_number(m, s, 9.81, 10.0).nu == doctest::Approx(0.31321).epsilon(1e-5));
  CHECK(courant_number(m, s, 9.80665, 0.0).nu == 0.0);
  CHECK(courant_number(m, s, 9.80665, 20.0).nu == 2.0 * c.nu);
  s.u[9] = 5.0;
  CHECK(courant_number(m, s, 9.80665, 10.0).edge == 9);
}

TEST_CASE("FB weights guard range") {
  CHECK_NOTHROW(FBWeights{}.check());
  CHECK_THROWS(FBWeights{1.2, 0.5, 0.3}.check());
  CHECK_THROWS(FBWeights{0.5, -0.1, 0.3}.check());
}
